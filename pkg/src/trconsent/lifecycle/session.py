"""Per-patient consent sessions.

A session owns the patient's fact store, rule-policy instances, and the
store of instantiated authorization policies. Incoming consent requests,
patient decisions, patient commands (withdraw / activate / delete), and
timer expirations are translated into facts; the rule engine is then
stepped and the actions of the fired rule are dispatched against the
policy store. Every observable effect is appended to the session's event
log, which is the single source of truth for replay and for the UI feed.

Fact discipline (the rules' working vocabulary):

* ``needsConsent(patient, requester)`` - asserted when a request arrives;
  retracted when the request is queued for a manual decision or answered.
* ``consentAvailable(patient, requester)`` - asserted by a granting
  decision or by a successful policy evaluation; retracted once the
  consent response is sent.
* ``saveCurrentPreferences`` - asserted by a grant-and-save decision;
  retracted once the response is sent.
* ``instantiatedPolicy(patient)`` / ``withdrawn(patient.Policy)`` -
  projections of the policy store for the requester currently being
  served, refreshed before each interaction.
* ``timeout(patient.Policy)``, ``deleteSavedPreferences(patient)``,
  ``activatePolicyRequest(patient)``, ``withdrawPolicyRequest(patient)`` -
  transient triggers injected by the timer wheel or patient commands and
  retracted right after the engine has reacted.

All mutations of one session must arrive through one logical event loop;
the service layer serializes calls per patient.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable

from ..authz.documents import serialize_authorization_policy, parse_authorization_policy
from ..authz.model import (
    AccessRequest,
    AuthorizationPolicy,
    ContextSnapshot,
    Outcome,
    PolicyState,
)
from ..authz.pdp import evaluate_access
from ..context.hub import ContextHub
from ..errors import (
    ConfigError,
    ContextError,
    DuplicateDecisionError,
    InfoPointLookupError,
    LifecycleError,
    MalformedComparisonError,
    PolicyStateError,
    TemplateError,
    UnknownRequestError,
)
from ..templates.forge import instantiate_policy, match_templates
from ..templates.model import EmergencyActive, PolicyTemplate
from ..tr.ast import Fact, TrInstance, TrPolicy
from ..tr.eval import ActionInvocation, step
from . import events as ev
from .events import Event
from .requests import ConsentRequest, ConsentResponse, serialize_consent_request, parse_consent_request

MAX_CASCADE = 32

LIFECYCLE_ACTIONS = frozenset(
    {
        "instantiatePolicy",
        "activate",
        "sendConsent",
        "evaluatePolicy",
        "waitPatientDecision",
        "withdraw",
        "remove",
    }
)


class TransitionVerb(enum.Enum):
    WITHDRAW = "withdraw"
    ACTIVATE = "activate"
    DELETE = "delete"


class _PlanAbort(Exception):
    """Internal: a dispatched action could not complete; the in-flight
    request is answered with an error message instead."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


@dataclass
class SessionRuntime:
    """Fixtures and services shared by all sessions of one engine."""

    tr_policies: dict[str, TrPolicy]
    templates: tuple[PolicyTemplate, ...]
    goal_map: dict[str, str]  # goal tag -> rule policy name
    hub: ContextHub
    role_level_emergency: bool = False
    notify_response: Callable[[str, ConsentResponse], None] | None = None

    def validate(self) -> None:
        for goal, name in self.goal_map.items():
            if name not in self.tr_policies:
                raise ConfigError(
                    f"goal {goal!r} maps to unknown rule policy {name!r}"
                )
        for template in self.templates:
            if template.goal_tag not in self.goal_map:
                raise ConfigError(
                    f"template {template.id!r} references unmapped goal "
                    f"{template.goal_tag!r}"
                )


@dataclass
class PolicyMeta:
    goal_tag: str
    requester_id: str
    requester_key: str  # requester id, or the role for role-level policies
    template_id: str


class ConsentSession:
    def __init__(self, patient_id: str, runtime: SessionRuntime):
        from ..context.facts import FactStore

        self.patient_id = patient_id
        self.runtime = runtime
        self.facts = FactStore()
        self.instances: dict[str, TrInstance] = {}
        self.policies: dict[str, AuthorizationPolicy] = {}
        self.policy_meta: dict[str, PolicyMeta] = {}
        self.tombstones: set[str] = set()
        self.pending: dict[str, tuple[ConsentRequest, str]] = {}
        self.answered: set[str] = set()
        self.timers: dict[str, str] = {}  # policy id -> ISO expiry
        self.pending_expiry: dict[tuple[str, str], str] = {}
        self.outbox: list[ConsentResponse] = []
        self.log: list[Event] = []
        self._seq = 0
        self._ctx_request: ConsentRequest | None = None
        self._cmd_target: str | None = None
        self._timeout_target: str | None = None
        self._last_instantiated: str | None = None
        self._emit_hook: Callable[[str, Event], None] | None = None

    # --- event log -----------------------------------------------------------

    def _emit(self, type_: str, **data: Any) -> Event:
        event = Event(self._seq, self.runtime.hub.clock.now_iso(), type_, data)
        self._seq += 1
        self.log.append(event)
        if self._emit_hook is not None:
            self._emit_hook(self.patient_id, event)
        return event

    def audit_log(self) -> list[Event]:
        return [e for e in self.log if e.type in ev.AUDIT_EVENT_TYPES]

    # --- fact helpers -----------------------------------------------------------

    @property
    def _handle(self) -> str:
        return f"{self.patient_id}.Policy"

    def _live_policy(
        self, goal: str, requester_id: str, requester_role: str
    ) -> tuple[AuthorizationPolicy, str] | None:
        for pid, meta in self.policy_meta.items():
            if pid not in self.policies or meta.goal_tag != goal:
                continue
            if meta.requester_key in (requester_id, requester_role):
                return self.policies[pid], pid
        return None

    def _sync_policy_facts(self, goal: str, req: ConsentRequest) -> None:
        live = self._live_policy(goal, req.requester_id, req.requester_role)
        instantiated = Fact("instantiatedPolicy", (self.patient_id,))
        withdrawn = Fact("withdrawn", (self._handle,))
        if live is None:
            self.facts.update(retract=(instantiated, withdrawn))
        else:
            policy, _ = live
            if policy.state is PolicyState.WITHDRAWN:
                self.facts.update(assert_=(instantiated, withdrawn))
            else:
                self.facts.update(assert_=(instantiated,), retract=(withdrawn,))

    def _retract_transients(self, req: ConsentRequest | None) -> None:
        to_retract = [Fact("saveCurrentPreferences")]
        if req is not None:
            pair = (self.patient_id, req.requester_id)
            to_retract.append(Fact("needsConsent", pair))
            to_retract.append(Fact("consentAvailable", pair))
        self.facts.update(retract=to_retract)

    # --- responses ---------------------------------------------------------------

    def _respond(
        self, req: ConsentRequest, granted: bool, message: str | None = None
    ) -> ConsentResponse:
        if req.request_id in self.answered:
            raise DuplicateDecisionError(
                f"request {req.request_id!r} was already answered"
            )
        response = ConsentResponse(
            req.request_id, granted, message, self.runtime.hub.clock.now_iso()
        )
        self.outbox.append(response)
        self.answered.add(req.request_id)
        self._emit(
            ev.CONSENT_SENT,
            requestId=req.request_id,
            granted=granted,
            message=message,
            requesterId=req.requester_id,
            patientId=self.patient_id,
        )
        if self.runtime.notify_response is not None:
            self.runtime.notify_response(self.patient_id, response)
        return response

    # --- engine loop ----------------------------------------------------------------

    def _run_tr(self, goal: str) -> None:
        inst = self.instances[goal]
        for _ in range(MAX_CASCADE):
            plan = step(inst, self.facts.facts())
            if not plan:
                return
            assert inst.last_firing is not None
            index, subst = inst.last_firing
            self._emit(
                ev.RULE_FIRED,
                policy=inst.policy.name,
                ruleIndex=index,
                bindings={k: subst[k] for k in sorted(subst)},
            )
            try:
                for stage in plan:
                    for invocation in stage:
                        self._dispatch(invocation, goal)
            except _PlanAbort as abort:
                req = self._ctx_request
                if req is not None and req.request_id not in self.answered:
                    self._respond(req, granted=False, message=abort.message)
                self._retract_transients(req)
                return
        raise LifecycleError(f"rule cascade for goal {goal!r} did not settle")

    def _with_transient_fact(self, goal: str, fact: Fact) -> None:
        self.facts.assert_fact(fact)
        try:
            self._run_tr(goal)
        finally:
            self.facts.retract_fact(fact)
            self._run_tr(goal)

    # --- action dispatch --------------------------------------------------------------

    def _dispatch(self, invocation: ActionInvocation, goal: str) -> None:
        name = invocation.name
        if name not in LIFECYCLE_ACTIONS:
            raise ConfigError(f"rule policy calls unknown action {name!r}")
        if name == "instantiatePolicy":
            self._do_instantiate(goal)
        elif name == "activate":
            self._do_activate(goal)
        elif name == "sendConsent":
            self._do_send_consent()
        elif name == "evaluatePolicy":
            self._do_evaluate(goal)
        elif name == "waitPatientDecision":
            self._do_queue(goal)
        elif name == "withdraw":
            self._do_transition_target(goal, TransitionVerb.WITHDRAW)
        else:  # remove
            self._do_transition_target(goal, TransitionVerb.DELETE)

    def _require_request(self, action: str) -> ConsentRequest:
        if self._ctx_request is None:
            raise ConfigError(f"{action} fired outside a request context")
        return self._ctx_request

    def _snapshot_for(self, req: ConsentRequest) -> ContextSnapshot:
        return self.runtime.hub.snapshot(req.requester_id, self.patient_id)

    def _store_policy(
        self,
        policy: AuthorizationPolicy,
        template: PolicyTemplate,
        req: ConsentRequest,
        goal: str,
        *,
        role_level: bool,
    ) -> None:
        requester_key = req.requester_role if role_level else req.requester_id
        self.policies[policy.id] = policy
        self.policy_meta[policy.id] = PolicyMeta(
            goal_tag=goal,
            requester_id=req.requester_id,
            requester_key=requester_key,
            template_id=template.id,
        )
        self.tombstones.discard(policy.id)
        expiry = self.pending_expiry.get((goal, req.requester_id))
        if expiry is not None:
            self.timers[policy.id] = expiry
        self.facts.assert_fact(Fact("instantiatedPolicy", (self.patient_id,)))
        self._emit(
            ev.POLICY_INSTANTIATED,
            policyId=policy.id,
            templateId=template.id,
            requesterId=req.requester_id,
            goalTag=goal,
        )
        self._last_instantiated = policy.id

    def _template_for_goal(
        self, goal: str, req: ConsentRequest, snap: ContextSnapshot
    ) -> PolicyTemplate:
        try:
            matched = match_templates(req, snap, self.runtime.templates)
        except TemplateError as exc:
            raise _PlanAbort(str(exc)) from exc
        for template in matched:
            if template.goal_tag == goal:
                return template
        raise _PlanAbort(f"no applicable policy template for goal {goal!r}")

    def _role_level_for(self, template: PolicyTemplate) -> bool:
        if not self.runtime.role_level_emergency:
            return False
        emergencyish = template.break_the_glass or any(
            isinstance(c, EmergencyActive) for c in template.conditions
        )
        return emergencyish

    def _do_instantiate(self, goal: str) -> None:
        req = self._require_request("instantiatePolicy")
        try:
            snap = self._snapshot_for(req)
            template = self._template_for_goal(goal, req, snap)
            role_level = self._role_level_for(template)
            policy = instantiate_policy(
                template, req, snap, self.runtime.hub.info_point, role_level=role_level
            )
        except (TemplateError, InfoPointLookupError, ContextError) as exc:
            raise _PlanAbort(str(exc)) from exc
        self._store_policy(policy, template, req, goal, role_level=role_level)

    def _resolve_target(self, goal: str) -> str | None:
        if self._cmd_target is not None:
            return self._cmd_target
        if self._timeout_target is not None:
            return self._timeout_target
        if self._last_instantiated is not None and self._last_instantiated in self.policies:
            return self._last_instantiated
        if self._ctx_request is not None:
            live = self._live_policy(
                goal, self._ctx_request.requester_id, self._ctx_request.requester_role
            )
            if live is not None:
                return live[1]
        return None

    def _do_activate(self, goal: str) -> None:
        pid = self._resolve_target(goal)
        if pid is None or pid not in self.policies:
            raise _PlanAbort("activate: no policy to activate")
        if self.policies[pid].state is PolicyState.WITHDRAWN:
            self.transition_policy(pid, TransitionVerb.ACTIVATE)
        else:
            # freshly instantiated policies are already Active; confirm it
            self._emit(ev.POLICY_ACTIVATED, policyId=pid)

    def _do_send_consent(self) -> None:
        req = self._require_request("sendConsent")
        self._respond(req, granted=True)
        self._retract_transients(req)

    def _do_evaluate(self, goal: str) -> None:
        req = self._require_request("evaluatePolicy")
        live = self._live_policy(goal, req.requester_id, req.requester_role)
        if live is None or live[0].state is not PolicyState.ACTIVE:
            raise _PlanAbort("evaluatePolicy: no active policy for this requester")
        policy, _pid = live
        try:
            snap = self._snapshot_for(req)
        except ContextError as exc:
            raise _PlanAbort(str(exc)) from exc
        for resource in sorted(req.resources):
            for right in sorted(req.rights):
                access = AccessRequest(
                    requester_id=req.requester_id,
                    requester_role=req.requester_role,
                    subject_id=self.patient_id,
                    resource=resource,
                    right=right,
                    purpose=req.purpose,
                )
                try:
                    decision = evaluate_access(policy, access, snap)
                except (MalformedComparisonError, PolicyStateError) as exc:
                    raise _PlanAbort(str(exc)) from exc
                if decision.outcome is not Outcome.PERMIT:
                    self._respond(req, granted=False, message=decision.reason)
                    self._retract_transients(req)
                    return
        self.facts.assert_fact(
            Fact("consentAvailable", (self.patient_id, req.requester_id))
        )

    def _do_queue(self, goal: str) -> None:
        req = self._require_request("waitPatientDecision")
        self.pending[req.request_id] = (req, goal)
        self._emit(
            ev.DECISION_QUEUED,
            requestId=req.request_id,
            requesterId=req.requester_id,
            requesterRole=req.requester_role,
            purpose=req.purpose,
            resources=sorted(req.resources),
            rights=sorted(req.rights),
        )
        self.facts.retract_fact(
            Fact("needsConsent", (self.patient_id, req.requester_id))
        )

    def _do_transition_target(self, goal: str, verb: TransitionVerb) -> None:
        pid = self._resolve_target(goal)
        if pid is None:
            raise _PlanAbort(f"{verb.value}: cannot resolve the target policy")
        self.transition_policy(pid, verb)

    # --- public operations ------------------------------------------------------------

    def handle_consent_request(self, req: ConsentRequest) -> list[Event]:
        """React to an incoming consent request; returns the new events."""
        start = len(self.log)
        if req.patient_id != self.patient_id:
            raise LifecycleError(
                f"request for patient {req.patient_id!r} sent to session "
                f"{self.patient_id!r}"
            )
        if req.request_id in self.answered or req.request_id in self.pending:
            raise LifecycleError(f"duplicate request id {req.request_id!r}")

        snap = self.runtime.hub.snapshot(req.requester_id, self.patient_id)
        matched = match_templates(req, snap, self.runtime.templates)
        if not matched:
            raise LifecycleError(
                f"no applicable policy template for role {req.requester_role!r}"
            )
        top = matched[0]
        goal = top.goal_tag
        self._ensure_instance(goal)

        key = (goal, req.requester_id)
        if key not in self.pending_expiry:
            duration = req.treatment_duration
            if duration is None and req.referral_id is not None:
                duration = self.runtime.hub.info_point.treatment_duration(
                    req.referral_id
                )
            if duration is None:
                duration = req.access_duration
            if duration is not None:
                expiry = self.runtime.hub.clock.now() + duration
                self.pending_expiry[key] = expiry.isoformat()

        live = self._live_policy(goal, req.requester_id, req.requester_role)
        if req.patient_unconscious and top.break_the_glass and live is None:
            self._ctx_request = req
            try:
                self._break_the_glass(goal, top, req, snap)
            finally:
                self._ctx_request = None
            return self.log[start:]

        self._ctx_request = req
        try:
            self._sync_policy_facts(goal, req)
            self.facts.assert_fact(
                Fact("needsConsent", (self.patient_id, req.requester_id))
            )
            self._run_tr(goal)
        finally:
            self._ctx_request = None
        return self.log[start:]

    def _ensure_instance(self, goal: str) -> TrInstance:
        if goal in self.instances:
            return self.instances[goal]
        name = self.runtime.goal_map.get(goal)
        if name is None:
            raise ConfigError(f"no rule policy mapped for goal {goal!r}")
        policy = self.runtime.tr_policies.get(name)
        if policy is None:
            raise ConfigError(f"rule policy {name!r} not loaded")
        if len(policy.params) != 1:
            raise ConfigError(
                f"rule policy {name!r} must take exactly one parameter (the patient)"
            )
        inst = TrInstance(policy, {policy.params[0]: self.patient_id})
        self.instances[goal] = inst
        return inst

    def _break_the_glass(
        self,
        goal: str,
        template: PolicyTemplate,
        req: ConsentRequest,
        snap: ContextSnapshot,
    ) -> None:
        role_level = self._role_level_for(template)
        policy = instantiate_policy(
            template, req, snap, self.runtime.hub.info_point, role_level=role_level
        )
        self._emit(
            ev.BREAK_THE_GLASS,
            requestId=req.request_id,
            requesterId=req.requester_id,
            requesterRole=req.requester_role,
            patientId=self.patient_id,
            resources=sorted(req.resources),
            rights=sorted(req.rights),
            purpose=req.purpose,
            policyId=policy.id,
            templateId=template.id,
            justification="patient unconscious; consent given on the patient's behalf",
            context={
                "time": snap.access_time,
                "date": snap.access_date.isoformat(),
                "requesterLocation": snap.requester_location,
                "subjectLocation": snap.subject_location,
                "emergency": snap.emergency,
            },
        )
        self._store_policy(policy, template, req, goal, role_level=role_level)
        self._emit(ev.POLICY_ACTIVATED, policyId=policy.id)
        self._respond(req, granted=True)
        self._sync_policy_facts(goal, req)

    def record_patient_decision(
        self, request_id: str, grant: bool, save_preferences: bool = False
    ) -> list[Event]:
        start = len(self.log)
        if request_id in self.answered:
            raise DuplicateDecisionError(f"request {request_id!r} already decided")
        entry = self.pending.pop(request_id, None)
        if entry is None:
            raise UnknownRequestError(f"no pending request {request_id!r}")
        req, goal = entry
        self._ctx_request = req
        try:
            if not grant:
                self._respond(req, granted=False, message="patient denied consent")
                self._retract_transients(req)
            else:
                self._sync_policy_facts(goal, req)
                to_assert = [
                    Fact("consentAvailable", (self.patient_id, req.requester_id))
                ]
                if save_preferences:
                    to_assert.append(Fact("saveCurrentPreferences"))
                self.facts.update(assert_=to_assert)
                self._run_tr(goal)
        finally:
            self._ctx_request = None
        return self.log[start:]

    def transition_policy(
        self, policy_id: str, verb: TransitionVerb
    ) -> PolicyState:
        if policy_id in self.tombstones:
            raise PolicyStateError(f"policy {policy_id!r} was deleted; Deleted is terminal")
        policy = self.policies.get(policy_id)
        if policy is None:
            raise LifecycleError(f"unknown policy {policy_id!r}")
        meta = self.policy_meta[policy_id]
        withdrawn_fact = Fact("withdrawn", (self._handle,))
        if verb is TransitionVerb.WITHDRAW:
            if policy.state is not PolicyState.ACTIVE:
                raise PolicyStateError(
                    f"cannot withdraw a {policy.state.value} policy"
                )
            self.policies[policy_id] = policy.with_state(PolicyState.WITHDRAWN)
            self.facts.assert_fact(withdrawn_fact)
            self._emit(ev.POLICY_WITHDRAWN, policyId=policy_id)
            return PolicyState.WITHDRAWN
        if verb is TransitionVerb.ACTIVATE:
            if policy.state is not PolicyState.WITHDRAWN:
                raise PolicyStateError(
                    f"cannot activate a {policy.state.value} policy"
                )
            self.policies[policy_id] = policy.with_state(PolicyState.ACTIVE)
            self.facts.update(
                retract=(
                    withdrawn_fact,
                    Fact("activatePolicyRequest", (self.patient_id,)),
                )
            )
            self._emit(ev.POLICY_ACTIVATED, policyId=policy_id)
            return PolicyState.ACTIVE
        # delete: allowed from any live state, erases policy and timer forever
        del self.policies[policy_id]
        self.tombstones.add(policy_id)
        self.timers.pop(policy_id, None)
        self.pending_expiry.pop((meta.goal_tag, meta.requester_id), None)
        self.facts.update(
            retract=(
                withdrawn_fact,
                Fact("instantiatedPolicy", (self.patient_id,)),
                Fact("deleteSavedPreferences", (self.patient_id,)),
            )
        )
        self._emit(ev.POLICY_DELETED, policyId=policy_id)
        return PolicyState.DELETED

    def patient_command(self, verb: TransitionVerb, policy_id: str) -> list[Event]:
        """Steer a stored policy the way the patient console does: inject the
        trigger fact and let the rule policy perform the transition."""
        start = len(self.log)
        if policy_id in self.tombstones:
            raise PolicyStateError(f"policy {policy_id!r} was deleted; Deleted is terminal")
        policy = self.policies.get(policy_id)
        if policy is None:
            raise LifecycleError(f"unknown policy {policy_id!r}")
        if verb is TransitionVerb.WITHDRAW and policy.state is not PolicyState.ACTIVE:
            raise PolicyStateError(f"cannot withdraw a {policy.state.value} policy")
        if verb is TransitionVerb.ACTIVATE and policy.state is not PolicyState.WITHDRAWN:
            raise PolicyStateError(f"cannot activate a {policy.state.value} policy")
        goal = self.policy_meta[policy_id].goal_tag
        self._ensure_instance(goal)
        fact_name = {
            TransitionVerb.WITHDRAW: "withdrawPolicyRequest",
            TransitionVerb.ACTIVATE: "activatePolicyRequest",
            TransitionVerb.DELETE: "deleteSavedPreferences",
        }[verb]
        self._cmd_target = policy_id
        try:
            self._with_transient_fact(goal, Fact(fact_name, (self.patient_id,)))
        finally:
            self._cmd_target = None
        return self.log[start:]

    def process_timeouts(self, now: datetime | None = None) -> list[Event]:
        """Fire the ``timeout`` trigger for every expired policy timer."""
        start = len(self.log)
        instant = now or self.runtime.hub.clock.now()
        due = sorted(
            pid
            for pid, expiry in self.timers.items()
            if datetime.fromisoformat(expiry) <= instant
        )
        for pid in due:
            if pid not in self.policies:
                self.timers.pop(pid, None)
                continue
            goal = self.policy_meta[pid].goal_tag
            self._ensure_instance(goal)
            self._timeout_target = pid
            try:
                self._with_transient_fact(goal, Fact("timeout", (self._handle,)))
            finally:
                self._timeout_target = None
            if pid in self.timers:
                # the goal's rule policy has no removal rule; drop the timer
                # so this expiry cannot fire again, and leave a note
                self.timers.pop(pid)
                self._emit(
                    ev.AUDIT_NOTE,
                    policyId=pid,
                    note="timer expired but the rule policy retained the policy",
                )
        return self.log[start:]

    # --- persistence ------------------------------------------------------------------

    def to_doc(self) -> dict[str, Any]:
        def firing_doc(inst: TrInstance) -> dict[str, Any] | None:
            if inst.last_firing is None:
                return None
            index, subst = inst.last_firing
            return {"ruleIndex": index, "bindings": {k: subst[k] for k in sorted(subst)}}

        return {
            "patientId": self.patient_id,
            "facts": [[f.pred, list(f.args)] for f in self.facts.facts()],
            "factRevision": self.facts.revision,
            "instances": {
                goal: {
                    "policy": inst.policy.name,
                    "bindings": dict(inst.bindings),
                    "lastFiring": firing_doc(inst),
                }
                for goal, inst in sorted(self.instances.items())
            },
            "policies": [
                serialize_authorization_policy(self.policies[pid])
                for pid in self.policies
            ],
            "policyMeta": {
                pid: {
                    "goalTag": meta.goal_tag,
                    "requesterId": meta.requester_id,
                    "requesterKey": meta.requester_key,
                    "templateId": meta.template_id,
                }
                for pid, meta in self.policy_meta.items()
            },
            "tombstones": sorted(self.tombstones),
            "pending": [
                {"request": serialize_consent_request(req), "goal": goal}
                for req, goal in self.pending.values()
            ],
            "answered": sorted(self.answered),
            "timers": dict(sorted(self.timers.items())),
            "pendingExpiry": [
                [goal, requester, expiry]
                for (goal, requester), expiry in sorted(self.pending_expiry.items())
            ],
            "outbox": [r.to_doc() for r in self.outbox],
            "log": [e.to_doc() for e in self.log],
            "seq": self._seq,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any], runtime: SessionRuntime) -> "ConsentSession":
        session = cls(str(doc["patientId"]), runtime)
        for pred, args in doc.get("facts", []):
            session.facts.assert_fact(Fact(str(pred), tuple(str(a) for a in args)))
        for goal, inst_doc in doc.get("instances", {}).items():
            name = inst_doc["policy"]
            policy = runtime.tr_policies.get(name)
            if policy is None:
                raise ConfigError(f"persisted instance references unknown policy {name!r}")
            inst = TrInstance(policy, dict(inst_doc["bindings"]))
            firing = inst_doc.get("lastFiring")
            if firing is not None:
                inst.last_firing = (int(firing["ruleIndex"]), dict(firing["bindings"]))
            session.instances[goal] = inst
        for policy_doc in doc.get("policies", []):
            policy = parse_authorization_policy(policy_doc)
            session.policies[policy.id] = policy
        for pid, meta in doc.get("policyMeta", {}).items():
            session.policy_meta[pid] = PolicyMeta(
                goal_tag=meta["goalTag"],
                requester_id=meta["requesterId"],
                requester_key=meta["requesterKey"],
                template_id=meta["templateId"],
            )
        session.tombstones = set(doc.get("tombstones", []))
        for item in doc.get("pending", []):
            req_doc = item["request"]
            req = parse_consent_request(req_doc, req_doc.get("receivedAt", ""))
            session.pending[req.request_id] = (req, item["goal"])
        session.answered = set(doc.get("answered", []))
        session.timers = dict(doc.get("timers", {}))
        session.pending_expiry = {
            (goal, requester): expiry
            for goal, requester, expiry in doc.get("pendingExpiry", [])
        }
        session.outbox = [
            ConsentResponse(
                r["requestId"], r["granted"], r.get("message"), r["issuedAt"]
            )
            for r in doc.get("outbox", [])
        ]
        session.log = [Event.from_doc(e) for e in doc.get("log", [])]
        session._seq = int(doc.get("seq", len(session.log)))
        return session
