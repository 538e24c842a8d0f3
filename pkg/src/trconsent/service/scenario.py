"""Scripted scenario traces: replay stimuli against a fresh engine and
check the expected events, policy states, responses, and queues.

A trace is a JSON document: a ``fixtures`` section (same shape the server
uses) and an ordered ``steps`` list. Stimulus steps drive the engine
through the same command bus the HTTP API uses; each ``assert`` step
checks the events emitted since the previous assert for its patient, so a
trace that asserts after every stimulus pins the whole event log.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import LifecycleError, ScenarioError, TrConsentError
from ..lifecycle.session import TransitionVerb
from .engine import ConsentEngine
from .fixtures import EngineFixtures, load_fixtures

_STEP_KINDS = (
    "advanceClock",
    "setClock",
    "setEmergency",
    "setLocation",
    "consentRequest",
    "patientDecision",
    "patientCommand",
    "assert",
)


@dataclass
class CheckResult:
    step: int
    description: str
    ok: bool
    expected: Any = None
    actual: Any = None


@dataclass
class ScenarioReport:
    name: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def lines(self) -> list[str]:
        out = [f"scenario {self.name}: {'PASS' if self.ok else 'FAIL'}"]
        for check in self.checks:
            mark = "ok " if check.ok else "FAIL"
            line = f"  [{mark}] step {check.step}: {check.description}"
            if not check.ok:
                line += f"\n        expected: {check.expected}\n        actual:   {check.actual}"
            out.append(line)
        return out


@dataclass
class ScenarioTrace:
    name: str
    fixtures: EngineFixtures
    steps: list[dict[str, Any]]

    @classmethod
    def from_doc(cls, doc: dict[str, Any], base_dir: Path) -> "ScenarioTrace":
        if not isinstance(doc, dict) or "fixtures" not in doc:
            raise ScenarioError("trace needs a fixtures section")
        steps = doc.get("steps", [])
        for idx, step in enumerate(steps):
            if not isinstance(step, dict) or len(step) != 1:
                raise ScenarioError(f"step {idx} must be a single-key object")
            (kind,) = step.keys()
            if kind not in _STEP_KINDS:
                raise ScenarioError(f"step {idx}: unknown step kind {kind!r}")
        try:
            fixtures = load_fixtures(doc["fixtures"], base_dir)
        except TrConsentError as exc:
            raise ScenarioError(f"fixture error: {exc}") from exc
        return cls(str(doc.get("name", "unnamed")), fixtures, list(steps))

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioTrace":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read trace {path}: {exc}") from exc
        return cls.from_doc(doc, path.parent)


def _subset_match(expected: Any, actual: Any) -> bool:
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return False
        return all(k in actual and _subset_match(v, actual[k]) for k, v in expected.items())
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(expected) != len(actual):
            return False
        return all(_subset_match(e, a) for e, a in zip(expected, actual))
    return expected == actual


class _Runner:
    def __init__(self, trace: ScenarioTrace):
        self.trace = trace
        self.engine = ConsentEngine(trace.fixtures)
        self.report = ScenarioReport(trace.name)
        # per patient: how many log entries previous asserts consumed
        self.consumed: dict[str, int] = {}
        self.last_patient: str | None = None

    def run(self) -> ScenarioReport:
        for idx, step in enumerate(self.trace.steps):
            (kind,) = step.keys()
            body = step[kind]
            try:
                getattr(self, f"_step_{kind}")(idx, body)
            except TrConsentError as exc:
                raise ScenarioError(f"step {idx} ({kind}): {exc}") from exc
        return self.report

    # --- stimulus steps -------------------------------------------------------

    def _step_advanceClock(self, idx: int, body: Any) -> None:
        self.engine.advance_clock(body)

    def _step_setClock(self, idx: int, body: Any) -> None:
        self.engine.set_clock(str(body))

    def _step_setEmergency(self, idx: int, body: Any) -> None:
        self.engine.set_emergency(bool(body))

    def _step_setLocation(self, idx: int, body: Any) -> None:
        if not isinstance(body, dict):
            raise ScenarioError("setLocation body must be {principal: label, ...}")
        for principal, label in body.items():
            self.engine.set_location(str(principal), str(label))

    def _step_consentRequest(self, idx: int, body: Any) -> None:
        req, _events, _response = self.engine.submit_request(dict(body))
        self.last_patient = req.patient_id

    def _step_patientDecision(self, idx: int, body: Any) -> None:
        patient = str(body["patientId"])
        self.engine.decide(
            patient,
            str(body["requestId"]),
            bool(body["grant"]),
            bool(body.get("savePreferences", False)),
        )
        self.last_patient = patient

    def _step_patientCommand(self, idx: int, body: Any) -> None:
        verb = TransitionVerb(str(body["verb"]))
        events = self.engine.policy_command(str(body["policyId"]), verb)
        if events and body.get("patientId"):
            self.last_patient = str(body["patientId"])

    # --- assertions -------------------------------------------------------------

    def _assert_patient(self, body: dict[str, Any]) -> str:
        patient = body.get("patientId") or self.last_patient
        if patient is None:
            with self.engine._registry_lock:
                known = sorted(self.engine.sessions)
            if len(known) != 1:
                raise ScenarioError("assert step cannot determine its patient")
            patient = known[0]
        return str(patient)

    def _step_assert(self, idx: int, body: Any) -> None:
        if not isinstance(body, dict):
            raise ScenarioError("assert body must be an object")
        patient = self._assert_patient(body)
        session = self.engine.session_for(patient)

        if "events" in body:
            since = self.consumed.get(patient, 0)
            actual = [e.to_doc() for e in session.log[since:]]
            expected = body["events"]
            trimmed = [
                {"type": a["type"], "data": a["data"]} for a in actual
            ]
            ok = len(expected) == len(actual) and all(
                exp.get("type") == act["type"]
                and _subset_match(exp.get("data", {}), act["data"])
                for exp, act in zip(expected, trimmed)
            )
            self.report.checks.append(
                CheckResult(idx, f"events for {patient}", ok, expected, trimmed)
            )
            self.consumed[patient] = len(session.log)

        for policy_id, want in body.get("policyStates", {}).items():
            try:
                actual_state = self.engine.policy_state(policy_id)
            except LifecycleError:
                actual_state = "Unknown"
            self.report.checks.append(
                CheckResult(
                    idx,
                    f"policy {policy_id} state",
                    actual_state == want,
                    want,
                    actual_state,
                )
            )

        for matcher in body.get("responses", []):
            request_id = matcher.get("requestId")
            found = next(
                (r for r in session.outbox if r.request_id == request_id), None
            )
            if found is None:
                self.report.checks.append(
                    CheckResult(idx, f"response {request_id}", False, matcher, None)
                )
                continue
            ok = True
            if "granted" in matcher and found.granted != matcher["granted"]:
                ok = False
            if "messageContains" in matcher:
                ok = ok and bool(found.message) and matcher["messageContains"] in str(found.message)
            self.report.checks.append(
                CheckResult(
                    idx, f"response {request_id}", ok, matcher, found.to_doc()
                )
            )

        if "pendingCount" in body:
            actual_count = len(session.pending)
            self.report.checks.append(
                CheckResult(
                    idx,
                    f"pending count for {patient}",
                    actual_count == body["pendingCount"],
                    body["pendingCount"],
                    actual_count,
                )
            )

        if "auditCount" in body:
            actual_count = len(session.audit_log())
            self.report.checks.append(
                CheckResult(
                    idx,
                    f"audit count for {patient}",
                    actual_count == body["auditCount"],
                    body["auditCount"],
                    actual_count,
                )
            )


def run_scenario(trace: ScenarioTrace) -> ScenarioReport:
    return _Runner(trace).run()


def run_scenario_file(path: str | Path) -> ScenarioReport:
    return run_scenario(ScenarioTrace.from_file(path))
