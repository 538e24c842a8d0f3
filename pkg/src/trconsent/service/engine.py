"""Engine facade: the command bus shared by the HTTP API, the CLI, and the
scenario runner.

One lock per patient session serializes all mutations of that session;
distinct patients proceed independently. Every session event is also
appended to a global ordered log that backs the server-push stream.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from datetime import datetime, timedelta
from typing import Any, Callable, Iterator

from ..errors import LifecycleError
from ..lifecycle.events import AUDIT_EVENT_TYPES, Event
from ..lifecycle.requests import (
    ConsentRequest,
    ConsentResponse,
    parse_consent_request,
)
from ..lifecycle.session import ConsentSession, SessionRuntime, TransitionVerb
from ..authz.documents import serialize_authorization_policy
from ..context.clock import parse_duration
from .fixtures import EngineFixtures


class ConsentEngine:
    def __init__(
        self,
        fixtures: EngineFixtures,
        *,
        runtime: SessionRuntime | None = None,
        response_poster: Callable[[str, dict], None] | None = None,
    ):
        self.fixtures = fixtures
        self.runtime = runtime or fixtures.build_runtime()
        self.runtime.notify_response = self._on_response
        self.sessions: dict[str, ConsentSession] = {}
        self._session_locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.RLock()
        self._global: list[tuple[str, Event]] = []
        self._stream_cond = threading.Condition()
        self._response_poster = response_poster

    # --- session registry ------------------------------------------------------

    def session_for(self, patient_id: str) -> ConsentSession:
        with self._registry_lock:
            session = self.sessions.get(patient_id)
            if session is None:
                session = ConsentSession(patient_id, self.runtime)
                session._emit_hook = self._record_event
                self.sessions[patient_id] = session
                self._session_locks[patient_id] = threading.RLock()
            return session

    @contextmanager
    def _locked(self, patient_id: str) -> Iterator[ConsentSession]:
        session = self.session_for(patient_id)
        with self._session_locks[patient_id]:
            yield session

    def _record_event(self, patient_id: str, event: Event) -> None:
        with self._stream_cond:
            self._global.append((patient_id, event))
            self._stream_cond.notify_all()

    def _on_response(self, patient_id: str, response: ConsentResponse) -> None:
        if self._response_poster is not None:
            self._response_poster(patient_id, response.to_doc())

    def _owning_session(self, policy_id: str) -> ConsentSession:
        with self._registry_lock:
            for session in self.sessions.values():
                if policy_id in session.policies or policy_id in session.tombstones:
                    return session
        raise LifecycleError(f"unknown policy {policy_id!r}")

    # --- commands ------------------------------------------------------------------

    def submit_request(
        self, doc: dict[str, Any]
    ) -> tuple[ConsentRequest, list[Event], ConsentResponse | None]:
        req = parse_consent_request(doc, self.runtime.hub.clock.now_iso())
        with self._locked(req.patient_id) as session:
            events = session.handle_consent_request(req)
            response = next(
                (r for r in session.outbox if r.request_id == req.request_id), None
            )
            return req, events, response

    def decide(
        self,
        patient_id: str,
        request_id: str,
        grant: bool,
        save_preferences: bool = False,
    ) -> list[Event]:
        with self._locked(patient_id) as session:
            return session.record_patient_decision(request_id, grant, save_preferences)

    def policy_command(self, policy_id: str, verb: TransitionVerb) -> list[Event]:
        session = self._owning_session(policy_id)
        with self._session_locks[session.patient_id]:
            return session.patient_command(verb, policy_id)

    def process_timeouts(self) -> list[tuple[str, Event]]:
        """Run the timer wheel across all sessions, patients in sorted order."""
        produced: list[tuple[str, Event]] = []
        with self._registry_lock:
            patient_ids = sorted(self.sessions)
        for patient_id in patient_ids:
            with self._locked(patient_id) as session:
                for event in session.process_timeouts():
                    produced.append((patient_id, event))
        return produced

    def advance_clock(self, spec: dict | int | timedelta) -> list[tuple[str, Event]]:
        delta = spec if isinstance(spec, timedelta) else parse_duration(spec)
        self.runtime.hub.clock.advance(delta)
        return self.process_timeouts()

    def set_clock(self, instant: str | datetime) -> list[tuple[str, Event]]:
        self.runtime.hub.clock.set(instant)
        return self.process_timeouts()

    def set_emergency(self, active: bool) -> None:
        self.runtime.hub.set_emergency(active)

    def set_location(self, principal: str, label: str) -> None:
        self.runtime.hub.set_location(principal, label)

    # --- queries ---------------------------------------------------------------------

    def pending_requests(self, patient_id: str) -> list[dict[str, Any]]:
        from ..lifecycle.requests import serialize_consent_request

        with self._locked(patient_id) as session:
            return [serialize_consent_request(req) for req, _ in session.pending.values()]

    def policies_doc(self, patient_id: str | None = None) -> list[dict[str, Any]]:
        out = []
        with self._registry_lock:
            sessions = (
                [self.sessions[patient_id]]
                if patient_id is not None and patient_id in self.sessions
                else list(self.sessions.values())
            )
        for session in sessions:
            for policy in session.policies.values():
                out.append(serialize_authorization_policy(policy))
        return out

    def policy_state(self, policy_id: str) -> str:
        session = self._owning_session(policy_id)
        if policy_id in session.tombstones:
            return "Deleted"
        return session.policies[policy_id].state.value

    def responses_doc(self, patient_id: str | None = None) -> list[dict[str, Any]]:
        out = []
        with self._registry_lock:
            sessions = (
                [self.sessions[patient_id]]
                if patient_id is not None and patient_id in self.sessions
                else list(self.sessions.values())
            )
        for session in sessions:
            out.extend(r.to_doc() for r in session.outbox)
        return out

    def events_doc(
        self, patient_id: str | None = None, after: int = 0
    ) -> list[dict[str, Any]]:
        """Events newer than the 1-based id ``after`` (0 = everything).

        Per-patient ids are ``seq + 1`` in session-log order; global ids are
        positions in the cross-session arrival order.
        """
        _, fresh = self.stream_events(patient_id, after)
        return fresh

    def audit_doc(self, patient_id: str | None = None) -> list[dict[str, Any]]:
        docs = self.events_doc(patient_id)
        return [d for d in docs if d["type"] in AUDIT_EVENT_TYPES]

    # --- stream support ------------------------------------------------------------------

    def stream_events(
        self, patient_id: str | None, after: int
    ) -> tuple[int, list[dict[str, Any]]]:
        """Events with id > ``after`` plus the new cursor (= last id seen)."""
        if patient_id is not None:
            with self._locked(patient_id) as session:
                fresh = [
                    {"stream": e.seq + 1, **e.to_doc()}
                    for e in session.log
                    if e.seq + 1 > after
                ]
                return len(session.log), fresh
        with self._stream_cond:
            snapshot = list(self._global)
        fresh = [
            {"stream": idx + 1, "patientId": pid, **event.to_doc()}
            for idx, (pid, event) in enumerate(snapshot)
            if idx + 1 > after
        ]
        return len(snapshot), fresh

    def wait_for_events(self, timeout: float) -> None:
        with self._stream_cond:
            self._stream_cond.wait(timeout)

    # --- persistence hooks -------------------------------------------------------------------

    def global_order(self) -> list[tuple[str, int]]:
        with self._stream_cond:
            return [(pid, event.seq) for pid, event in self._global]

    def restore_global_order(self, order: list[tuple[str, int]]) -> None:
        with self._stream_cond:
            rebuilt = []
            for pid, seq in order:
                session = self.sessions.get(pid)
                if session is None:
                    raise LifecycleError(f"global order references unknown session {pid!r}")
                rebuilt.append((pid, session.log[seq]))
            self._global = rebuilt

    def adopt_session(self, session: ConsentSession) -> None:
        with self._registry_lock:
            session._emit_hook = self._record_event
            self.sessions[session.patient_id] = session
            self._session_locks[session.patient_id] = threading.RLock()
