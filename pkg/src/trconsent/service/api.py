"""HTTP+JSON face of the engine, with a server-push event stream.

Every mutating endpoint funnels into the same ConsentEngine command bus the
scenario runner drives, so scripted and live behavior cannot diverge. The
event stream is server-sent events; clients resume with ``Last-Event-ID``
or the ``after`` query parameter.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse

from ..errors import (
    ClockError,
    DuplicateDecisionError,
    LifecycleError,
    PolicyStateError,
    TrConsentError,
    UnknownRequestError,
)
from ..lifecycle.session import TransitionVerb
from .engine import ConsentEngine

_STATUS_BY_ERROR: tuple[tuple[type[Exception], int], ...] = (
    (DuplicateDecisionError, 409),
    (UnknownRequestError, 404),
    (PolicyStateError, 409),
    (ClockError, 422),
)


def _status_for(exc: TrConsentError) -> int:
    for err_type, status in _STATUS_BY_ERROR:
        if isinstance(exc, err_type):
            return status
    if isinstance(exc, LifecycleError) and "unknown policy" in str(exc):
        return 404
    return 422


class Principal:
    def __init__(self, name: str, kind: str, patient_id: str | None = None):
        self.name = name
        self.kind = kind  # "system" | "patient"
        self.patient_id = patient_id


def create_app(engine: ConsentEngine, console_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="trconsent", version="0.1.0")
    tokens = engine.fixtures.tokens

    @app.exception_handler(TrConsentError)
    async def _domain_error(_request: Request, exc: TrConsentError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc), content={"error": str(exc)})

    def authenticate(authorization: str | None = Header(default=None)) -> Principal | None:
        if not tokens:
            return None
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="bearer token required")
        token = authorization.removeprefix("Bearer ").strip()
        entry = tokens.get(token)
        if entry is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return Principal(
            entry.get("principal", "unknown"),
            entry.get("kind", "system"),
            entry.get("patientId"),
        )

    def require_patient_scope(principal: Principal | None, patient_id: str) -> None:
        if principal is None or principal.kind == "system":
            return
        if principal.patient_id != patient_id:
            raise HTTPException(status_code=403, detail="token not valid for this patient")

    def require_system(principal: Principal | None) -> None:
        if principal is None:
            return
        if principal.kind != "system":
            raise HTTPException(status_code=403, detail="system token required")

    # --- intake and decisions ---------------------------------------------------

    @app.post("/requests", status_code=202)
    def submit_request(
        body: dict[str, Any], principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        require_system(principal)
        req, events, response = engine.submit_request(body)
        return {
            "requestId": req.request_id,
            "patientId": req.patient_id,
            "events": [e.to_doc() for e in events],
            "response": None if response is None else response.to_doc(),
        }

    @app.get("/patients/{patient_id}/pending")
    def pending(
        patient_id: str, principal: Principal | None = Depends(authenticate)
    ) -> list[dict[str, Any]]:
        require_patient_scope(principal, patient_id)
        return engine.pending_requests(patient_id)

    @app.post("/patients/{patient_id}/decisions")
    def decide(
        patient_id: str,
        body: dict[str, Any],
        principal: Principal | None = Depends(authenticate),
    ) -> dict[str, Any]:
        require_patient_scope(principal, patient_id)
        if "requestId" not in body or "grant" not in body:
            raise HTTPException(status_code=422, detail="requestId and grant required")
        events = engine.decide(
            patient_id,
            str(body["requestId"]),
            bool(body["grant"]),
            bool(body.get("savePreferences", False)),
        )
        return {"events": [e.to_doc() for e in events]}

    # --- policy lifecycle ------------------------------------------------------------

    def _policy_scope(policy_id: str, principal: Principal | None) -> None:
        if principal is None or principal.kind == "system":
            return
        session = engine._owning_session(policy_id)
        if session.patient_id != principal.patient_id:
            raise HTTPException(status_code=403, detail="token not valid for this policy")

    @app.post("/policies/{policy_id:path}/withdraw")
    def withdraw(
        policy_id: str, principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        _policy_scope(policy_id, principal)
        events = engine.policy_command(policy_id, TransitionVerb.WITHDRAW)
        return {"events": [e.to_doc() for e in events]}

    @app.post("/policies/{policy_id:path}/activate")
    def activate(
        policy_id: str, principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        _policy_scope(policy_id, principal)
        events = engine.policy_command(policy_id, TransitionVerb.ACTIVATE)
        return {"events": [e.to_doc() for e in events]}

    @app.delete("/policies/{policy_id:path}")
    def delete_policy(
        policy_id: str, principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        _policy_scope(policy_id, principal)
        events = engine.policy_command(policy_id, TransitionVerb.DELETE)
        return {"events": [e.to_doc() for e in events]}

    @app.get("/policies")
    def policies(
        patient: str | None = Query(default=None),
        principal: Principal | None = Depends(authenticate),
    ) -> list[dict[str, Any]]:
        if principal is not None and principal.kind == "patient":
            patient = principal.patient_id
        return engine.policies_doc(patient)

    # --- logs ---------------------------------------------------------------------------

    @app.get("/events")
    def events(
        patient: str | None = Query(default=None),
        after: int = Query(default=0),
        principal: Principal | None = Depends(authenticate),
    ) -> list[dict[str, Any]]:
        if principal is not None and principal.kind == "patient":
            patient = principal.patient_id
        return engine.events_doc(patient, after)

    @app.get("/audit")
    def audit(
        patient: str | None = Query(default=None),
        principal: Principal | None = Depends(authenticate),
    ) -> list[dict[str, Any]]:
        if principal is not None and principal.kind == "patient":
            patient = principal.patient_id
        return engine.audit_doc(patient)

    @app.get("/responses")
    def responses(
        patient: str | None = Query(default=None),
        principal: Principal | None = Depends(authenticate),
    ) -> list[dict[str, Any]]:
        if principal is not None and principal.kind == "patient":
            patient = principal.patient_id
        return engine.responses_doc(patient)

    # --- event stream ----------------------------------------------------------------------

    @app.get("/events/stream")
    async def stream(
        request: Request,
        patient: str | None = Query(default=None),
        after: int = Query(default=0),
        principal: Principal | None = Depends(authenticate),
    ) -> StreamingResponse:
        if principal is not None and principal.kind == "patient":
            patient = principal.patient_id
        last_event_id = request.headers.get("last-event-id")
        cursor = after
        if last_event_id and last_event_id.isdigit():
            cursor = max(cursor, int(last_event_id))

        async def generate():
            position = cursor
            yield ": stream open\n\n"
            while True:
                if await request.is_disconnected():
                    return
                position, fresh = engine.stream_events(patient, position)
                for doc in fresh:
                    body = json.dumps(doc, sort_keys=True)
                    yield f"id: {doc['stream']}\nevent: {doc['type']}\ndata: {body}\n\n"
                if not fresh:
                    await asyncio.sleep(0.05)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    # --- context controls --------------------------------------------------------------------

    @app.get("/clock")
    def clock(principal: Principal | None = Depends(authenticate)) -> dict[str, str]:
        return {"now": engine.runtime.hub.clock.now_iso()}

    @app.post("/clock/advance")
    def advance_clock(
        body: dict[str, Any], principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        require_system(principal)
        produced = engine.advance_clock(body)
        return {
            "now": engine.runtime.hub.clock.now_iso(),
            "events": [{"patientId": pid, **e.to_doc()} for pid, e in produced],
        }

    @app.post("/context/emergency")
    def set_emergency(
        body: dict[str, Any], principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        require_system(principal)
        engine.set_emergency(bool(body.get("active", False)))
        return {"emergency": engine.runtime.hub.emergency}

    @app.post("/context/locations")
    def set_locations(
        body: dict[str, Any], principal: Principal | None = Depends(authenticate)
    ) -> dict[str, Any]:
        require_system(principal)
        for principal_name, label in body.items():
            engine.set_location(str(principal_name), str(label))
        return {"locations": engine.runtime.hub.locations()}

    # --- console (optional static frontend) ------------------------------------------------------

    if console_dir is not None and console_dir.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app
