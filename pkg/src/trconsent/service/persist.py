"""Canonical persistence of the whole engine state.

The payload is serialized as canonical JSON (sorted keys, fixed separators,
ASCII) and wrapped with a version tag and a SHA-256 checksum, so saving the
same state twice produces byte-identical files and any truncation or edit
is detected on load. Fixtures (rule policies, templates, info point) are
not part of the store; they are re-read from their files and supplied at
load time.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from ..context.clock import SimClock
from ..errors import StoreCorruptionError, StoreVersionError
from ..lifecycle.session import ConsentSession
from .engine import ConsentEngine
from .fixtures import EngineFixtures

STORE_VERSION = 1


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _checksum(payload_text: str) -> str:
    return hashlib.sha256(payload_text.encode("ascii")).hexdigest()


def engine_payload(engine: ConsentEngine) -> dict[str, Any]:
    hub = engine.runtime.hub
    return {
        "clock": hub.clock.now_iso(),
        "emergency": hub.emergency,
        "locations": hub.locations(),
        "sessions": {
            pid: session.to_doc() for pid, session in sorted(engine.sessions.items())
        },
        "globalOrder": [[pid, seq] for pid, seq in engine.global_order()],
    }


def save_store(engine: ConsentEngine, path: str | Path) -> str:
    """Write the engine state; returns the payload checksum."""
    payload_text = canonical_json(engine_payload(engine))
    document = {
        "version": STORE_VERSION,
        "checksum": _checksum(payload_text),
        "payload": json.loads(payload_text),
    }
    Path(path).write_text(canonical_json(document), encoding="ascii")
    return document["checksum"]


def load_store(path: str | Path, fixtures: EngineFixtures) -> ConsentEngine:
    """Rebuild an engine from a saved store plus its (re-read) fixtures."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StoreCorruptionError(f"cannot read store {path}: {exc}") from exc
    if not isinstance(document, dict) or "version" not in document:
        raise StoreCorruptionError(f"store {path} has no version header")
    if document["version"] != STORE_VERSION:
        raise StoreVersionError(
            f"store version {document['version']} unsupported (want {STORE_VERSION})"
        )
    payload = document.get("payload")
    payload_text = canonical_json(payload)
    if _checksum(payload_text) != document.get("checksum"):
        raise StoreCorruptionError(f"store {path} failed its checksum")

    runtime = fixtures.build_runtime(
        clock=SimClock(payload["clock"]),
        locations=dict(payload.get("locations", {})),
        emergency=bool(payload.get("emergency", False)),
    )
    engine = ConsentEngine(fixtures, runtime=runtime)
    for pid in payload.get("sessions", {}):
        session = ConsentSession.from_doc(payload["sessions"][pid], runtime)
        engine.adopt_session(session)
    engine.restore_global_order(
        [(pid, int(seq)) for pid, seq in payload.get("globalOrder", [])]
    )
    return engine
