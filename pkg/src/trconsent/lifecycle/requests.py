"""Consent requests and responses exchanged with the requesting system."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta
from typing import Any

from ..context.clock import parse_duration
from ..errors import LifecycleError


@dataclass(frozen=True)
class ConsentRequest:
    request_id: str
    requester_id: str
    requester_role: str
    patient_id: str
    resources: frozenset[str]
    rights: frozenset[str]
    purpose: str
    access_duration: timedelta | None = None
    treatment_duration: timedelta | None = None
    referral_id: str | None = None
    patient_unconscious: bool = False
    received_at: str = ""

    def __post_init__(self) -> None:
        if not self.resources:
            raise LifecycleError("consent request names no resources")
        if not self.rights:
            raise LifecycleError("consent request names no access rights")


def parse_consent_request(doc: dict[str, Any], received_at: str) -> ConsentRequest:
    for required in ("requestId", "requesterId", "requesterRole", "patientId",
                     "resources", "rights", "purpose"):
        if required not in doc:
            raise LifecycleError(f"missing consent-request field {required!r}")
    access = doc.get("accessDuration")
    treatment = doc.get("treatmentDuration")
    return ConsentRequest(
        request_id=str(doc["requestId"]),
        requester_id=str(doc["requesterId"]),
        requester_role=str(doc["requesterRole"]),
        patient_id=str(doc["patientId"]),
        resources=frozenset(str(r) for r in doc["resources"]),
        rights=frozenset(str(r) for r in doc["rights"]),
        purpose=str(doc["purpose"]),
        access_duration=None if access is None else parse_duration(access),
        treatment_duration=None if treatment is None else parse_duration(treatment),
        referral_id=(None if doc.get("referralId") is None else str(doc["referralId"])),
        patient_unconscious=bool(doc.get("patientUnconscious", False)),
        received_at=received_at,
    )


def serialize_consent_request(req: ConsentRequest) -> dict[str, Any]:
    def _minutes(delta: timedelta | None) -> dict[str, int] | None:
        if delta is None:
            return None
        return {"minutes": int(delta.total_seconds() // 60)}

    return {
        "requestId": req.request_id,
        "requesterId": req.requester_id,
        "requesterRole": req.requester_role,
        "patientId": req.patient_id,
        "resources": sorted(req.resources),
        "rights": sorted(req.rights),
        "purpose": req.purpose,
        "accessDuration": _minutes(req.access_duration),
        "treatmentDuration": _minutes(req.treatment_duration),
        "referralId": req.referral_id,
        "patientUnconscious": req.patient_unconscious,
        "receivedAt": req.received_at,
    }


@dataclass(frozen=True)
class ConsentResponse:
    request_id: str
    granted: bool
    message: str | None
    issued_at: str

    def __post_init__(self) -> None:
        if not self.granted and not self.message:
            raise LifecycleError("refusals carry an explanatory message")

    def to_doc(self) -> dict[str, Any]:
        return {
            "requestId": self.request_id,
            "granted": self.granted,
            "message": self.message,
            "issuedAt": self.issued_at,
        }
