"""Append-only engine event log entries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

RULE_FIRED = "RuleFired"
POLICY_INSTANTIATED = "PolicyInstantiated"
POLICY_ACTIVATED = "PolicyActivated"
POLICY_WITHDRAWN = "PolicyWithdrawn"
POLICY_DELETED = "PolicyDeleted"
DECISION_QUEUED = "DecisionQueued"
CONSENT_SENT = "ConsentSent"
BREAK_THE_GLASS = "BreakTheGlass"
AUDIT_NOTE = "AuditNote"

EVENT_TYPES = frozenset(
    {
        RULE_FIRED,
        POLICY_INSTANTIATED,
        POLICY_ACTIVATED,
        POLICY_WITHDRAWN,
        POLICY_DELETED,
        DECISION_QUEUED,
        CONSENT_SENT,
        BREAK_THE_GLASS,
        AUDIT_NOTE,
    }
)

# Event types an incident reviewer reads as the audit trail.
AUDIT_EVENT_TYPES = frozenset({BREAK_THE_GLASS, AUDIT_NOTE})


@dataclass(frozen=True)
class Event:
    seq: int
    at: str  # ISO timestamp from the session clock
    type: str
    data: dict[str, Any] = field(default_factory=dict)

    def to_doc(self) -> dict[str, Any]:
        return {"seq": self.seq, "at": self.at, "type": self.type, "data": self.data}

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Event":
        return cls(
            seq=int(doc["seq"]),
            at=str(doc["at"]),
            type=str(doc["type"]),
            data=dict(doc.get("data", {})),
        )
