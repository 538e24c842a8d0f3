"""Consent lifecycle: sessions, events, requests, responses."""

from .events import (
    AUDIT_EVENT_TYPES,
    AUDIT_NOTE,
    BREAK_THE_GLASS,
    CONSENT_SENT,
    DECISION_QUEUED,
    EVENT_TYPES,
    Event,
    POLICY_ACTIVATED,
    POLICY_DELETED,
    POLICY_INSTANTIATED,
    POLICY_WITHDRAWN,
    RULE_FIRED,
)
from .requests import (
    ConsentRequest,
    ConsentResponse,
    parse_consent_request,
    serialize_consent_request,
)
from .session import (
    ConsentSession,
    PolicyMeta,
    SessionRuntime,
    TransitionVerb,
)

__all__ = [
    "AUDIT_EVENT_TYPES",
    "AUDIT_NOTE",
    "BREAK_THE_GLASS",
    "CONSENT_SENT",
    "ConsentRequest",
    "ConsentResponse",
    "ConsentSession",
    "DECISION_QUEUED",
    "EVENT_TYPES",
    "Event",
    "POLICY_ACTIVATED",
    "POLICY_DELETED",
    "POLICY_INSTANTIATED",
    "POLICY_WITHDRAWN",
    "PolicyMeta",
    "RULE_FIRED",
    "SessionRuntime",
    "TransitionVerb",
    "parse_consent_request",
    "serialize_consent_request",
]
