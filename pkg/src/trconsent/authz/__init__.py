"""Authorization policies and the policy decision point."""

from .documents import (
    format_time_literal,
    parse_authorization_policy,
    parse_provided,
    parse_time_literal,
    serialize_authorization_policy,
    serialize_provided,
)
from .model import (
    AccessRequest,
    AuthorizationPolicy,
    Cmp,
    ContextSnapshot,
    Decision,
    IdTerm,
    Outcome,
    PAnd,
    POr,
    PolicyOrigin,
    PolicyState,
    ProvidedExpr,
    TraceNode,
    READ,
    WRITE,
    is_id,
    is_not_id,
    normalize_provided,
)
from .pdp import evaluate_access, eval_provided

__all__ = [
    "AccessRequest",
    "AuthorizationPolicy",
    "Cmp",
    "ContextSnapshot",
    "Decision",
    "IdTerm",
    "Outcome",
    "PAnd",
    "POr",
    "PolicyOrigin",
    "PolicyState",
    "ProvidedExpr",
    "READ",
    "TraceNode",
    "WRITE",
    "eval_provided",
    "evaluate_access",
    "format_time_literal",
    "is_id",
    "is_not_id",
    "normalize_provided",
    "parse_authorization_policy",
    "parse_provided",
    "parse_time_literal",
    "serialize_authorization_policy",
    "serialize_provided",
]
