"""Canonical JSON-object form of authorization policies.

Round-trips losslessly up to normalization: sets are deduplicated and
sorted, nested same-operator connectives are flattened, and conjunction
clauses are put in canonical attribute order. Times serialize as ``HH:MM``,
dates as ISO ``YYYY-MM-DD``.
"""

from __future__ import annotations

from datetime import date
from typing import Any

from ..errors import PolicyDocumentError
from .model import (
    ATTR_DATE,
    ATTR_EMERGENCY,
    ATTR_TIME,
    ATTRIBUTES,
    AuthorizationPolicy,
    Cmp,
    IdTerm,
    PAnd,
    POr,
    PolicyOrigin,
    PolicyState,
    ProvidedExpr,
    normalize_provided,
    OP_EQ,
    OP_GE,
    OP_LE,
    OP_NE,
)

_OP_ALIASES = {
    "=": OP_EQ,
    "==": OP_EQ,
    "!=": OP_NE,
    "≠": OP_NE,
    ">=": OP_GE,
    "≥": OP_GE,
    "<=": OP_LE,
    "≤": OP_LE,
}

_TOP_FIELDS = {
    "id",
    "dataRequesterRole",
    "dataRequesterId",
    "dataSubjectId",
    "dataSubjectResource",
    "accessRights",
    "provided",
    "state",
    "origin",
}


def parse_time_literal(text: str) -> int:
    parts = str(text).split(":")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise PolicyDocumentError(f"bad time literal {text!r}, expected HH:MM")
    hours, minutes = int(parts[0]), int(parts[1])
    total = hours * 60 + minutes
    if minutes >= 60 or not 0 <= total < 1440:
        raise PolicyDocumentError(f"time out of range: {text!r}")
    return total


def format_time_literal(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_literal(attribute: str, raw: Any) -> str | int | bool | date:
    if attribute == ATTR_TIME:
        return parse_time_literal(raw)
    if attribute == ATTR_DATE:
        try:
            return date.fromisoformat(str(raw))
        except ValueError as exc:
            raise PolicyDocumentError(f"bad date literal {raw!r}") from exc
    if attribute == ATTR_EMERGENCY:
        if isinstance(raw, bool):
            return raw
        if str(raw).upper() in ("TRUE", "FALSE"):
            return str(raw).upper() == "TRUE"
        raise PolicyDocumentError(f"Emergency literal must be TRUE/FALSE, got {raw!r}")
    if not isinstance(raw, str):
        raise PolicyDocumentError(f"{attribute} literal must be a string, got {raw!r}")
    return raw


def render_literal(attribute: str, value: Any) -> Any:
    if attribute == ATTR_TIME:
        return format_time_literal(value)
    if attribute == ATTR_DATE:
        return value.isoformat()
    if attribute == ATTR_EMERGENCY:
        return bool(value)
    return value


def parse_provided(node: Any) -> ProvidedExpr:
    if not isinstance(node, dict) or len(node) != 1:
        raise PolicyDocumentError(f"bad provided node: {node!r}")
    (kind, body), = node.items()
    if kind == "cmp":
        attribute = body.get("attribute")
        if attribute not in ATTRIBUTES:
            raise PolicyDocumentError(f"unknown attribute {attribute!r}")
        op = _OP_ALIASES.get(body.get("op", ""))
        if op is None:
            raise PolicyDocumentError(f"unknown operator {body.get('op')!r}")
        value = parse_literal(attribute, body.get("value"))
        return Cmp(attribute, op, value)
    if kind in ("and", "or"):
        if not isinstance(body, list) or not body:
            raise PolicyDocumentError(f"'{kind}' needs a non-empty child list")
        children = tuple(parse_provided(c) for c in body)
        return PAnd(children) if kind == "and" else POr(children)
    raise PolicyDocumentError(f"unknown provided node kind {kind!r}")


def serialize_provided(expr: ProvidedExpr) -> dict[str, Any]:
    if isinstance(expr, Cmp):
        return {
            "cmp": {
                "attribute": expr.attribute,
                "op": expr.op,
                "value": render_literal(expr.attribute, expr.value),
            }
        }
    kind = "and" if isinstance(expr, PAnd) else "or"
    return {kind: [serialize_provided(c) for c in expr.children]}


def parse_id_terms(raw: Any) -> tuple[IdTerm, ...] | None:
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise PolicyDocumentError("dataRequesterId must be a list or null")
    terms = []
    for item in raw:
        if not isinstance(item, dict) or len(item) != 1:
            raise PolicyDocumentError(f"bad id term {item!r}")
        (key, label), = item.items()
        if key == "is":
            terms.append(IdTerm(str(label)))
        elif key == "isNot":
            terms.append(IdTerm(str(label), negated=True))
        else:
            raise PolicyDocumentError(f"id term key must be is/isNot, got {key!r}")
    return tuple(sorted(terms, key=lambda t: (t.negated, t.label)))


def serialize_id_terms(terms: tuple[IdTerm, ...] | None) -> list | None:
    if terms is None:
        return None
    ordered = sorted(terms, key=lambda t: (t.negated, t.label))
    return [({"isNot": t.label} if t.negated else {"is": t.label}) for t in ordered]


def _string_set(raw: Any, field: str) -> frozenset[str]:
    if not isinstance(raw, list) or not raw:
        raise PolicyDocumentError(f"{field} must be a non-empty list")
    return frozenset(str(x) for x in raw)


def parse_authorization_policy(doc: dict[str, Any]) -> AuthorizationPolicy:
    if not isinstance(doc, dict):
        raise PolicyDocumentError("policy document must be an object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise PolicyDocumentError(f"unknown policy fields: {sorted(unknown)}")
    for required in ("id", "dataRequesterRole", "dataSubjectId",
                     "dataSubjectResource", "accessRights"):
        if required not in doc:
            raise PolicyDocumentError(f"missing policy field {required!r}")
    provided_raw = doc.get("provided")
    provided = (
        None if provided_raw is None else normalize_provided(parse_provided(provided_raw))
    )
    state_raw = doc.get("state", "Active")
    try:
        state = PolicyState(state_raw)
    except ValueError as exc:
        raise PolicyDocumentError(f"unknown policy state {state_raw!r}") from exc
    origin_raw = doc.get("origin")
    origin = None
    if origin_raw is not None:
        if not isinstance(origin_raw, dict) or set(origin_raw) != {
            "templateId",
            "instantiatedAt",
        }:
            raise PolicyDocumentError(f"bad origin {origin_raw!r}")
        origin = PolicyOrigin(
            str(origin_raw["templateId"]), str(origin_raw["instantiatedAt"])
        )
    return AuthorizationPolicy(
        id=str(doc["id"]),
        requester_roles=_string_set(doc["dataRequesterRole"], "dataRequesterRole"),
        requester_ids=parse_id_terms(doc.get("dataRequesterId")),
        subject_id=str(doc["dataSubjectId"]),
        resources=_string_set(doc["dataSubjectResource"], "dataSubjectResource"),
        access_rights=_string_set(doc["accessRights"], "accessRights"),
        provided=provided,
        state=state,
        origin=origin,
    )


def serialize_authorization_policy(policy: AuthorizationPolicy) -> dict[str, Any]:
    return {
        "id": policy.id,
        "dataRequesterRole": sorted(policy.requester_roles),
        "dataRequesterId": serialize_id_terms(policy.requester_ids),
        "dataSubjectId": policy.subject_id,
        "dataSubjectResource": sorted(policy.resources),
        "accessRights": sorted(policy.access_rights),
        "provided": (
            None
            if policy.provided is None
            else serialize_provided(normalize_provided(policy.provided))
        ),
        "state": policy.state.value,
        "origin": (
            None
            if policy.origin is None
            else {
                "templateId": policy.origin.template_id,
                "instantiatedAt": policy.origin.instantiated_at,
            }
        ),
    }
