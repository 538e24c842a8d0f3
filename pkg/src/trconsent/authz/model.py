"""Authorization policies and the values they are evaluated against."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date

from ..errors import MalformedComparisonError, PolicyDocumentError

READ = "READ"
WRITE = "WRITE"
POLICY_RIGHTS = frozenset({READ, WRITE})

# Context attributes a `provided` clause may reference.
ATTR_PURPOSE = "AccessPurpose"
ATTR_TIME = "AccessTime"
ATTR_DATE = "AccessDate"
ATTR_REQUESTER_LOCATION = "DataRequester.CurrentLocation"
ATTR_SUBJECT_LOCATION = "DataSubject.CurrentLocation"
ATTR_EMERGENCY = "Emergency"

ATTRIBUTES = (
    ATTR_EMERGENCY,
    ATTR_PURPOSE,
    ATTR_TIME,
    ATTR_DATE,
    ATTR_SUBJECT_LOCATION,
    ATTR_REQUESTER_LOCATION,
)
# Canonical clause order inside a conjunction (emergency first, then purpose,
# time, date, locations) mirrors how instantiated policies are written out.
_ATTR_RANK = {name: i for i, name in enumerate(ATTRIBUTES)}

OP_EQ = "="
OP_NE = "!="
OP_GE = ">="
OP_LE = "<="
_OPS = (OP_EQ, OP_NE, OP_GE, OP_LE)
# Ordering comparisons only make sense for times and dates.
_ORDERED_ATTRS = frozenset({ATTR_TIME, ATTR_DATE})


class PolicyState(enum.Enum):
    ACTIVE = "Active"
    WITHDRAWN = "Withdrawn"
    DELETED = "Deleted"


class Outcome(enum.Enum):
    PERMIT = "Permit"
    DENY = "Deny"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class IdTerm:
    """Requester-identity constraint; ``negated`` means explicit denial."""

    label: str
    negated: bool = False


def is_id(label: str) -> IdTerm:
    return IdTerm(label)


def is_not_id(label: str) -> IdTerm:
    return IdTerm(label, negated=True)


@dataclass(frozen=True)
class Cmp:
    """Single condition: context attribute compared with a literal."""

    attribute: str
    op: str
    value: str | int | bool | date

    def __post_init__(self) -> None:
        if self.attribute not in _ATTR_RANK:
            raise MalformedComparisonError(f"unknown attribute {self.attribute!r}")
        if self.op not in _OPS:
            raise MalformedComparisonError(f"unknown operator {self.op!r}")
        if self.op in (OP_GE, OP_LE) and self.attribute not in _ORDERED_ATTRS:
            raise MalformedComparisonError(
                f"{self.attribute} admits only = and != comparisons"
            )
        if self.attribute == ATTR_TIME:
            if not isinstance(self.value, int) or not 0 <= self.value < 1440:
                raise MalformedComparisonError(
                    "AccessTime literal must be minutes in [0, 1440)"
                )
        elif self.attribute == ATTR_DATE:
            if not isinstance(self.value, date):
                raise MalformedComparisonError("AccessDate literal must be a date")
        elif self.attribute == ATTR_EMERGENCY:
            if not isinstance(self.value, bool):
                raise MalformedComparisonError(
                    "Emergency compares to TRUE/FALSE only"
                )
        elif not isinstance(self.value, str):
            raise MalformedComparisonError(
                f"{self.attribute} literal must be a string"
            )


@dataclass(frozen=True)
class PAnd:
    children: tuple["ProvidedExpr", ...]


@dataclass(frozen=True)
class POr:
    children: tuple["ProvidedExpr", ...]


ProvidedExpr = Cmp | PAnd | POr


def _node_sort_key(node: ProvidedExpr) -> tuple:
    if isinstance(node, Cmp):
        return (0, _ATTR_RANK[node.attribute], _OPS.index(node.op), str(node.value))
    kind = 1 if isinstance(node, PAnd) else 2
    return (kind, tuple(_node_sort_key(c) for c in node.children))


def normalize_provided(node: ProvidedExpr) -> ProvidedExpr:
    """Canonical form: nested same-operator nodes flattened, duplicate
    children dropped, children ordered by attribute rank, singleton
    connectives collapsed. Idempotent."""
    if isinstance(node, Cmp):
        return node
    op = type(node)
    flat: list[ProvidedExpr] = []
    for child in node.children:
        child = normalize_provided(child)
        if isinstance(child, op):
            flat.extend(child.children)
        else:
            flat.append(child)
    seen = set()
    unique: list[ProvidedExpr] = []
    for child in flat:
        key = _node_sort_key(child)
        if key not in seen:
            seen.add(key)
            unique.append(child)
    unique.sort(key=_node_sort_key)
    if not unique:
        raise PolicyDocumentError("empty connective in provided expression")
    if len(unique) == 1:
        return unique[0]
    return op(tuple(unique))


@dataclass(frozen=True)
class PolicyOrigin:
    template_id: str
    instantiated_at: str  # ISO timestamp


@dataclass(frozen=True)
class AuthorizationPolicy:
    id: str
    requester_roles: frozenset[str]
    requester_ids: tuple[IdTerm, ...] | None
    subject_id: str
    resources: frozenset[str]
    access_rights: frozenset[str]
    provided: ProvidedExpr | None
    state: PolicyState = PolicyState.ACTIVE
    origin: PolicyOrigin | None = None

    def __post_init__(self) -> None:
        if not self.requester_roles:
            raise PolicyDocumentError("requester role set must not be empty")
        if not self.resources:
            raise PolicyDocumentError("resource set must not be empty")
        if not self.access_rights:
            raise PolicyDocumentError("access-rights set must not be empty")
        bad = self.access_rights - POLICY_RIGHTS
        if bad:
            raise PolicyDocumentError(
                f"access rights must be READ/WRITE, got {sorted(bad)}"
            )
        if self.requester_ids is not None:
            positive = {t.label for t in self.requester_ids if not t.negated}
            negative = {t.label for t in self.requester_ids if t.negated}
            both = positive & negative
            if both:
                raise PolicyDocumentError(
                    f"requester ids both allowed and denied: {sorted(both)}"
                )

    def with_state(self, state: PolicyState) -> "AuthorizationPolicy":
        return AuthorizationPolicy(
            id=self.id,
            requester_roles=self.requester_roles,
            requester_ids=self.requester_ids,
            subject_id=self.subject_id,
            resources=self.resources,
            access_rights=self.access_rights,
            provided=self.provided,
            state=state,
            origin=self.origin,
        )


@dataclass(frozen=True)
class AccessRequest:
    requester_id: str
    requester_role: str
    subject_id: str
    resource: str
    right: str
    purpose: str


@dataclass(frozen=True)
class ContextSnapshot:
    """Immutable view of the context at one instant."""

    access_time: int  # minutes since midnight
    access_date: date
    requester_location: str
    subject_location: str
    emergency: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.access_time < 1440:
            raise MalformedComparisonError(
                f"access time out of range: {self.access_time}"
            )


@dataclass(frozen=True)
class TraceNode:
    """Evaluation trace mirroring the provided-expression tree."""

    kind: str  # "cmp" | "and" | "or"
    result: bool
    detail: str = ""
    children: tuple["TraceNode", ...] = ()


@dataclass(frozen=True)
class Decision:
    outcome: Outcome
    reason: str | None = None
    trace: TraceNode | None = None

    def __post_init__(self) -> None:
        if self.outcome is not Outcome.PERMIT and not self.reason:
            raise PolicyDocumentError("non-permit decisions carry a reason")
