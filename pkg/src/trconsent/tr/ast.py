"""Syntax tree for teleo-reactive rule policies.

A policy is an ordered list of ``condition -> action`` rules; the list
position is the priority (index 0 wins). Conditions are predicate atoms
combined with ``and``/``or``/``not``; actions are function calls combined
sequentially (``then``) or concurrently (``par``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import TrValidationError

# --- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    """Variable; names start with an uppercase letter."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """Ground constant; identifier starting with a lowercase letter."""

    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Dotted:
    """Constant derived from a bound variable plus a suffix (``Patient.Policy``)."""

    base: str
    suffix: str

    def __str__(self) -> str:
        return f"{self.base}.{self.suffix}"


Term = Var | Const | Dotted

# --- conditions ----------------------------------------------------------------


@dataclass(frozen=True)
class TrueCond:
    """The always-true condition."""

    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Not:
    expr: "CondExpr"


@dataclass(frozen=True)
class And:
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Or:
    left: "CondExpr"
    right: "CondExpr"


CondExpr = TrueCond | Atom | Not | And | Or

# --- actions ---------------------------------------------------------------------


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Seq:
    """Sequential composition: left completes before right starts."""

    left: "ActionExpr"
    right: "ActionExpr"


@dataclass(frozen=True)
class Par:
    """Concurrent composition: both sides run in the same stage."""

    left: "ActionExpr"
    right: "ActionExpr"


ActionExpr = Call | Seq | Par

# --- rules and policies ------------------------------------------------------------


@dataclass(frozen=True)
class TrRule:
    condition: CondExpr
    action: ActionExpr


@dataclass(frozen=True)
class TrPolicy:
    name: str
    params: tuple[str, ...]
    rules: tuple[TrRule, ...]


# --- facts, substitutions, instances -------------------------------------------------


@dataclass(frozen=True)
class Fact:
    """Ground predicate over constants."""

    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(self.args)})"


Substitution = dict[str, str]
Firing = tuple[int, Substitution]


@dataclass
class TrInstance:
    """A policy instantiated with concrete parameter bindings.

    ``last_firing`` is the most recent (rule index, substitution) pair whose
    action plan was emitted; it drives edge-triggered firing in ``step``.
    """

    policy: TrPolicy
    bindings: dict[str, str]
    last_firing: Firing | None = field(default=None)

    def __post_init__(self) -> None:
        missing = [p for p in self.policy.params if p not in self.bindings]
        extra = [b for b in self.bindings if b not in self.policy.params]
        if missing or extra:
            raise TrValidationError(
                f"instance bindings must cover params exactly; "
                f"missing={missing} extra={extra}"
            )


# --- variable collection / validation ------------------------------------------------


def term_vars(term: Term) -> set[str]:
    if isinstance(term, Var):
        return {term.name}
    if isinstance(term, Dotted):
        return {term.base}
    return set()


def cond_vars(expr: CondExpr) -> set[str]:
    if isinstance(expr, Atom):
        out: set[str] = set()
        for a in expr.args:
            out |= term_vars(a)
        return out
    if isinstance(expr, Not):
        return cond_vars(expr.expr)
    if isinstance(expr, (And, Or)):
        return cond_vars(expr.left) | cond_vars(expr.right)
    return set()


def action_vars(expr: ActionExpr) -> set[str]:
    if isinstance(expr, Call):
        out: set[str] = set()
        for a in expr.args:
            out |= term_vars(a)
        return out
    return action_vars(expr.left) | action_vars(expr.right)


def validate_tr_policy(policy: TrPolicy) -> TrPolicy:
    """Check the static invariants; returns the policy unchanged."""
    if not policy.name or not policy.name[0].islower():
        raise TrValidationError(f"policy name must start lowercase: {policy.name!r}")
    if not policy.rules:
        raise TrValidationError(f"policy {policy.name!r} has no rules")
    seen: set[str] = set()
    for p in policy.params:
        if not p or not p[0].isupper():
            raise TrValidationError(f"parameter must start uppercase: {p!r}")
        if p in seen:
            raise TrValidationError(f"duplicate parameter {p!r}")
        seen.add(p)
    allowed = set(policy.params)
    for idx, rule in enumerate(policy.rules):
        unbound = action_vars(rule.action) - cond_vars(rule.condition) - allowed
        if unbound:
            raise TrValidationError(
                f"rule {idx}: action variables not bound by condition or "
                f"params: {sorted(unbound)}"
            )
    return policy
