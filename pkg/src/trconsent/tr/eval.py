"""Evaluation of rule policies against a ground fact store.

Substitutions are discovered depth first, visiting facts in store insertion
order, so results are deterministic and the first substitution is the one a
``select_rule`` caller acts on. Negation is negation-as-failure over the
closed fact store; a negated sub-expression must be fully bound when it is
reached or evaluation refuses (unsafe negation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import EvalError, UnsafeNegationError
from .ast import (
    ActionExpr,
    And,
    Atom,
    Call,
    CondExpr,
    Const,
    Dotted,
    Fact,
    Firing,
    Not,
    Or,
    Par,
    Seq,
    Substitution,
    Term,
    TrInstance,
    TrueCond,
    Var,
    cond_vars,
)


@dataclass(frozen=True)
class ActionInvocation:
    """A single ground function call produced by a fired rule."""

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.args)})"


# A plan is a list of stages; calls within one stage are concurrent,
# stages run in order.
ActionPlan = list[list[ActionInvocation]]


def _match_term(term: Term, value: str, subst: Substitution) -> Substitution | None:
    if isinstance(term, Const):
        return subst if term.value == value else None
    if isinstance(term, Var):
        bound = subst.get(term.name)
        if bound is None:
            out = dict(subst)
            out[term.name] = value
            return out
        return subst if bound == value else None
    # Dotted: constant formed from a bound variable plus suffix
    base = subst.get(term.base)
    if base is None:
        raise EvalError(f"dotted path {term} used before {term.base} is bound")
    return subst if f"{base}.{term.suffix}" == value else None


def _resolve_term(term: Term, subst: Substitution) -> str:
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Var):
        value = subst.get(term.name)
        if value is None:
            raise EvalError(f"unbound variable {term.name}")
        return value
    base = subst.get(term.base)
    if base is None:
        raise EvalError(f"dotted path {term} used before {term.base} is bound")
    return f"{base}.{term.suffix}"


def _subst_key(subst: Substitution) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(subst.items()))


def _dedupe(subs: Iterable[Substitution]) -> list[Substitution]:
    seen: set[tuple[tuple[str, str], ...]] = set()
    out: list[Substitution] = []
    for s in subs:
        key = _subst_key(s)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _eval(cond: CondExpr, facts: tuple[Fact, ...], subst: Substitution) -> list[Substitution]:
    if isinstance(cond, TrueCond):
        return [subst]
    if isinstance(cond, Atom):
        out: list[Substitution] = []
        for fact in facts:
            if fact.pred != cond.pred or len(fact.args) != len(cond.args):
                continue
            candidate: Substitution | None = subst
            for term, value in zip(cond.args, fact.args):
                candidate = _match_term(term, value, candidate)
                if candidate is None:
                    break
            if candidate is not None:
                out.append(candidate)
        return _dedupe(out)
    if isinstance(cond, Not):
        free = cond_vars(cond.expr) - set(subst)
        if free:
            raise UnsafeNegationError(
                f"negated condition has unbound variables: {sorted(free)}"
            )
        return [] if _eval(cond.expr, facts, subst) else [subst]
    if isinstance(cond, And):
        out = []
        for left in _eval(cond.left, facts, subst):
            out.extend(_eval(cond.right, facts, left))
        return _dedupe(out)
    if isinstance(cond, Or):
        return _dedupe(
            _eval(cond.left, facts, subst) + _eval(cond.right, facts, subst)
        )
    raise EvalError(f"unknown condition node {cond!r}")


def eval_condition(
    cond: CondExpr,
    facts: Iterable[Fact],
    seed: Substitution,
) -> list[Substitution]:
    """All substitutions extending ``seed`` that make ``cond`` true.

    Empty list iff the condition is unsatisfiable under the facts.
    """
    return _eval(cond, tuple(facts), dict(seed))


def select_rule(inst: TrInstance, facts: Iterable[Fact]) -> Firing | None:
    """First rule (lowest index) whose condition is satisfiable, with the
    deterministic first substitution; ``None`` when no rule fires."""
    snapshot = tuple(facts)
    seed: Substitution = dict(inst.bindings)
    for index, rule in enumerate(inst.policy.rules):
        matches = eval_condition(rule.condition, snapshot, seed)
        if matches:
            return index, matches[0]
    return None


def flatten_action(action: ActionExpr, subst: Substitution) -> ActionPlan:
    """Ground an action tree into staged invocations.

    ``Seq`` concatenates stage lists; ``Par`` merges them stage by stage.
    """
    if isinstance(action, Call):
        inv = ActionInvocation(
            action.name, tuple(_resolve_term(a, subst) for a in action.args)
        )
        return [[inv]]
    if isinstance(action, Seq):
        return flatten_action(action.left, subst) + flatten_action(action.right, subst)
    if isinstance(action, Par):
        left = flatten_action(action.left, subst)
        right = flatten_action(action.right, subst)
        merged: ActionPlan = []
        for i in range(max(len(left), len(right))):
            stage: list[ActionInvocation] = []
            if i < len(left):
                stage.extend(left[i])
            if i < len(right):
                stage.extend(right[i])
            merged.append(stage)
        return merged
    raise EvalError(f"unknown action node {action!r}")


def step(inst: TrInstance, facts: Iterable[Fact]) -> ActionPlan:
    """Edge-triggered firing: emit a plan only when the selected
    (rule, substitution) differs from the previous call's selection."""
    selected = select_rule(inst, facts)
    if selected == inst.last_firing:
        return []
    inst.last_firing = selected
    if selected is None:
        return []
    index, subst = selected
    return flatten_action(inst.policy.rules[index].action, subst)
