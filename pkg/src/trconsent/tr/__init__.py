"""Teleo-reactive rule policies: DSL, syntax tree, and evaluator."""

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
    TrPolicy,
    TrRule,
    TrueCond,
    Var,
    validate_tr_policy,
)
from .eval import (
    ActionInvocation,
    ActionPlan,
    eval_condition,
    flatten_action,
    select_rule,
    step,
)
from .parser import parse_tr_policy, parse_tr_source
from .render import render_tr_policy

__all__ = [
    "ActionExpr",
    "ActionInvocation",
    "ActionPlan",
    "And",
    "Atom",
    "Call",
    "CondExpr",
    "Const",
    "Dotted",
    "Fact",
    "Firing",
    "Not",
    "Or",
    "Par",
    "Seq",
    "Substitution",
    "Term",
    "TrInstance",
    "TrPolicy",
    "TrRule",
    "TrueCond",
    "Var",
    "eval_condition",
    "flatten_action",
    "parse_tr_policy",
    "parse_tr_source",
    "render_tr_policy",
    "select_rule",
    "step",
    "validate_tr_policy",
]
