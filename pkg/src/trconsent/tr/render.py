"""Pretty-printer for rule policies; inverse of the parser.

Emits the ASCII spelling with the fewest parentheses that preserves the
tree; ``parse(render(p))`` reproduces ``p`` exactly.
"""

from __future__ import annotations

from .ast import (
    ActionExpr,
    And,
    Atom,
    Call,
    CondExpr,
    Not,
    Or,
    Par,
    Seq,
    TrPolicy,
    TrRule,
    TrueCond,
)

# Precedence levels; higher binds tighter. Binary operators are left
# associative, so a right child at the same level needs parentheses.
_COND_PREC = {Or: 1, And: 2, Not: 3}
_ACT_PREC = {Seq: 1, Par: 2}


def _cond_prec(node: CondExpr) -> int:
    return _COND_PREC.get(type(node), 4)


def _act_prec(node: ActionExpr) -> int:
    return _ACT_PREC.get(type(node), 3)


def _render_cond(node: CondExpr, parent: int = 0, right: bool = False) -> str:
    prec = _cond_prec(node)
    if isinstance(node, TrueCond):
        text = "true"
    elif isinstance(node, Atom):
        text = str(node)
    elif isinstance(node, Not):
        text = "not " + _render_cond(node.expr, prec, right=False)
    elif isinstance(node, And):
        text = (
            _render_cond(node.left, prec)
            + " and "
            + _render_cond(node.right, prec, right=True)
        )
    else:
        text = (
            _render_cond(node.left, prec)
            + " or "
            + _render_cond(node.right, prec, right=True)
        )
    if prec < parent or (prec == parent and right):
        return f"({text})"
    return text


def _render_act(node: ActionExpr, parent: int = 0, right: bool = False) -> str:
    prec = _act_prec(node)
    if isinstance(node, Call):
        text = f"{node.name}({', '.join(str(a) for a in node.args)})"
    elif isinstance(node, Par):
        text = (
            _render_act(node.left, prec)
            + " par "
            + _render_act(node.right, prec, right=True)
        )
    else:
        text = (
            _render_act(node.left, prec)
            + " then "
            + _render_act(node.right, prec, right=True)
        )
    if prec < parent or (prec == parent and right):
        return f"({text})"
    return text


def render_rule(rule: TrRule) -> str:
    return f"{_render_cond(rule.condition)} -> {_render_act(rule.action)}"


def render_tr_policy(policy: TrPolicy) -> str:
    header = f"tr-policy {policy.name}({', '.join(policy.params)})"
    lines = [header] + ["  " + render_rule(r) for r in policy.rules]
    return "\n".join(lines) + "\n"
