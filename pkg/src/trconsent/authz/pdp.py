"""Policy decision point.

Target matching (role, subject, resource, right) is scope: a miss yields
NotApplicable, never Deny. Identity terms and the ``provided`` condition are
the deny surface. Evaluation is pure.
"""

from __future__ import annotations

from datetime import date

from ..errors import MalformedComparisonError, PolicyStateError
from .model import (
    ATTR_DATE,
    ATTR_EMERGENCY,
    ATTR_PURPOSE,
    ATTR_REQUESTER_LOCATION,
    ATTR_SUBJECT_LOCATION,
    ATTR_TIME,
    AccessRequest,
    AuthorizationPolicy,
    Cmp,
    ContextSnapshot,
    Decision,
    Outcome,
    PAnd,
    POr,
    PolicyState,
    ProvidedExpr,
    TraceNode,
    OP_EQ,
    OP_GE,
    OP_LE,
    OP_NE,
)
from .documents import render_literal


def _attribute_value(
    attribute: str, request: AccessRequest, ctx: ContextSnapshot
) -> str | int | bool | date:
    if attribute == ATTR_PURPOSE:
        return request.purpose
    if attribute == ATTR_TIME:
        return ctx.access_time
    if attribute == ATTR_DATE:
        return ctx.access_date
    if attribute == ATTR_REQUESTER_LOCATION:
        return ctx.requester_location
    if attribute == ATTR_SUBJECT_LOCATION:
        return ctx.subject_location
    if attribute == ATTR_EMERGENCY:
        return ctx.emergency
    raise MalformedComparisonError(f"unknown attribute {attribute!r}")


def _eval_cmp(cmp: Cmp, request: AccessRequest, ctx: ContextSnapshot) -> TraceNode:
    actual = _attribute_value(cmp.attribute, request, ctx)
    if type(actual) is not type(cmp.value):
        raise MalformedComparisonError(
            f"{cmp.attribute}: cannot compare {actual!r} with {cmp.value!r}"
        )
    if cmp.op == OP_EQ:
        result = actual == cmp.value
    elif cmp.op == OP_NE:
        result = actual != cmp.value
    elif cmp.op == OP_GE:
        result = actual >= cmp.value  # type: ignore[operator]
    else:
        result = actual <= cmp.value  # type: ignore[operator]
    detail = (
        f"{cmp.attribute} {cmp.op} {render_literal(cmp.attribute, cmp.value)}"
        f" (actual {render_literal(cmp.attribute, actual)})"
    )
    return TraceNode("cmp", result, detail)


def eval_provided(
    expr: ProvidedExpr, request: AccessRequest, ctx: ContextSnapshot
) -> TraceNode:
    if isinstance(expr, Cmp):
        return _eval_cmp(expr, request, ctx)
    children = tuple(eval_provided(c, request, ctx) for c in expr.children)
    if isinstance(expr, PAnd):
        return TraceNode("and", all(c.result for c in children), children=children)
    if isinstance(expr, POr):
        return TraceNode("or", any(c.result for c in children), children=children)
    raise MalformedComparisonError(f"unknown provided node {expr!r}")


def _first_failure(node: TraceNode) -> str:
    if node.kind == "cmp":
        return node.detail
    if node.kind == "and":
        for child in node.children:
            if not child.result:
                return _first_failure(child)
    # failed Or: report the first branch's failure
    if node.children:
        return _first_failure(node.children[0])
    return "condition failed"


def evaluate_access(
    policy: AuthorizationPolicy, request: AccessRequest, ctx: ContextSnapshot
) -> Decision:
    """Permit / Deny / NotApplicable for one (policy, request, context)."""
    if policy.state is not PolicyState.ACTIVE:
        raise PolicyStateError(
            f"policy {policy.id!r} is {policy.state.value}; only Active policies "
            "may be evaluated"
        )

    if request.requester_role not in policy.requester_roles:
        return Decision(
            Outcome.NOT_APPLICABLE,
            f"role {request.requester_role!r} not covered by policy",
        )
    if request.subject_id != policy.subject_id:
        return Decision(
            Outcome.NOT_APPLICABLE,
            f"subject {request.subject_id!r} not covered by policy",
        )
    if request.resource not in policy.resources:
        return Decision(
            Outcome.NOT_APPLICABLE,
            f"resource {request.resource!r} not covered by policy",
        )
    if request.right not in policy.access_rights:
        return Decision(
            Outcome.NOT_APPLICABLE,
            f"right {request.right!r} not covered by policy",
        )

    if policy.requester_ids is not None:
        for term in policy.requester_ids:
            if term.negated and term.label == request.requester_id:
                return Decision(
                    Outcome.DENY,
                    f"requester {request.requester_id!r} is explicitly denied",
                )
        positive = [t.label for t in policy.requester_ids if not t.negated]
        if positive and request.requester_id not in positive:
            return Decision(
                Outcome.DENY,
                f"requester {request.requester_id!r} is not among the permitted "
                f"ids {sorted(positive)}",
            )

    if policy.provided is None:
        return Decision(Outcome.PERMIT)
    trace = eval_provided(policy.provided, request, ctx)
    if trace.result:
        return Decision(Outcome.PERMIT, trace=trace)
    return Decision(
        Outcome.DENY, f"condition failed: {_first_failure(trace)}", trace=trace
    )
