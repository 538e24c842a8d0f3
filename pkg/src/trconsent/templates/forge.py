"""Template matching and policy instantiation.

Matching filters the library down to templates applicable to a consent
request in context and orders them by static specificity; a tie at the top
is an error, never a silent choice. Instantiation fills blanks from the
request (validating option lists) and expands abstract conditions into
concrete comparisons using the info point and the context snapshot.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from ..authz.documents import format_time_literal
from ..authz.model import (
    ATTR_EMERGENCY,
    ATTR_PURPOSE,
    ATTR_REQUESTER_LOCATION,
    ATTR_SUBJECT_LOCATION,
    ATTR_TIME,
    AuthorizationPolicy,
    Cmp,
    ContextSnapshot,
    IdTerm,
    PAnd,
    PolicyOrigin,
    PolicyState,
    ProvidedExpr,
    normalize_provided,
    OP_EQ,
    OP_GE,
    OP_LE,
)
from ..context.infopoint import InfoPointLike
from ..errors import AmbiguousTemplateError, InstantiationError, OptionListError
from ..lifecycle.requests import ConsentRequest
from .model import (
    CoLocatedAtRequesterClinic,
    EmergencyActive,
    OptionList,
    PolicyTemplate,
    PurposeIn,
    RawComparison,
    WithinDutyHours,
)


def _covers(option_list: OptionList | None, requested: Iterable[str]) -> bool:
    if option_list is None:
        return True
    return set(requested) <= option_list.options


def _applicable(
    template: PolicyTemplate, req: ConsentRequest, ctx: ContextSnapshot
) -> bool:
    if req.requester_role not in template.requester_roles:
        return False
    if not _covers(template.resources, req.resources):
        return False
    if not _covers(template.rights, req.rights):
        return False
    if any(isinstance(c, EmergencyActive) for c in template.conditions) and not ctx.emergency:
        return False
    # Break-the-glass templates serve unconscious patients only, and an
    # unconscious patient cannot answer an ordinary decision prompt.
    if template.break_the_glass != req.patient_unconscious:
        return False
    return True


def match_templates(
    req: ConsentRequest,
    ctx: ContextSnapshot,
    library: Sequence[PolicyTemplate],
) -> list[PolicyTemplate]:
    """Applicable templates, most specific first.

    Raises when two applicable templates tie at the top score.
    """
    matched = [t for t in library if _applicable(t, req, ctx)]
    matched.sort(key=lambda t: (-t.specificity(), t.id))
    if len(matched) >= 2 and matched[0].specificity() == matched[1].specificity():
        raise AmbiguousTemplateError([matched[0].id, matched[1].id])
    return matched


def _fill_from_options(
    option_list: OptionList | None,
    requested: frozenset[str],
    field_name: str,
) -> frozenset[str]:
    if option_list is not None:
        outside = requested - option_list.options
        if outside:
            raise OptionListError(
                f"{field_name} {sorted(outside)} outside template options "
                f"{sorted(option_list.options)}"
            )
    return requested


def expand_condition(
    cond,
    req: ConsentRequest,
    ctx: ContextSnapshot,
    info: InfoPointLike,
) -> list[Cmp]:
    if isinstance(cond, PurposeIn):
        if req.purpose not in cond.purposes:
            raise OptionListError(
                f"purpose {req.purpose!r} outside template options "
                f"{sorted(cond.purposes)}"
            )
        return [Cmp(ATTR_PURPOSE, OP_EQ, req.purpose)]
    if isinstance(cond, WithinDutyHours):
        hours = info.duty_hours(req.requester_id)
        if hours is None:
            raise InstantiationError(
                f"info point has no duty hours for {req.requester_id!r}"
            )
        start, end = hours
        return [Cmp(ATTR_TIME, OP_GE, start), Cmp(ATTR_TIME, OP_LE, end)]
    if isinstance(cond, CoLocatedAtRequesterClinic):
        clinic = info.clinic_location(req.requester_id)
        if clinic is None:
            raise InstantiationError(
                f"info point has no clinic location for {req.requester_id!r}"
            )
        return [
            Cmp(ATTR_SUBJECT_LOCATION, OP_EQ, clinic),
            Cmp(ATTR_REQUESTER_LOCATION, OP_EQ, clinic),
        ]
    if isinstance(cond, EmergencyActive):
        if not ctx.emergency:
            raise InstantiationError(
                "emergency template instantiated outside an emergency"
            )
        return [
            Cmp(ATTR_EMERGENCY, OP_EQ, True),
            Cmp(ATTR_SUBJECT_LOCATION, OP_EQ, ctx.subject_location),
            Cmp(ATTR_REQUESTER_LOCATION, OP_EQ, ctx.requester_location),
        ]
    if isinstance(cond, RawComparison):
        return [cond.cmp]
    raise InstantiationError(f"unknown abstract condition {cond!r}")


def policy_id_for(
    template: PolicyTemplate, req: ConsentRequest, *, role_level: bool = False
) -> str:
    requester_part = req.requester_role if role_level else req.requester_id
    return f"{template.id}:{req.patient_id}:{requester_part}"


def instantiate_policy(
    template: PolicyTemplate,
    req: ConsentRequest,
    ctx: ContextSnapshot,
    info: InfoPointLike,
    *,
    role_level: bool = False,
) -> AuthorizationPolicy:
    """Concrete Active policy from a template plus request and context.

    ``role_level`` omits requester ids so the policy constrains the role
    only (emergency-team deployments may prefer this).
    """
    resources = _fill_from_options(
        template.resources, frozenset(req.resources), "resources"
    )
    rights = _fill_from_options(template.rights, frozenset(req.rights), "rights")

    if role_level:
        requester_ids: tuple[IdTerm, ...] | None = None
    elif template.requester_ids is not None:
        requester_ids = template.requester_ids
    else:
        requester_ids = (IdTerm(req.requester_id),)

    clauses: list[Cmp] = []
    for cond in template.conditions:
        clauses.extend(expand_condition(cond, req, ctx, info))
    provided: ProvidedExpr | None = None
    if clauses:
        provided = normalize_provided(PAnd(tuple(clauses)))

    instantiated_at = f"{ctx.access_date.isoformat()}T{format_time_literal(ctx.access_time)}:00"
    return AuthorizationPolicy(
        id=policy_id_for(template, req, role_level=role_level),
        requester_roles=template.requester_roles,
        requester_ids=requester_ids,
        subject_id=req.patient_id,
        resources=resources,
        access_rights=rights,
        provided=provided,
        state=PolicyState.ACTIVE,
        origin=PolicyOrigin(template.id, instantiated_at),
    )
