"""Policy templates: authorization-policy skeletons with blanks, option
lists, and abstract conditions concretized at instantiation time."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import PolicyDocumentError, TemplateError
from ..authz.documents import (
    parse_id_terms,
    parse_provided,
    serialize_id_terms,
    serialize_provided,
)
from ..authz.model import Cmp, IdTerm


@dataclass(frozen=True)
class OptionList:
    """Field may only be filled with values from this non-empty set."""

    options: frozenset[str]

    def __post_init__(self) -> None:
        if not self.options:
            raise TemplateError("option list must not be empty")


# Abstract conditions; each expands to concrete comparisons when the
# template is instantiated.


@dataclass(frozen=True)
class PurposeIn:
    purposes: frozenset[str]

    def __post_init__(self) -> None:
        if not self.purposes:
            raise TemplateError("purpose set must not be empty")


@dataclass(frozen=True)
class WithinDutyHours:
    pass


@dataclass(frozen=True)
class CoLocatedAtRequesterClinic:
    pass


@dataclass(frozen=True)
class EmergencyActive:
    pass


@dataclass(frozen=True)
class RawComparison:
    """Concrete comparison carried through verbatim."""

    cmp: Cmp


AbstractCondition = (
    PurposeIn | WithinDutyHours | CoLocatedAtRequesterClinic | EmergencyActive | RawComparison
)


@dataclass(frozen=True)
class PolicyTemplate:
    id: str
    goal_tag: str
    requester_roles: frozenset[str]
    requester_ids: tuple[IdTerm, ...] | None = None  # None = blank
    resources: OptionList | None = None  # None = blank (unconstrained)
    rights: OptionList | None = None
    conditions: tuple[AbstractCondition, ...] = ()
    break_the_glass: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise TemplateError("template id must not be empty")
        if not self.goal_tag:
            raise TemplateError(f"template {self.id!r} has no goal tag")
        if not self.requester_roles:
            raise TemplateError(f"template {self.id!r} has no requester roles")

    def specificity(self) -> int:
        """Static specificity: +2 per constrained field, +1 per condition."""
        score = 0
        if self.requester_ids is not None:
            score += 2
        if self.resources is not None:
            score += 2
        if self.rights is not None:
            score += 2
        score += len(self.conditions)
        return score


_TOP_FIELDS = {
    "id",
    "goalTag",
    "breakTheGlass",
    "dataRequesterRole",
    "dataRequesterId",
    "dataSubjectId",
    "dataSubjectResource",
    "accessRights",
    "conditions",
}

_CONDITION_KEYS = {
    "purposeIn",
    "withinDutyHours",
    "coLocatedAtRequesterClinic",
    "emergencyActive",
    "cmp",
}


def _parse_option_field(raw: Any, field_name: str) -> OptionList | None:
    if raw is None:
        return None
    if not isinstance(raw, dict) or set(raw) != {"options"}:
        raise PolicyDocumentError(
            f"{field_name} must be null (blank) or {{\"options\": [...]}}"
        )
    values = raw["options"]
    if not isinstance(values, list) or not values:
        raise PolicyDocumentError(f"{field_name} options must be a non-empty list")
    return OptionList(frozenset(str(v) for v in values))


def _parse_condition(raw: Any) -> AbstractCondition:
    if not isinstance(raw, dict) or len(raw) != 1:
        raise PolicyDocumentError(f"bad abstract condition {raw!r}")
    (key, body), = raw.items()
    if key not in _CONDITION_KEYS:
        raise PolicyDocumentError(f"unknown abstract condition {key!r}")
    if key == "purposeIn":
        if not isinstance(body, list) or not body:
            raise PolicyDocumentError("purposeIn needs a non-empty purpose list")
        return PurposeIn(frozenset(str(p) for p in body))
    if key == "withinDutyHours":
        return WithinDutyHours()
    if key == "coLocatedAtRequesterClinic":
        return CoLocatedAtRequesterClinic()
    if key == "emergencyActive":
        return EmergencyActive()
    node = parse_provided({"cmp": body})
    assert isinstance(node, Cmp)
    return RawComparison(node)


def _serialize_condition(cond: AbstractCondition) -> dict[str, Any]:
    if isinstance(cond, PurposeIn):
        return {"purposeIn": sorted(cond.purposes)}
    if isinstance(cond, WithinDutyHours):
        return {"withinDutyHours": True}
    if isinstance(cond, CoLocatedAtRequesterClinic):
        return {"coLocatedAtRequesterClinic": True}
    if isinstance(cond, EmergencyActive):
        return {"emergencyActive": True}
    return serialize_provided(cond.cmp)


def parse_policy_template(doc: dict[str, Any]) -> PolicyTemplate:
    if not isinstance(doc, dict):
        raise PolicyDocumentError("template document must be an object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise PolicyDocumentError(f"unknown template fields: {sorted(unknown)}")
    for required in ("id", "goalTag", "dataRequesterRole"):
        if required not in doc:
            raise PolicyDocumentError(f"missing template field {required!r}")
    if doc.get("dataSubjectId") is not None:
        raise PolicyDocumentError("dataSubjectId must be blank (null) in a template")
    roles_raw = doc["dataRequesterRole"]
    if not isinstance(roles_raw, list) or not roles_raw:
        raise PolicyDocumentError("dataRequesterRole must be a non-empty list")
    conditions = tuple(_parse_condition(c) for c in doc.get("conditions", []))
    return PolicyTemplate(
        id=str(doc["id"]),
        goal_tag=str(doc["goalTag"]),
        requester_roles=frozenset(str(r) for r in roles_raw),
        requester_ids=parse_id_terms(doc.get("dataRequesterId")),
        resources=_parse_option_field(doc.get("dataSubjectResource"), "dataSubjectResource"),
        rights=_parse_option_field(doc.get("accessRights"), "accessRights"),
        conditions=conditions,
        break_the_glass=bool(doc.get("breakTheGlass", False)),
    )


def serialize_policy_template(template: PolicyTemplate) -> dict[str, Any]:
    return {
        "id": template.id,
        "goalTag": template.goal_tag,
        "breakTheGlass": template.break_the_glass,
        "dataRequesterRole": sorted(template.requester_roles),
        "dataRequesterId": serialize_id_terms(template.requester_ids),
        "dataSubjectId": None,
        "dataSubjectResource": (
            None if template.resources is None
            else {"options": sorted(template.resources.options)}
        ),
        "accessRights": (
            None if template.rights is None
            else {"options": sorted(template.rights.options)}
        ),
        "conditions": [_serialize_condition(c) for c in template.conditions],
    }


def load_template_file(path: str | Path) -> PolicyTemplate:
    return parse_policy_template(json.loads(Path(path).read_text(encoding="utf-8")))
