"""Policy templates and their instantiation into authorization policies."""

from .forge import (
    expand_condition,
    instantiate_policy,
    match_templates,
    policy_id_for,
)
from .model import (
    AbstractCondition,
    CoLocatedAtRequesterClinic,
    EmergencyActive,
    OptionList,
    PolicyTemplate,
    PurposeIn,
    RawComparison,
    WithinDutyHours,
    load_template_file,
    parse_policy_template,
    serialize_policy_template,
)

__all__ = [
    "AbstractCondition",
    "CoLocatedAtRequesterClinic",
    "EmergencyActive",
    "OptionList",
    "PolicyTemplate",
    "PurposeIn",
    "RawComparison",
    "WithinDutyHours",
    "expand_condition",
    "instantiate_policy",
    "load_template_file",
    "match_templates",
    "parse_policy_template",
    "policy_id_for",
    "serialize_policy_template",
]
