"""Exact combinatorics of Schreier families and mixed Tsirelson-type norms."""
from .coding import CodingFunction, HistoryCoder
from .errors import (
    CarrierExhausted,
    DomainError,
    LimitExceeded,
    NotSchreierError,
    TsirelsonError,
    UnsupportedRule,
)
from .families import FamilySpec, family_member, is_admissible, maximal_family_subset, modified_member
from .functionals import (
    admi_check,
    g_operation,
    validate_dependent,
    validate_special_sequence_W4,
    validate_W,
    validate_W4,
    weight_cut_nodes,
)
from .norm import brute_force_norm_oracle, norm, norm_weight_restricted
from .parameters import ParameterSystem, Rule, SpaceSpec, named_space
from .trees import TreeFunctional, evaluate, tag_ord
from .vectors import FinVector, check_basic_scc, make_scc, repeated_average

__all__ = [
    "CarrierExhausted",
    "CodingFunction",
    "DomainError",
    "FamilySpec",
    "FinVector",
    "HistoryCoder",
    "LimitExceeded",
    "NotSchreierError",
    "ParameterSystem",
    "Rule",
    "SpaceSpec",
    "TreeFunctional",
    "TsirelsonError",
    "UnsupportedRule",
    "admi_check",
    "brute_force_norm_oracle",
    "check_basic_scc",
    "evaluate",
    "family_member",
    "g_operation",
    "is_admissible",
    "make_scc",
    "maximal_family_subset",
    "modified_member",
    "named_space",
    "norm",
    "norm_weight_restricted",
    "repeated_average",
    "tag_ord",
    "validate_W",
    "validate_W4",
    "validate_dependent",
    "validate_special_sequence_W4",
    "weight_cut_nodes",
]
