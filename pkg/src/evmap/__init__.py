"""Evidential mappings: belief-mass propagation through uncertain heuristic rules."""

from .errors import (
    EvmapError,
    FrameMismatchError,
    ImpossibleObservationError,
    InferenceError,
    ParseError,
    TotalConflictError,
    ValidationError,
)
from .frames import FRAME_CAP, Frame, SubsetRef
from .mapping import (
    BasicMatrix,
    CemRow,
    ComposedMapping,
    EvidentialMapping,
    basic_matrix,
    bayes_enumeration_posterior,
    cem_row,
    classify_mapping,
    combine_mappings,
    compose,
    export_cem_rows,
    posterior,
    propagate_mass,
    propagate_probability,
)
from .mass import (
    NORMALIZATION_TOL,
    BeliefTable,
    Combined,
    MassFunction,
    combine_dempster,
    mass_from_belief,
)
from .product import (
    ProductFrame,
    extension_mapping,
    fuse_marginals,
    product_frame,
    propagate_joint,
)
from .report import BeliefReport, render_text, render_tsv, save_figure
from .rules import (
    CompletenessReport,
    EvidenceDecl,
    HeuristicRule,
    RuleSet,
    RuleTerm,
    classify_completeness,
    complete_ruleset,
    from_ginsberg,
    from_hau_kashyap,
    parse_document,
    parse_rules,
    render_evidence,
    render_mapping,
    render_ruleset,
    ruleset_to_mapping,
)

__version__ = "0.1.0"

__all__ = [
    "BasicMatrix",
    "BeliefReport",
    "BeliefTable",
    "CemRow",
    "Combined",
    "CompletenessReport",
    "ComposedMapping",
    "EvidenceDecl",
    "EvidentialMapping",
    "EvmapError",
    "FRAME_CAP",
    "Frame",
    "FrameMismatchError",
    "HeuristicRule",
    "ImpossibleObservationError",
    "InferenceError",
    "MassFunction",
    "NORMALIZATION_TOL",
    "ParseError",
    "ProductFrame",
    "RuleSet",
    "RuleTerm",
    "SubsetRef",
    "TotalConflictError",
    "ValidationError",
    "basic_matrix",
    "bayes_enumeration_posterior",
    "cem_row",
    "classify_completeness",
    "classify_mapping",
    "combine_dempster",
    "combine_mappings",
    "complete_ruleset",
    "compose",
    "export_cem_rows",
    "extension_mapping",
    "from_ginsberg",
    "from_hau_kashyap",
    "fuse_marginals",
    "mass_from_belief",
    "parse_document",
    "parse_rules",
    "posterior",
    "product_frame",
    "propagate_joint",
    "propagate_mass",
    "propagate_probability",
    "render_evidence",
    "render_mapping",
    "render_ruleset",
    "render_text",
    "render_tsv",
    "ruleset_to_mapping",
    "save_figure",
]
