"""Verification toolkit for quantum measures on finite history spaces.

The package decides quantum covers exactly, scans every inextendible
antichain of small powerset lattices for counterexamples to the
covering conjecture, verifies the algebraic identities a quantum
measure must satisfy, builds preclusion structures, and mechanically
checks the 33-ray coloring obstruction.
"""

from .antichain import (
    Antichain,
    GENERATOR_KINDS,
    PivotDecomposition,
    classify,
    enumerate_inextendible,
    generate,
    is_antichain,
    is_inextendible,
)
from .coevent import (
    PreclusionStructure,
    derived_antichain,
    nontriviality,
    ppc_supports,
    zero_sets,
)
from .cover import (
    Certificate,
    CoverVerdict,
    LevelSumReport,
    ScanReport,
    certificate_class_C,
    decide,
    indicator_level_identity,
    level_sum_check,
    scan,
)
from .errors import (
    ConsistencyError,
    InfeasibleNormalizationError,
    NoCoeventError,
    ResourceLimitError,
    SpaceMismatchError,
)
from .histories import Event, HistorySpace, closure, level_elements, shadow
from .measure import (
    DecoherenceFunctional,
    IdentitySuiteReport,
    ValidationReport,
    d_of,
    identity_suite,
    interference,
    load_functional,
    measure_level,
    mu,
    mu_table,
    sample_spd,
    save_functional,
    validate,
    verify_identity,
)
from .pks import (
    Basis,
    Coloring,
    CoverageReport,
    OrthogonalStructure,
    PKSEvent,
    Ray,
    SearchOutcome,
    WitnessReport,
    orthogonal_structure,
    peres_rays,
    pks_comparability,
    pks_events,
    sample_coverage,
    search_consistent_coloring,
    witness_check,
)

__version__ = "0.1.0"

__all__ = [
    "Antichain",
    "Basis",
    "Certificate",
    "Coloring",
    "ConsistencyError",
    "CoverVerdict",
    "CoverageReport",
    "DecoherenceFunctional",
    "Event",
    "GENERATOR_KINDS",
    "HistorySpace",
    "IdentitySuiteReport",
    "InfeasibleNormalizationError",
    "LevelSumReport",
    "NoCoeventError",
    "OrthogonalStructure",
    "PKSEvent",
    "PivotDecomposition",
    "PreclusionStructure",
    "Ray",
    "ResourceLimitError",
    "ScanReport",
    "SearchOutcome",
    "SpaceMismatchError",
    "ValidationReport",
    "WitnessReport",
    "certificate_class_C",
    "classify",
    "closure",
    "d_of",
    "decide",
    "derived_antichain",
    "enumerate_inextendible",
    "generate",
    "identity_suite",
    "indicator_level_identity",
    "interference",
    "is_antichain",
    "is_inextendible",
    "level_elements",
    "level_sum_check",
    "load_functional",
    "measure_level",
    "mu",
    "mu_table",
    "nontriviality",
    "orthogonal_structure",
    "peres_rays",
    "pks_comparability",
    "pks_events",
    "ppc_supports",
    "sample_coverage",
    "sample_spd",
    "save_functional",
    "scan",
    "search_consistent_coloring",
    "shadow",
    "validate",
    "verify_identity",
    "witness_check",
    "zero_sets",
]
