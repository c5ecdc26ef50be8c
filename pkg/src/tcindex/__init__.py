"""Technological complexity indices from actor-category incidence data."""

__version__ = "0.1.0"

from .bipartite import binarize, compute_rta, degrees, specialize
from .complexity import (
    reduced_matrix,
    reflect,
    scale_0_100,
    tci_eigen,
    tci_reflect_limit,
)
from .estimators import RtaBinarizer, RtaTransformer, TechnologyComplexity
from .ingest import (
    Concordance,
    PatentRecord,
    RecordSchema,
    allocate_weights,
    filter_top_share,
    iter_windows,
    map_classification,
    parse_records,
    window_records,
)
from .matrices import ComplexityResult, SpecializationMatrix, WeightMatrix
from .stats import UTestResult, mann_whitney_u, pearson, rank, spearman

__all__ = [
    "Concordance",
    "ComplexityResult",
    "PatentRecord",
    "RecordSchema",
    "RtaBinarizer",
    "RtaTransformer",
    "SpecializationMatrix",
    "TechnologyComplexity",
    "UTestResult",
    "WeightMatrix",
    "allocate_weights",
    "binarize",
    "compute_rta",
    "degrees",
    "filter_top_share",
    "iter_windows",
    "mann_whitney_u",
    "map_classification",
    "parse_records",
    "pearson",
    "rank",
    "reduced_matrix",
    "reflect",
    "scale_0_100",
    "spearman",
    "specialize",
    "tci_eigen",
    "tci_reflect_limit",
    "window_records",
]
