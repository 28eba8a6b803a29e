"""Margin-parameterized condensation of labeled training sets, with
mechanical verification of the nearest-neighbor guarantees the condensed
subsets carry."""

from .condense import (
    Algorithm,
    CondensedSubset,
    alpha_fcnn,
    alpha_hss,
    alpha_net,
    alpha_rss,
    alpha_rss_fast,
    alpha_sfcnn,
    make_subset,
    voren_alpha,
)
from .core import (
    DatasetStats,
    LabeledPoint,
    Metric,
    NeighborResult,
    TrainingSet,
    chromatic_density,
    compute_stats,
    distance,
    fingerprint,
    nearest_enemy_brute,
    nearest_neighbor_brute,
    normalize_diameter,
)
from .data import (
    DatasetDescriptor,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    load_subset,
    save_subset,
    save_training_csv,
)
from .errors import (
    CoincidentPointsError,
    CsvFormatError,
    DimensionMismatchError,
    DuplicateConflictError,
    EmptyActiveSetError,
    EmptyCandidatesError,
    FingerprintMismatchError,
    InvalidParameterError,
    MemberPointQueryError,
    NNCError,
    PreconditionError,
    QuadraticGateError,
    SingleClassError,
    SizeCapError,
    SubsetFormatError,
)
from .index import (
    DynamicIndex,
    EnemyOracle,
    SpatialIndex,
    build_index,
    insert,
    nearest_enemy_all,
    query_ann,
)
from .verify import (
    QuerySampler,
    VerificationReport,
    Violation,
    alpha_for_approx_coreset,
    brute_min_consistent,
    brute_min_selective,
    check_alpha_consistent,
    check_alpha_selective,
    check_approx_coreset,
    check_coreset,
    check_density_bound,
    check_weak_coreset,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm", "CoincidentPointsError", "CondensedSubset", "CsvFormatError",
    "DatasetDescriptor", "DatasetStats", "DimensionMismatchError",
    "DuplicateConflictError", "DynamicIndex", "EmptyActiveSetError",
    "EmptyCandidatesError", "EnemyOracle", "FingerprintMismatchError",
    "InvalidParameterError", "LabeledPoint", "MemberPointQueryError", "Metric",
    "NNCError", "NeighborResult", "PreconditionError", "QuadraticGateError",
    "QuerySampler", "SingleClassError", "SizeCapError", "SpatialIndex",
    "SubsetFormatError", "SyntheticSpec", "TrainingSet", "VerificationReport",
    "Violation",
    "alpha_fcnn", "alpha_for_approx_coreset", "alpha_hss", "alpha_net",
    "alpha_rss", "alpha_rss_fast", "alpha_sfcnn", "brute_min_consistent",
    "brute_min_selective", "build_index", "check_alpha_consistent",
    "check_alpha_selective", "check_approx_coreset", "check_coreset",
    "check_density_bound", "check_weak_coreset", "chromatic_density",
    "compute_stats", "distance", "fingerprint", "generate_synthetic", "insert",
    "load_csv", "load_subset", "make_subset", "nearest_enemy_all",
    "nearest_enemy_brute", "nearest_neighbor_brute", "normalize_diameter",
    "query_ann", "save_subset", "save_training_csv", "voren_alpha",
]
