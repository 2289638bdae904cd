"""Matrix profiles and motif discovery for time series with missing values.

The profile of an incomplete series cannot be computed exactly, but every
entry can be bounded from below without assuming anything about the
missing points.  This package computes those bounds with the same rolling
O(n^2) scan used for exact profiles, so complete regions lose nothing and
incomplete regions can never hide a motif (false positives are possible,
false dismissals are not).
"""

from .bounds import (
    CaseLabel,
    CompletionBounds,
    RestrictedStats,
    complete_sqdist,
    lb_sqdist,
    lb_sqdist_windows,
    one_missing_sqlb,
    oracle_min_distance,
    restricted_stats,
    both_missing_sqlb,
    variance_fraction_bound,
    window_summary,
)
from .engine import (
    BLOCK_ANCHORS,
    DotProductRow,
    LowerBoundMatrixProfile,
    apply_exclusion_zone,
    brute_force_profile,
    calculate_lb_distance_profile,
    exact_profile,
    init_dot_products,
    lower_bound_profile,
    pairwise_sq_matrix,
    sliding_dot,
    update_dot_row,
)
from .motifs import MotifPair, top_k_motifs
from .preprocess import (
    MaskMode,
    MaskSpec,
    PseudoMissingRules,
    apply_mask,
    linear_impute,
    mark_pseudo_missing,
)
from .series import (
    AllMissingPolicy,
    AuxiliarySeries,
    EngineConfig,
    InfeasibleMaskError,
    MissingValueSeries,
    SeriesLengthError,
    SeriesParseError,
    WindowError,
    WindowStats,
    build_auxiliary,
    compute_window_stats,
    format_series,
    parse_series,
    read_series,
    sliding_extrema,
    sliding_mean_std,
)

__version__ = "0.1.0"

__all__ = [
    "AllMissingPolicy",
    "AuxiliarySeries",
    "BLOCK_ANCHORS",
    "CaseLabel",
    "CompletionBounds",
    "DotProductRow",
    "EngineConfig",
    "InfeasibleMaskError",
    "LowerBoundMatrixProfile",
    "MaskMode",
    "MaskSpec",
    "MissingValueSeries",
    "MotifPair",
    "PseudoMissingRules",
    "RestrictedStats",
    "SeriesLengthError",
    "SeriesParseError",
    "WindowError",
    "WindowStats",
    "apply_exclusion_zone",
    "apply_mask",
    "both_missing_sqlb",
    "brute_force_profile",
    "build_auxiliary",
    "calculate_lb_distance_profile",
    "complete_sqdist",
    "compute_window_stats",
    "exact_profile",
    "format_series",
    "init_dot_products",
    "lb_sqdist",
    "lb_sqdist_windows",
    "linear_impute",
    "lower_bound_profile",
    "mark_pseudo_missing",
    "one_missing_sqlb",
    "oracle_min_distance",
    "pairwise_sq_matrix",
    "parse_series",
    "read_series",
    "restricted_stats",
    "sliding_dot",
    "sliding_extrema",
    "sliding_mean_std",
    "top_k_motifs",
    "update_dot_row",
    "window_summary",
]
