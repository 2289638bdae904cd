"""Pairwise z-normalized squared distances and their lower bounds.

For two length-``m`` windows the distance is exact when both are complete.
When values are missing, the functions here return an admissible lower
bound on the distance attainable under any completion of the gaps: the
bound may be loose (false positives allowed) but never exceeds the true
distance (no false negatives).  ``oracle_min_distance`` certifies that
claim by sampling completions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .series import AllMissingPolicy, EngineConfig

__all__ = [
    "CaseLabel",
    "CompletionBounds",
    "RestrictedStats",
    "WindowSummary",
    "both_missing_sqlb",
    "complete_sqdist",
    "lb_sqdist",
    "lb_sqdist_windows",
    "one_missing_sqlb",
    "oracle_min_distance",
    "restricted_stats",
    "variance_fraction_bound",
    "window_summary",
]


class CaseLabel(enum.IntEnum):
    """Which bound applied to a pair, determined by the two presence masks."""

    COMPLETE = 1
    ONE_MISSING = 2
    BOTH_MISSING = 3
    NO_OVERLAP = 4
    ALL_MISSING = 5

    @property
    def code(self) -> str:
        return _CASE_CODES[self]


_CASE_CODES = {
    CaseLabel.COMPLETE: "C1",
    CaseLabel.ONE_MISSING: "C2",
    CaseLabel.BOTH_MISSING: "C3",
    CaseLabel.NO_OVERLAP: "NOV",
    CaseLabel.ALL_MISSING: "AMS",
}


@dataclass(frozen=True)
class RestrictedStats:
    """Moments of two windows over R, the positions present in both.

    ``q`` is the Pearson correlation over R, clamped to [-1, 1], or None
    when either restricted variance is degenerate.
    """

    r_count: int
    mu_i_r: float
    mu_j_r: float
    var_i_r: float
    var_j_r: float
    q: float | None


@dataclass(frozen=True)
class CompletionBounds:
    """Admissible value range for the missing entries of one window."""

    v_min: float
    v_max: float

    def __post_init__(self):
        if self.v_min > self.v_max:
            raise ValueError(f"bounds out of order: ({self.v_min}, {self.v_max})")


@dataclass(frozen=True)
class WindowSummary:
    """The per-window statistics a pairwise bound needs."""

    mu_z: float
    sigma_z: float
    mu_b: float
    vmax: float
    vmin: float


def window_summary(window: np.ndarray) -> WindowSummary:
    """Summarize one window directly (no sliding state); NaN is missing."""
    w = np.asarray(window, dtype=np.float64)
    present = ~np.isnan(w)
    z = np.where(present, w, 0.0)
    mu_z = float(z.mean())
    sigma_z = float(math.sqrt(max(float((z * z).mean()) - mu_z * mu_z, 0.0)))
    mu_b = present.sum() / w.size
    if present.any():
        vmax = float(w[present].max())
        vmin = float(w[present].min())
    else:
        vmax = vmin = math.nan
    return WindowSummary(mu_z=mu_z, sigma_z=sigma_z, mu_b=mu_b, vmax=vmax, vmin=vmin)


def restricted_stats(
    qz: float,
    qb: float,
    bz: float,
    zb: float,
    bx: float,
    xb: float,
    epsilon: float = 1e-12,
) -> RestrictedStats:
    """Derive the restricted moments from the six pair dot products.

    ``qb`` is the (integer-valued) size of R.  With an empty R every moment
    is undefined and the caller must treat the pair as no-overlap.
    """
    r_count = int(qb)
    if r_count == 0:
        nan = math.nan
        return RestrictedStats(0, nan, nan, nan, nan, None)
    mu_i = zb / qb
    mu_j = bz / qb
    var_i = max(xb / qb - mu_i * mu_i, 0.0)
    var_j = max(bx / qb - mu_j * mu_j, 0.0)
    q: float | None
    if var_i <= epsilon or var_j <= epsilon:
        q = None
    else:
        q = (qz / qb - mu_i * mu_j) / math.sqrt(var_i * var_j)
        q = min(max(q, -1.0), 1.0)
    return RestrictedStats(r_count, mu_i, mu_j, var_i, var_j, q)


def complete_sqdist(q: float, m: int) -> float:
    """Exact squared distance between two complete windows with correlation ``q``."""
    return max(2.0 * m * (1.0 - q), 0.0)


def one_missing_sqlb(
    stats: RestrictedStats,
    complete_is_i: bool,
    full_var_complete_side: float,
    epsilon: float = 1e-12,
) -> float:
    """Squared lower bound when exactly one window has gaps.

    The incomplete side's offset and scale are free, so only the complete
    window's variance lost outside R survives: |R| * (var over R) / (full
    var), shrunk by 1 - q^2 when the restricted correlation is positive.
    A constant complete window carries no shape and bounds to 0.
    """
    if full_var_complete_side <= epsilon:
        return 0.0
    vo = stats.var_i_r if complete_is_i else stats.var_j_r
    base = stats.r_count * vo / full_var_complete_side
    if stats.q is not None and stats.q > 0.0:
        base *= 1.0 - stats.q * stats.q
    return max(base, 0.0)


def variance_fraction_bound(
    mu_z: float,
    sigma_z: float,
    mu_b: float,
    bounds: CompletionBounds,
    var_over_r: float,
    epsilon: float = 1e-12,
) -> float:
    """Lower-bound the ratio (variance over R) / (full variance) for a window
    whose gaps may be filled with anything inside ``bounds``.

    The denominator is an upper bound on the completed window's variance;
    numerically degenerate denominators fall back to 0, which keeps the
    final distance bound admissible.
    """
    if mu_b <= 0.0:
        raise ValueError("window has no present values")
    c = bounds.v_max - bounds.v_min
    b = bounds.v_max * bounds.v_min
    a = bounds.v_max + bounds.v_min
    ur = mu_z / mu_b
    vr = (sigma_z * sigma_z + mu_z * mu_z) / mu_b - ur * ur
    denominator = mu_b * (vr + b + ur * (ur - a)) + c * c / 4.0
    if denominator <= epsilon:
        return 0.0
    return max(var_over_r, 0.0) / denominator


def both_missing_sqlb(stats: RestrictedStats, f_i: float, f_j: float) -> float:
    """Squared lower bound when both windows have gaps."""
    base = stats.r_count * max(f_i, f_j)
    if stats.q is not None and stats.q > 0.0:
        base *= 1.0 - stats.q * stats.q
    return max(base, 0.0)


def _completion_bounds(w: WindowSummary, config: EngineConfig) -> CompletionBounds:
    if config.value_bounds_override is not None:
        lo, hi = config.value_bounds_override
        return CompletionBounds(lo, hi)
    return CompletionBounds(w.vmin, w.vmax)


def lb_sqdist(
    dots: tuple[float, float, float, float, float, float],
    wi: WindowSummary,
    wj: WindowSummary,
    config: EngineConfig,
) -> tuple[float, CaseLabel]:
    """Dispatch one window pair to the applicable (squared) bound.

    ``dots`` holds QZ, QB, BZ, ZB, BX, XB for the pair.  Both windows
    complete gives the exact distance; one incomplete, the variance-ratio
    bound on the complete side; both incomplete, the completion-bounded
    variance bound.  Degenerate pairs resolve to 0 or, for all-missing
    windows under the flag policy, to NaN.
    """
    qz, qb, bz, zb, bx, xb = dots
    m = config.m
    eps = config.epsilon
    if wi.mu_b == 0.0 or wj.mu_b == 0.0:
        if config.all_missing_policy is AllMissingPolicy.FLAG_INVALID:
            return math.nan, CaseLabel.ALL_MISSING
        return 0.0, CaseLabel.ALL_MISSING
    if qb == 0.0:
        return 0.0, CaseLabel.NO_OVERLAP
    stats = restricted_stats(qz, qb, bz, zb, bx, xb, eps)
    if qb == m:
        if stats.q is None:
            both_const = stats.var_i_r <= eps and stats.var_j_r <= eps
            return (0.0 if both_const else 2.0 * m), CaseLabel.COMPLETE
        return complete_sqdist(stats.q, m), CaseLabel.COMPLETE
    if wi.mu_b == 1.0 or wj.mu_b == 1.0:
        complete_is_i = wi.mu_b == 1.0
        full_var = (wi if complete_is_i else wj).sigma_z ** 2
        return (
            one_missing_sqlb(stats, complete_is_i, full_var, eps),
            CaseLabel.ONE_MISSING,
        )
    f_i = variance_fraction_bound(
        wi.mu_z, wi.sigma_z, wi.mu_b, _completion_bounds(wi, config), stats.var_i_r, eps
    )
    f_j = variance_fraction_bound(
        wj.mu_z, wj.sigma_z, wj.mu_b, _completion_bounds(wj, config), stats.var_j_r, eps
    )
    return both_missing_sqlb(stats, f_i, f_j), CaseLabel.BOTH_MISSING


def lb_sqdist_windows(
    window_a: np.ndarray, window_b: np.ndarray, config: EngineConfig
) -> tuple[float, CaseLabel]:
    """Bound a raw window pair, computing dot products and stats directly."""
    a = np.asarray(window_a, dtype=np.float64)
    b = np.asarray(window_b, dtype=np.float64)
    if a.size != config.m or b.size != config.m:
        raise ValueError("window lengths must equal config.m")
    pa = ~np.isnan(a)
    pb = ~np.isnan(b)
    za = np.where(pa, a, 0.0)
    zb_v = np.where(pb, b, 0.0)
    ba = pa.astype(np.float64)
    bb = pb.astype(np.float64)
    dots = (
        float(za @ zb_v),
        float(ba @ bb),
        float(ba @ zb_v),
        float(za @ bb),
        float(ba @ (zb_v * zb_v)),
        float((za * za) @ bb),
    )
    return lb_sqdist(dots, window_summary(a), window_summary(b), config)


# ---------------------------------------------------------------------------
# sampling oracle


def _normalize_or_none(row: np.ndarray) -> np.ndarray | None:
    mu = row.mean()
    sigma = math.sqrt(max(float((row * row).mean()) - mu * mu, 0.0))
    if sigma == 0.0:
        return None
    return (row - mu) / sigma


def oracle_min_distance(
    window_a: np.ndarray,
    window_b: np.ndarray,
    bounds_a: CompletionBounds,
    bounds_b: CompletionBounds,
    samples: int,
    seed: int,
) -> float:
    """Smallest exact squared distance seen over sampled gap completions.

    Each sample fills the gaps of both windows uniformly within their
    bounds and evaluates the exact z-normalized squared distance.  When
    exactly one window has gaps its offset and scale are unconstrained, so
    the distance is instead minimized over all affine renormalizations of
    that side in closed form.  Deterministic for a fixed seed, and for a
    fixed seed the result is non-increasing in ``samples``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a = np.asarray(window_a, dtype=np.float64)
    b = np.asarray(window_b, dtype=np.float64)
    if a.size != b.size:
        raise ValueError("windows must share a length")
    m = a.size
    miss_a = np.isnan(a)
    miss_b = np.isnan(b)
    ka = int(miss_a.sum())
    kb = int(miss_b.sum())

    if ka == 0 and kb == 0:
        return _exact_pair_sqdist(a, b)

    rng = np.random.default_rng(seed)
    u = rng.random((samples, ka + kb))
    filled_a = np.broadcast_to(np.where(miss_a, 0.0, a), (samples, m)).copy()
    filled_b = np.broadcast_to(np.where(miss_b, 0.0, b), (samples, m)).copy()
    if ka:
        filled_a[:, miss_a] = bounds_a.v_min + u[:, :ka] * (bounds_a.v_max - bounds_a.v_min)
    if kb:
        filled_b[:, miss_b] = bounds_b.v_min + u[:, ka:] * (bounds_b.v_max - bounds_b.v_min)

    if (ka == 0) != (kb == 0):
        fixed = a if ka == 0 else b
        free_rows = filled_b if ka == 0 else filled_a
        return _min_affine_sqdist(fixed, free_rows)

    za, const_a = _normalize_rows(filled_a)
    zbn, const_b = _normalize_rows(filled_b)
    d2 = ((za - zbn) ** 2).sum(axis=1)
    d2[const_a ^ const_b] = 2.0 * m
    d2[const_a & const_b] = 0.0
    return float(d2.min())


def _normalize_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Z-normalize each row; constant rows come back zeroed and flagged."""
    mu = rows.mean(axis=1, keepdims=True)
    var = np.maximum((rows * rows).mean(axis=1, keepdims=True) - mu * mu, 0.0)
    const = var[:, 0] == 0.0
    sigma = np.sqrt(var)
    sigma[const] = 1.0
    out = (rows - mu) / sigma
    out[const] = 0.0
    return out, const


def _exact_pair_sqdist(a: np.ndarray, b: np.ndarray) -> float:
    za = _normalize_or_none(a)
    zb = _normalize_or_none(b)
    if za is None and zb is None:
        return 0.0
    if za is None or zb is None:
        # constant against non-constant: correlation is taken as zero
        return 2.0 * a.size
    diff = za - zb
    return float(diff @ diff)


def _min_affine_sqdist(fixed: np.ndarray, free_rows: np.ndarray) -> float:
    """Min over completions and over affine maps of the free side.

    For each filled row x the minimum of sum((alpha*x + beta - zfix)^2) over
    beta and alpha > 0 is m*(1 - rho^2) for positive correlation rho, else m.
    """
    m = fixed.size
    zfix = _normalize_or_none(fixed)
    if zfix is None:
        # a constant fixed side admits bound 0 upstream; any completion works
        return 0.0 if np.any(np.all(free_rows == free_rows[:, :1], axis=1)) else 2.0 * m
    mu = free_rows.mean(axis=1)
    var = np.maximum((free_rows * free_rows).mean(axis=1) - mu * mu, 0.0)
    cov = (free_rows @ zfix) / m
    rho_sq = np.zeros_like(cov)
    ok = (var > 0.0) & (cov > 0.0)
    rho_sq[ok] = np.minimum(cov[ok] * cov[ok] / var[ok], 1.0)
    return float((m * (1.0 - rho_sq)).min())
