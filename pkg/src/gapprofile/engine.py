"""Rolling scan that produces lower-bound matrix profiles.

The scan keeps six sliding dot products between one anchored window and
every other window, advances them in O(1) per pair, and dispatches each
pair to the exact or lower-bound distance through
:mod:`gapprofile._kernels`.  Work is split into fixed anchor blocks so
results are bitwise identical for any thread count: each block starts
from freshly initialized dot rows and partial profiles are merged in
block order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bounds import CaseLabel, CompletionBounds, variance_fraction_bound, window_summary
from .series import (
    AuxiliarySeries,
    EngineConfig,
    MissingValueSeries,
    WindowStats,
    AllMissingPolicy,
    build_auxiliary,
    compute_window_stats,
    sliding_mean_std,
)

BLOCK_ANCHORS = 4096

# Hard cap on brute-force pair work, in window-element multiplications.
_BRUTE_OP_LIMIT = 1_000_000_000


def sliding_dot(query: np.ndarray, haystack: np.ndarray) -> np.ndarray:
    """Dot product of ``query`` against every window of ``haystack``."""
    query = np.asarray(query, dtype=np.float64)
    haystack = np.asarray(haystack, dtype=np.float64)
    if query.ndim != 1 or haystack.ndim != 1:
        raise ValueError("inputs must be one-dimensional")
    if query.size == 0 or query.size > haystack.size:
        raise ValueError("query length must be in [1, len(haystack)]")
    return np.correlate(haystack, query, mode="valid")


@dataclass
class DotProductRow:
    """Six dot-product vectors for one anchor window, plus frozen anchor-0
    rows used to restore entry 0 after each in-place roll.

    ``qb`` stays integer-valued in float64 throughout the rolls, so
    comparisons against 0 and m are exact.
    """

    anchor: int
    m: int
    qz: np.ndarray
    qb: np.ndarray
    bz: np.ndarray
    zb: np.ndarray
    bx: np.ndarray
    xb: np.ndarray
    qz_first: np.ndarray = field(repr=False)
    qb_first: np.ndarray = field(repr=False)
    bz_first: np.ndarray = field(repr=False)
    zb_first: np.ndarray = field(repr=False)
    bx_first: np.ndarray = field(repr=False)
    xb_first: np.ndarray = field(repr=False)

    @property
    def window_count(self) -> int:
        return self.qz.size


def _six_dots(aux: AuxiliarySeries, m: int, anchor: int) -> tuple[np.ndarray, ...]:
    z, b, x = aux.z, aux.bind, aux.x
    zq = z[anchor:anchor + m]
    bq = b[anchor:anchor + m]
    xq = x[anchor:anchor + m]
    return (
        sliding_dot(zq, z),
        sliding_dot(bq, b),
        sliding_dot(bq, z),
        sliding_dot(zq, b),
        sliding_dot(bq, x),
        sliding_dot(xq, b),
    )


def init_dot_products(
    aux: AuxiliarySeries,
    m: int,
    anchor: int = 0,
    _first_rows: tuple[np.ndarray, ...] | None = None,
) -> DotProductRow:
    """Build the dot rows for ``anchor`` by direct sliding dot products.

    ``_first_rows`` lets a caller that scans many blocks share one copy of
    the anchor-0 rows instead of recomputing them per block.
    """
    if m < 1 or m > aux.z.size:
        raise ValueError("window length out of range")
    if anchor < 0 or anchor > aux.z.size - m:
        raise ValueError("anchor out of range")
    firsts = _first_rows if _first_rows is not None else _six_dots(aux, m, 0)
    rows = _six_dots(aux, m, anchor) if anchor != 0 else tuple(r.copy() for r in firsts)
    return DotProductRow(anchor, m, *rows, *firsts)


def update_dot_row(row: DotProductRow, aux: AuxiliarySeries) -> None:
    """Advance ``row`` to the next anchor in place, O(window count)."""
    nxt = row.anchor + 1
    if nxt >= row.window_count:
        raise ValueError("already at the final anchor")
    _kernels.roll_dot_rows(
        row.qz, row.qb, row.bz, row.zb, row.bx, row.xb,
        aux.z, aux.bind, aux.x,
        row.qz_first, row.qb_first, row.bz_first,
        row.zb_first, row.bx_first, row.xb_first,
        nxt, row.m,
    )
    row.anchor = nxt


@dataclass(frozen=True)
class _DispatchTables:
    """Per-window quantities the distance kernel reads for every pair."""

    m: int
    eps: float
    ams_value: float
    complete: np.ndarray
    empty: np.ndarray
    inv_full_var: np.ndarray
    inv_den3: np.ndarray


def _dispatch_tables(stats: WindowStats, config: EngineConfig) -> _DispatchTables:
    eps = config.epsilon
    var = stats.sigma_z ** 2
    mu_b = stats.mu_b
    # Means of the indicator are exact quotients count/m, so these float
    # comparisons recover the integer facts exactly.
    complete = mu_b == 1.0
    empty = mu_b == 0.0

    inv_full_var = np.zeros_like(var)
    ok = complete & (var > eps)
    inv_full_var[ok] = 1.0 / var[ok]

    if config.value_bounds_override is not None:
        lo = np.full_like(var, config.value_bounds_override[0])
        hi = np.full_like(var, config.value_bounds_override[1])
    else:
        lo, hi = stats.vmin, stats.vmax
    with np.errstate(divide="ignore", invalid="ignore"):
        ur = stats.mu_z / mu_b
        vr = (var + stats.mu_z ** 2) / mu_b - ur ** 2
        spread = hi - lo
        den = mu_b * (vr + hi * lo + ur * (ur - (hi + lo))) + 0.25 * spread * spread
        inv_den3 = 1.0 / den
    bad = ~(den > eps)
    inv_den3[bad] = 0.0

    ams = np.nan if config.all_missing_policy is AllMissingPolicy.FLAG_INVALID else 0.0
    return _DispatchTables(config.m, eps, ams, complete, empty, inv_full_var, inv_den3)


def _row_distances(
    row: DotProductRow,
    tables: _DispatchTables,
    out_d: np.ndarray,
    out_label: np.ndarray,
) -> None:
    i = row.anchor
    _kernels.lb_distance_row(
        row.qz, row.qb, row.bz, row.zb, row.bx, row.xb,
        float(tables.m), tables.eps,
        tables.complete, tables.empty, tables.inv_full_var, tables.inv_den3,
        bool(tables.complete[i]), bool(tables.empty[i]),
        float(tables.inv_full_var[i]), float(tables.inv_den3[i]),
        tables.ams_value, out_d, out_label,
    )


def calculate_lb_distance_profile(
    row: DotProductRow,
    stats: WindowStats,
    config: EngineConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Squared distance bounds and case labels from one anchor to all windows."""
    tables = _dispatch_tables(stats, config)
    d = np.empty(row.window_count)
    labels = np.empty(row.window_count, dtype=np.uint8)
    _row_distances(row, tables, d, labels)
    return d, labels


def apply_exclusion_zone(distances: np.ndarray, anchor: int, config: EngineConfig) -> None:
    """Mark the trivial-match zone around ``anchor`` as non-candidates."""
    w = config.exclusion_halfwidth
    lo = max(anchor - w, 0)
    distances[lo:anchor + w + 1] = np.inf


@dataclass(frozen=True)
class LowerBoundMatrixProfile:
    """Nearest-neighbor distance bounds, one entry per window position.

    ``values`` hold distances (square roots, not squares), NaN where no
    valid pairing exists.  ``index`` holds the matched window start, -1
    where invalid.  ``labels`` hold the distance-case code of the matched
    pair (:class:`CaseLabel` values), 0 where invalid.
    """

    values: np.ndarray
    index: np.ndarray
    labels: np.ndarray
    m: int
    exclusion_halfwidth: int

    def __post_init__(self) -> None:
        for arr in (self.values, self.index, self.labels):
            arr.setflags(write=False)

    @property
    def window_count(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


def _block_ranges(window_count: int) -> list[tuple[int, int]]:
    return [
        (start, min(start + BLOCK_ANCHORS, window_count))
        for start in range(0, window_count, BLOCK_ANCHORS)
    ]


def _scan_block_general(
    aux: AuxiliarySeries,
    tables: _DispatchTables,
    config: EngineConfig,
    start: int,
    stop: int,
    first_rows: tuple[np.ndarray, ...],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    row = init_dot_products(aux, config.m, start, _first_rows=first_rows)
    count = row.window_count
    best = np.full(count, np.inf)
    index = np.full(count, -1, dtype=np.int64)
    label = np.zeros(count, dtype=np.uint8)
    d = np.empty(count)
    lab = np.empty(count, dtype=np.uint8)
    for i in range(start, stop):
        if i > start:
            update_dot_row(row, aux)
        _row_distances(row, tables, d, lab)
        apply_exclusion_zone(d, i, config)
        better = d < best
        best[better] = d[better]
        index[better] = i
        label[better] = lab[better]
    return best, index, label


def _scan_block_complete(
    z: np.ndarray,
    mu: np.ndarray,
    inv_sigma: np.ndarray,
    const_w: np.ndarray,
    config: EngineConfig,
    start: int,
    stop: int,
    qz_first: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, None]:
    m = config.m
    qz = qz_first.copy() if start == 0 else sliding_dot(z[start:start + m], z)
    count = qz.size
    best = np.full(count, np.inf)
    index = np.full(count, -1, dtype=np.int64)
    d = np.empty(count)
    for i in range(start, stop):
        if i > start:
            _kernels.roll_dot_row_single(qz, z, qz_first, i, m)
        _kernels.exact_distance_row(
            qz, float(m), mu, inv_sigma, const_w,
            float(mu[i]), float(inv_sigma[i]), bool(const_w[i]), d,
        )
        apply_exclusion_zone(d, i, config)
        better = d < best
        best[better] = d[better]
        index[better] = i
    return best, index, None


def _merge_partials(partials: list[tuple]) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    best, index, label = partials[0]
    for cand, cand_idx, cand_lab in partials[1:]:
        take = (cand < best) | ((cand == best) & (cand_idx >= 0) & (cand_idx < index))
        best[take] = cand[take]
        index[take] = cand_idx[take]
        if label is not None:
            label[take] = cand_lab[take]
    return best, index, label


def _finalize(
    best: np.ndarray,
    index: np.ndarray,
    label: np.ndarray | None,
    empty_mask: np.ndarray | None,
    config: EngineConfig,
) -> LowerBoundMatrixProfile:
    if label is None:
        label = np.where(index >= 0, np.uint8(CaseLabel.COMPLETE), np.uint8(0))
    values = np.sqrt(np.clip(best, 0.0, None))
    invalid = ~np.isfinite(best)
    values[invalid] = np.nan
    index[invalid] = -1
    label[invalid] = 0
    if empty_mask is not None and config.all_missing_policy is AllMissingPolicy.FLAG_INVALID:
        values[empty_mask] = np.nan
        index[empty_mask] = -1
        label[empty_mask] = np.uint8(CaseLabel.ALL_MISSING)
    return LowerBoundMatrixProfile(
        values=values,
        index=index,
        labels=label.astype(np.uint8),
        m=config.m,
        exclusion_halfwidth=config.exclusion_halfwidth,
    )


def lower_bound_profile(
    series: MissingValueSeries,
    config: EngineConfig,
    threads: int = 1,
) -> LowerBoundMatrixProfile:
    """Full profile scan over every anchor, complete or not.

    On complete input this computes exact z-normalized distances; with
    missing values every entry is an admissible lower bound.  ``threads``
    never changes the result, only how blocks are scheduled.
    """
    config.validate_for(series.n)
    if not isinstance(threads, int) or threads < 1:
        raise ValueError("threads must be a positive integer")
    m = config.m
    count = series.n - m + 1
    blocks = _block_ranges(count)

    if series.is_complete:
        z = series.values
        mu, sigma = sliding_mean_std(z, m)
        var = sigma ** 2
        const_w = var <= config.epsilon
        inv_sigma = np.zeros_like(sigma)
        inv_sigma[~const_w] = 1.0 / sigma[~const_w]
        qz_first = sliding_dot(z[:m], z)

        def scan(block: tuple[int, int]):
            return _scan_block_complete(
                z, mu, inv_sigma, const_w, config, block[0], block[1], qz_first,
            )

        empty_mask = None
    else:
        aux = build_auxiliary(series)
        stats = compute_window_stats(series, m, aux)
        tables = _dispatch_tables(stats, config)
        first_rows = _six_dots(aux, m, 0)

        def scan(block: tuple[int, int]):
            return _scan_block_general(
                aux, tables, config, block[0], block[1], first_rows,
            )

        empty_mask = tables.empty

    if threads == 1 or len(blocks) == 1:
        partials = [scan(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(scan, blocks))
    best, index, label = _merge_partials(partials)
    return _finalize(best, index, label, empty_mask, config)


def exact_profile(series: MissingValueSeries, config: EngineConfig) -> LowerBoundMatrixProfile:
    """Exact matrix profile of a complete series; rejects missing values."""
    if not series.is_complete:
        raise ValueError("exact profile requires a series with no missing values")
    return lower_bound_profile(series, config)


def pairwise_sq_matrix(
    series: MissingValueSeries,
    config: EngineConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """All pairwise squared bounds and case labels, from explicit windows.

    Materializes the pairwise dot products with window matrices and
    dispatches the distance cases with array expressions, so it shares no
    arithmetic path with the scan kernels.  Quadratic memory; refuses
    inputs beyond a fixed work cap.  The exclusion zone is not applied.
    """
    config.validate_for(series.n)
    n, m = series.n, config.m
    if n * (n - m) * m > _BRUTE_OP_LIMIT:
        raise ValueError("input too large for brute-force reference")
    eps = config.epsilon
    aux = build_auxiliary(series)
    wz = np.lib.stride_tricks.sliding_window_view(aux.z, m)
    wb = np.lib.stride_tricks.sliding_window_view(aux.bind, m)
    wx = np.lib.stride_tricks.sliding_window_view(aux.x, m)
    count = wz.shape[0]

    qz = wz @ wz.T
    qb = wb @ wb.T
    zb = wz @ wb.T
    bz = zb.T
    xb = wx @ wb.T
    bx = xb.T

    summaries = [window_summary(series.values[i:i + m]) for i in range(count)]
    mu_b = np.array([s.mu_b for s in summaries])
    sig_full = np.array([s.sigma_z for s in summaries])
    var_full = sig_full ** 2
    complete_w = mu_b == 1.0
    empty_w = mu_b == 0.0

    inv_full_var = np.zeros(count)
    ok = complete_w & (var_full > eps)
    inv_full_var[ok] = 1.0 / var_full[ok]

    inv_den = np.zeros(count)
    for i, s in enumerate(summaries):
        if s.mu_b == 0.0:
            continue
        if config.value_bounds_override is not None:
            bounds = CompletionBounds(*config.value_bounds_override)
        else:
            bounds = CompletionBounds(s.vmin, s.vmax)
        inv_den[i] = variance_fraction_bound(s.mu_z, s.sigma_z, s.mu_b, bounds, 1.0, eps)

    with np.errstate(divide="ignore", invalid="ignore"):
        ui = zb / qb
        uj = bz / qb
        vi = np.clip(xb / qb - ui * ui, 0.0, None)
        vj = np.clip(bx / qb - uj * uj, 0.0, None)
        cov = qz / qb - ui * uj
        q = np.clip(cov / np.sqrt(vi * vj), -1.0, 1.0)
    defined = (vi > eps) & (vj > eps)

    two_m = 2.0 * m
    both_const = (vi <= eps) & (vj <= eps)
    d1 = np.where(defined, two_m * (1.0 - q), np.where(both_const, 0.0, two_m))

    comp_i = complete_w[:, None]
    comp_j = complete_w[None, :]
    damp = np.where(defined & (cov > 0.0), 1.0 - q * q, 1.0)
    vo = np.where(comp_i, vi, vj)
    inv_v = np.where(comp_i, inv_full_var[:, None], inv_full_var[None, :])
    d2 = np.clip(qb * vo * inv_v * damp, 0.0, None)

    frac = np.maximum(vi * inv_den[:, None], vj * inv_den[None, :])
    d3 = np.clip(qb * frac * damp, 0.0, None)

    case1 = comp_i & comp_j
    case2 = comp_i ^ comp_j
    dist = np.where(case1, d1, np.where(case2, d2, d3))
    label = np.where(
        case1, np.uint8(CaseLabel.COMPLETE),
        np.where(case2, np.uint8(CaseLabel.ONE_MISSING), np.uint8(CaseLabel.BOTH_MISSING)),
    )
    no_overlap = qb == 0.0
    dist = np.where(no_overlap, 0.0, dist)
    label = np.where(no_overlap, np.uint8(CaseLabel.NO_OVERLAP), label)
    pair_empty = empty_w[:, None] | empty_w[None, :]
    ams = np.nan if config.all_missing_policy is AllMissingPolicy.FLAG_INVALID else 0.0
    dist = np.where(pair_empty, ams, dist)
    label = np.where(pair_empty, np.uint8(CaseLabel.ALL_MISSING), label)
    return dist, label.astype(np.uint8)


def brute_force_profile(
    series: MissingValueSeries,
    config: EngineConfig,
) -> LowerBoundMatrixProfile:
    """Reference profile reduced from :func:`pairwise_sq_matrix`."""
    dist, label = pairwise_sq_matrix(series, config)
    count = dist.shape[0]
    empty_w = np.array(
        [np.isnan(series.values[i:i + config.m]).all() for i in range(count)]
    )
    offsets = np.arange(count)
    excluded = np.abs(offsets[:, None] - offsets[None, :]) <= config.exclusion_halfwidth
    dist = np.where(excluded | np.isnan(dist), np.inf, dist)

    index = np.argmin(dist, axis=0).astype(np.int64)
    best = dist[index, offsets]
    chosen = label[index, offsets].astype(np.uint8)
    return _finalize(best, index, chosen, empty_w, config)
