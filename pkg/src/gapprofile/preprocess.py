"""Imputation, artifact screening, and mask synthesis.

Artifact screening marks suspect points as missing so the profile engine
bounds them instead of trusting them; it never restores a point.  Mask
synthesis deletes points from (usually complete) series to build test
inputs with known ground truth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .series import InfeasibleMaskError, MissingValueSeries

_DEFAULT_VARIANCE_WINDOW = 16


@dataclass(frozen=True)
class PseudoMissingRules:
    """Thresholds for treating recorded points as unreliable.

    ``variance_window`` of None means use the default rolling width; a
    caller that knows the profile window length should pass it instead.
    """

    spike_mad_factor: float = 8.0
    plateau_min_run: int = 16
    variance_window: int | None = None
    variance_factor: float = 6.0
    detect_spikes: bool = True
    detect_plateaus: bool = True
    detect_variance_bursts: bool = True

    def __post_init__(self) -> None:
        if not self.spike_mad_factor > 0:
            raise ValueError("spike_mad_factor must be positive")
        if self.plateau_min_run < 2:
            raise ValueError("plateau_min_run must be at least 2")
        if self.variance_window is not None and self.variance_window < 2:
            raise ValueError("variance_window must be at least 2")
        if not self.variance_factor > 0:
            raise ValueError("variance_factor must be positive")


class MaskMode(enum.Enum):
    RANDOM_POINTS = "random"
    UNIFORM_BLOCKS = "blocks"
    TARGETED_BLOCK = "block"


@dataclass(frozen=True)
class MaskSpec:
    """Recipe for deleting points from a series.

    ``random`` removes ``count`` present points (or ``fraction`` of the
    length), chosen without replacement.  ``blocks`` removes ``count``
    disjoint blocks of ``block_length`` points, evenly spaced with seeded
    jitter; with ``fraction`` the block count is chosen to delete about
    that share of the series.  ``block`` removes one run of
    ``block_length`` points centered on ``target``.
    """

    mode: MaskMode
    count: int | None = None
    fraction: float | None = None
    block_length: int | None = None
    target: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        mode = self.mode
        if isinstance(mode, str):
            mode = MaskMode(mode)
            object.__setattr__(self, "mode", mode)
        if self.count is not None and self.fraction is not None:
            raise ValueError("give either count or fraction, not both")
        if self.count is not None and self.count < 1:
            raise ValueError("count must be positive")
        if self.fraction is not None and not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must be strictly between 0 and 1")
        if mode is MaskMode.RANDOM_POINTS:
            if self.count is None and self.fraction is None:
                raise ValueError("random mode needs count or fraction")
            if self.block_length is not None or self.target is not None:
                raise ValueError("random mode takes no block_length or target")
        else:
            if self.block_length is None or self.block_length < 1:
                raise ValueError("block modes need a positive block_length")
            if mode is MaskMode.UNIFORM_BLOCKS:
                if self.count is None and self.fraction is None:
                    raise ValueError("blocks mode needs count or fraction")
                if self.target is not None:
                    raise ValueError("blocks mode takes no target")
            else:
                if self.count is not None or self.fraction is not None:
                    raise ValueError("targeted block takes no count or fraction")
                if self.target is None:
                    raise ValueError("targeted block needs a target position")


def linear_impute(series: MissingValueSeries) -> MissingValueSeries:
    """Fill missing points by linear interpolation between present ones.

    Leading and trailing gaps copy the nearest present value.  Complete
    input is returned unchanged, so the operation is idempotent.
    """
    values = series.values
    missing = np.isnan(values)
    if not missing.any():
        return series
    present_idx = np.flatnonzero(~missing)
    if present_idx.size == 0:
        raise ValueError("cannot impute a series with no present values")
    filled = values.copy()
    filled[missing] = np.interp(
        np.flatnonzero(missing), present_idx, values[present_idx]
    )
    return MissingValueSeries(filled)


def _mark_spikes(values: np.ndarray, present: np.ndarray, rules: PseudoMissingRules,
                 mark: np.ndarray) -> None:
    held = values[present]
    center = np.median(held)
    mad = np.median(np.abs(held - center))
    if mad <= 0.0:
        return
    padded = np.full(values.size + 4, np.nan)
    padded[2:-2] = values
    neighborhoods = np.lib.stride_tricks.sliding_window_view(padded, 5)
    local_median = np.nanmedian(neighborhoods[present], axis=1)
    spiky = np.abs(values[present] - local_median) > rules.spike_mad_factor * mad
    mark[np.flatnonzero(present)[spiky]] = True


def _mark_plateaus(values: np.ndarray, present: np.ndarray, rules: PseudoMissingRules,
                   mark: np.ndarray) -> None:
    if values.size < rules.plateau_min_run:
        return
    changed = np.ones(values.size, dtype=bool)
    # NaN != NaN, so missing points break runs on their own.
    changed[1:] = ~(values[1:] == values[:-1])
    run_id = np.cumsum(changed) - 1
    run_lengths = np.bincount(run_id)
    in_long_run = run_lengths[run_id] >= rules.plateau_min_run
    mark[in_long_run & present] = True


def _mark_variance_bursts(values: np.ndarray, present: np.ndarray,
                          rules: PseudoMissingRules, mark: np.ndarray) -> None:
    w = rules.variance_window or _DEFAULT_VARIANCE_WINDOW
    n = values.size
    if n < w:
        return
    z = np.where(present, values, 0.0)
    ones = np.ones(w)
    cnt = np.convolve(present.astype(np.float64), ones, mode="valid")
    sz = np.convolve(z, ones, mode="valid")
    sx = np.convolve(z * z, ones, mode="valid")
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = sz / cnt
        var = np.clip(sx / cnt - mean * mean, 0.0, None)
    var[cnt < 2] = np.nan
    if np.isnan(var).all():
        return
    typical = np.nanmedian(var)
    if not typical > 0.0:
        return
    starts = np.flatnonzero(var > rules.variance_factor * typical)
    if starts.size == 0:
        return
    coverage = np.zeros(n + 1, dtype=np.int64)
    np.add.at(coverage, starts, 1)
    np.add.at(coverage, starts + w, -1)
    covered = np.cumsum(coverage[:-1]) > 0
    mark[covered & present] = True


def mark_pseudo_missing(series: MissingValueSeries,
                        rules: PseudoMissingRules | None = None) -> MissingValueSeries:
    """Mark spikes, frozen plateaus, and variance bursts as missing.

    Points that are already missing stay missing; no rule ever restores a
    point.  Returns the input unchanged when nothing is flagged.
    """
    if rules is None:
        rules = PseudoMissingRules()
    values = series.values
    present = ~np.isnan(values)
    if not present.any():
        return series
    mark = np.zeros(values.size, dtype=bool)
    if rules.detect_spikes:
        _mark_spikes(values, present, rules, mark)
    if rules.detect_plateaus:
        _mark_plateaus(values, present, rules, mark)
    if rules.detect_variance_bursts:
        _mark_variance_bursts(values, present, rules, mark)
    if not mark.any():
        return series
    out = values.copy()
    out[mark] = np.nan
    return MissingValueSeries(out)


def _resolve_point_count(spec: MaskSpec, n: int) -> int:
    if spec.count is not None:
        return spec.count
    return int(round(spec.fraction * n))


def _resolve_block_count(spec: MaskSpec, n: int) -> int:
    if spec.count is not None:
        return spec.count
    return int(round(spec.fraction * n / spec.block_length))


def apply_mask(series: MissingValueSeries, spec: MaskSpec) -> MissingValueSeries:
    """Delete points from ``series`` according to ``spec``.

    Random mode deletes exactly the requested number of present points.
    Block modes delete exact position ranges, whether or not points there
    were already missing.  Raises :class:`InfeasibleMaskError` when the
    request cannot be met exactly.
    """
    values = series.values.copy()
    n = values.size
    rng = np.random.default_rng(spec.seed)
    if spec.mode is MaskMode.RANDOM_POINTS:
        count = _resolve_point_count(spec, n)
        candidates = np.flatnonzero(~np.isnan(values))
        if count > candidates.size:
            raise InfeasibleMaskError(
                f"cannot mask {count} points, only {candidates.size} present"
            )
        chosen = rng.choice(candidates, size=count, replace=False)
        values[chosen] = np.nan
    elif spec.mode is MaskMode.UNIFORM_BLOCKS:
        blocks = _resolve_block_count(spec, n)
        p = spec.block_length
        if blocks < 1:
            raise InfeasibleMaskError("mask resolves to zero blocks")
        segment = n // blocks
        if segment < p:
            raise InfeasibleMaskError(
                f"{blocks} blocks of {p} points do not fit in {n} points"
            )
        for k in range(blocks):
            start = k * segment + int(rng.integers(0, segment - p + 1))
            values[start:start + p] = np.nan
    else:
        p = spec.block_length
        start = spec.target - p // 2
        if start < 0 or start + p > n:
            raise InfeasibleMaskError(
                f"block of {p} at {spec.target} falls outside the series"
            )
        values[start:start + p] = np.nan
    return MissingValueSeries(values)
