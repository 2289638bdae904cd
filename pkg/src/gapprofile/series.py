"""Series container, CSV ingestion, and per-window statistics.

A series is stored as a float64 vector in which NaN marks a missing
observation.  Everything downstream (auxiliary vectors, window statistics,
the profile engine) is derived from this one representation.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AllMissingPolicy",
    "AuxiliarySeries",
    "CsvLayout",
    "EngineConfig",
    "InfeasibleMaskError",
    "MissingValueSeries",
    "SeriesLengthError",
    "SeriesParseError",
    "WindowError",
    "WindowStats",
    "build_auxiliary",
    "compute_window_stats",
    "format_series",
    "parse_series",
    "read_series",
    "sliding_extrema",
    "sliding_mean_std",
]

_MISSING_TOKENS = frozenset({"", "nan"})


class SeriesParseError(ValueError):
    """A record in the input text could not be read as a value."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SeriesLengthError(ValueError):
    """The input holds fewer than two records."""


class WindowError(ValueError):
    """The window length is infeasible for the series."""


class InfeasibleMaskError(ValueError):
    """A mask specification cannot be applied to the series."""


@dataclass(frozen=True)
class MissingValueSeries:
    """An ordered sequence of real values where NaN marks a missing point.

    Parameters
    ----------
    values : array_like
        One-dimensional data; NaN entries are missing.  Infinities are
        rejected.  At least two points are required.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if arr.size < 2:
            raise SeriesLengthError(
                f"series needs at least 2 points, got {arr.size}"
            )
        if np.isinf(arr).any():
            raise ValueError("series may not contain infinities")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def missing_count(self) -> int:
        return int(np.isnan(self.values).sum())

    @property
    def is_complete(self) -> bool:
        return self.missing_count == 0

    def window(self, start: int, m: int) -> np.ndarray:
        """Read-only view of the length-``m`` window starting at ``start``."""
        return self.values[start : start + m]


@dataclass(frozen=True)
class AuxiliarySeries:
    """Zero-filled values ``z``, their squares ``x``, presence bits ``bind``."""

    z: np.ndarray
    x: np.ndarray
    bind: np.ndarray

    def __post_init__(self):
        for name in ("z", "x", "bind"):
            getattr(self, name).setflags(write=False)


def build_auxiliary(series: MissingValueSeries) -> AuxiliarySeries:
    """Derive the three helper vectors used by the rolling dot products."""
    present = series.present_mask
    z = np.where(present, series.values, 0.0)
    return AuxiliarySeries(z=z, x=z * z, bind=present.astype(np.float64))


@dataclass(frozen=True)
class WindowStats:
    """Per-window statistics for every window of length ``m``.

    ``mu_z``/``sigma_z`` are population mean/std of the zero-filled values,
    ``mu_b``/``sigma_b`` of the presence indicator.  ``vmax``/``vmin`` are
    extrema over the present values only, NaN where a window has none.
    ``sigma_b`` is kept for completeness; nothing downstream consumes it.
    """

    mu_z: np.ndarray
    sigma_z: np.ndarray
    mu_b: np.ndarray
    sigma_b: np.ndarray
    vmax: np.ndarray
    vmin: np.ndarray

    @property
    def window_count(self) -> int:
        return self.mu_z.size


class AllMissingPolicy(enum.Enum):
    """How pairs involving an entirely-missing window are bounded."""

    BOUND_ZERO = "zero"
    FLAG_INVALID = "flag"


@dataclass(frozen=True)
class EngineConfig:
    """Profile engine settings.

    Parameters
    ----------
    m : int
        Window length, at least 3 and at most half the series length.
    exclusion_divisor : int
        Half-width of the trivial-match exclusion zone is
        ``m // exclusion_divisor``.
    value_bounds_override : (float, float), optional
        Global completion bounds (e.g. physical sensor limits).  When unset,
        each window's own present-value range is used.
    epsilon : float
        Degeneracy tolerance for variance tests.
    all_missing_policy : AllMissingPolicy or str
        ``"zero"`` bounds pairs with an all-missing window by 0;
        ``"flag"`` marks them invalid instead.
    """

    m: int
    exclusion_divisor: int = 4
    value_bounds_override: tuple[float, float] | None = None
    epsilon: float = 1e-12
    all_missing_policy: AllMissingPolicy = AllMissingPolicy.BOUND_ZERO

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise ValueError(f"window length must be an integer >= 3, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if int(self.exclusion_divisor) != self.exclusion_divisor or self.exclusion_divisor < 1:
            raise ValueError("exclusion_divisor must be a positive integer")
        object.__setattr__(self, "exclusion_divisor", int(self.exclusion_divisor))
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if isinstance(self.all_missing_policy, str):
            object.__setattr__(
                self, "all_missing_policy", AllMissingPolicy(self.all_missing_policy)
            )
        if self.value_bounds_override is not None:
            lo, hi = self.value_bounds_override
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"invalid value bounds ({lo}, {hi})")
            object.__setattr__(self, "value_bounds_override", (float(lo), float(hi)))

    @property
    def exclusion_halfwidth(self) -> int:
        return self.m // self.exclusion_divisor

    def validate_for(self, n: int) -> None:
        """Reject window lengths leaving no room for a non-trivial pair."""
        if self.m > n / 2:
            raise WindowError(
                f"window length {self.m} exceeds half the series length {n}"
            )


# ---------------------------------------------------------------------------
# parsing / formatting


@dataclass(frozen=True)
class CsvLayout:
    """Shape of the CSV a series was read from, for faithful write-back."""

    header: tuple[str, ...] | None = None
    timestamps: tuple[str, ...] | None = None


def _parse_value(token: str, line: int) -> float:
    text = token.strip()
    if text.lower() in _MISSING_TOKENS:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        raise SeriesParseError(f"cannot read {token!r} as a number", line) from None
    if math.isinf(value):
        raise SeriesParseError(f"non-finite value {token!r}", line)
    if math.isnan(value):
        # covers exotic spellings float() accepts, e.g. "+nan"
        return math.nan
    return value


def _looks_numeric(token: str) -> bool:
    text = token.strip()
    if text.lower() in _MISSING_TOKENS:
        return True
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_series(text: str) -> tuple[MissingValueSeries, CsvLayout]:
    """Parse CSV text into a series plus the layout needed to write it back.

    Accepts one value per record or (timestamp, value) pairs; a leading row
    whose value field is not numeric is treated as a header.  Missing values
    are empty fields or any casing of "NaN".

    Raises
    ------
    SeriesParseError
        For malformed tokens (with the offending line number).
    SeriesLengthError
        When fewer than two records remain after the header.
    """
    rows = list(csv.reader(io.StringIO(text)))
    header: tuple[str, ...] | None = None
    start = 0
    if rows:
        first = rows[0]
        if first and not _looks_numeric(first[-1]):
            header = tuple(first)
            start = 1

    values: list[float] = []
    stamps: list[str] = []
    has_stamps = False
    for offset, row in enumerate(rows[start:]):
        line = start + offset + 1
        if not row:
            # a blank line is one missing record
            values.append(math.nan)
            stamps.append("")
            continue
        if len(row) == 1:
            values.append(_parse_value(row[0], line))
            stamps.append("")
        elif len(row) == 2:
            has_stamps = True
            stamps.append(row[0])
            values.append(_parse_value(row[1], line))
        else:
            raise SeriesParseError(f"expected 1 or 2 fields, got {len(row)}", line)

    if len(values) < 2:
        raise SeriesLengthError(f"need at least 2 records, got {len(values)}")

    layout = CsvLayout(
        header=header, timestamps=tuple(stamps) if has_stamps else None
    )
    return MissingValueSeries(np.array(values)), layout


def parse_series(text: str) -> MissingValueSeries:
    """Parse CSV text into a :class:`MissingValueSeries`."""
    return read_series(text)[0]


def format_series(series: MissingValueSeries, layout: CsvLayout | None = None) -> str:
    """Render a series back to CSV in the given layout.

    Present values use their shortest round-tripping decimal form, missing
    values an empty field.
    """
    layout = layout or CsvLayout()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if layout.header is not None:
        writer.writerow(layout.header)
    for i, v in enumerate(series.values):
        text = "" if math.isnan(v) else repr(float(v))
        if layout.timestamps is not None:
            writer.writerow([layout.timestamps[i], text])
        else:
            writer.writerow([text])
    return out.getvalue()


# ---------------------------------------------------------------------------
# sliding statistics


def sliding_mean_std(values: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Population mean and std of every length-``m`` window, in one pass.

    Prefix sums are accumulated in extended precision so that drift over
    long series stays well below test tolerances.
    """
    v = np.asarray(values, dtype=np.float64)
    if not 1 <= m <= v.size:
        raise WindowError(f"window length {m} invalid for {v.size} values")
    if m == 1:
        return v.copy(), np.zeros_like(v)
    ext = v.astype(np.longdouble)
    acc = np.cumsum(ext)
    acc2 = np.cumsum(ext * ext)
    sums = acc[m - 1 :].copy()
    sums[1:] -= acc[: v.size - m]
    sums2 = acc2[m - 1 :].copy()
    sums2[1:] -= acc2[: v.size - m]
    means = sums / m
    variances = np.maximum(sums2 / m - means * means, 0.0)
    return (
        means.astype(np.float64),
        np.sqrt(variances).astype(np.float64),
    )


def sliding_extrema(
    series: MissingValueSeries | np.ndarray, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Max and min over the present values of every length-``m`` window.

    Monotonic-deque scan, linear time.  Windows containing no present value
    yield NaN in both outputs.
    """
    values = series.values if isinstance(series, MissingValueSeries) else np.asarray(series)
    n = values.size
    if not 1 <= m <= n:
        raise WindowError(f"window length {m} invalid for {n} values")
    count = n - m + 1
    vmax = np.full(count, np.nan)
    vmin = np.full(count, np.nan)
    maxq: deque[int] = deque()
    minq: deque[int] = deque()
    for t in range(n):
        v = values[t]
        if not math.isnan(v):
            while maxq and values[maxq[-1]] <= v:
                maxq.pop()
            maxq.append(t)
            while minq and values[minq[-1]] >= v:
                minq.pop()
            minq.append(t)
        start = t - m + 1
        if start < 0:
            continue
        while maxq and maxq[0] < start:
            maxq.popleft()
        while minq and minq[0] < start:
            minq.popleft()
        if maxq:
            vmax[start] = values[maxq[0]]
            vmin[start] = values[minq[0]]
    return vmax, vmin


def compute_window_stats(
    series: MissingValueSeries,
    m: int,
    aux: AuxiliarySeries | None = None,
) -> WindowStats:
    """All per-window statistics the distance computations draw on."""
    if aux is None:
        aux = build_auxiliary(series)
    mu_z, sigma_z = sliding_mean_std(aux.z, m)
    mu_b, sigma_b = sliding_mean_std(aux.bind, m)
    vmax, vmin = sliding_extrema(series, m)
    return WindowStats(
        mu_z=mu_z, sigma_z=sigma_z, mu_b=mu_b, sigma_b=sigma_b, vmax=vmax, vmin=vmin
    )
