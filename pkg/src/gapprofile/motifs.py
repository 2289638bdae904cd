"""Ranked motif pairs extracted from a profile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import CaseLabel
from .engine import LowerBoundMatrixProfile


@dataclass(frozen=True)
class MotifPair:
    """One reported motif: two window starts and their distance bound."""

    rank: int
    pos_a: int
    pos_b: int
    distance: float
    label: CaseLabel

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError("rank starts at 1")
        if not 0 <= self.pos_a < self.pos_b:
            raise ValueError("motif positions must satisfy 0 <= pos_a < pos_b")
        if not self.distance >= 0.0:
            raise ValueError("distance must be non-negative")


def top_k_motifs(profile: LowerBoundMatrixProfile, k: int) -> list[MotifPair]:
    """Best ``k`` non-overlapping motif pairs, nearest first.

    Each round takes the global minimum of the remaining profile entries
    and pairs the position with its stored match.  Exclusion zones around
    both members are then retired so later motifs cannot overlap earlier
    ones.  A candidate whose stored partner was already retired is itself
    retired without being reported.  Invalid entries (NaN value or
    negative index) never appear.  Ties prefer the smallest pos_a, then
    the smallest pos_b.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    vals = profile.values.astype(np.float64, copy=True)
    vals[~np.isfinite(vals)] = np.inf
    vals[profile.index < 0] = np.inf
    index = profile.index
    w = profile.exclusion_halfwidth
    out: list[MotifPair] = []
    while len(out) < k:
        best = vals.min() if vals.size else np.inf
        if not np.isfinite(best):
            break
        candidates = np.flatnonzero(vals == best)
        pairs = []
        for pos in candidates:
            partner = int(index[pos])
            a, b = (pos, partner) if pos < partner else (partner, pos)
            pairs.append((int(a), int(b), int(pos)))
        a, b, pos = min(pairs)
        if not np.isfinite(vals[a]) or not np.isfinite(vals[b]):
            # Partner already retired by an earlier motif's zone; this
            # entry can no longer form a non-overlapping pair.
            vals[pos] = np.inf
            continue
        out.append(
            MotifPair(
                rank=len(out) + 1,
                pos_a=a,
                pos_b=b,
                distance=float(best),
                label=CaseLabel(int(profile.labels[pos])),
            )
        )
        for member in (a, b):
            vals[max(member - w, 0):member + w + 1] = np.inf
    return out
