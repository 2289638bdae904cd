"""Distance-case dispatch and lower-bound admissibility tests.

The numeric anchors here were computed by hand from the closed forms:
restricted moments over the shared-present positions R, the variance
ratio for one-sided gaps, and the variance-fraction bound for two-sided
gaps.  They are frozen so regressions cannot hide behind recomputation.
"""

import math

import numpy as np
import pytest

from gapprofile import (
    CaseLabel,
    CompletionBounds,
    EngineConfig,
    both_missing_sqlb,
    complete_sqdist,
    lb_sqdist_windows,
    one_missing_sqlb,
    oracle_min_distance,
    restricted_stats,
    variance_fraction_bound,
    window_summary,
)

EPS = 1e-12


def _six_dots(a, b):
    miss_a, miss_b = np.isnan(a), np.isnan(b)
    za = np.where(miss_a, 0.0, a)
    zb_v = np.where(miss_b, 0.0, b)
    ba = (~miss_a).astype(float)
    bb = (~miss_b).astype(float)
    return (
        float(za @ zb_v), float(ba @ bb), float(ba @ zb_v),
        float(za @ bb), float(ba @ (zb_v * zb_v)), float((za * za) @ bb),
    )


def test_restricted_stats_perfect_positive_correlation():
    a = np.array([0.0, np.nan, 0.0, 2.0])
    b = np.array([0.0, 2.0, 0.0, 2.0])
    st = restricted_stats(*_six_dots(a, b))
    assert st.r_count == 3
    assert st.mu_i_r == pytest.approx(2 / 3)
    assert st.mu_j_r == pytest.approx(2 / 3)
    assert st.var_i_r == pytest.approx(8 / 9)
    assert st.var_j_r == pytest.approx(8 / 9)
    assert st.q == pytest.approx(1.0)


def test_restricted_stats_no_overlap_is_undefined():
    a = np.array([1.0, np.nan])
    b = np.array([np.nan, 2.0])
    st = restricted_stats(*_six_dots(a, b))
    assert st.r_count == 0
    assert st.q is None


def test_restricted_stats_single_shared_point():
    a = np.array([1.0, np.nan, np.nan])
    b = np.array([5.0, 1.0, np.nan])
    st = restricted_stats(*_six_dots(a, b))
    assert st.r_count == 1
    assert st.var_i_r == 0.0
    assert st.q is None


def test_complete_sqdist_range_and_clamp():
    m = 16
    assert complete_sqdist(1.0, m) == 0.0
    assert complete_sqdist(-1.0, m) == 4.0 * m
    assert complete_sqdist(0.0, m) == 2.0 * m
    # tiny negative products from rounding clamp to zero
    assert complete_sqdist(1.0 + 1e-16, m) == 0.0


def test_one_missing_worked_examples():
    # [0,nan,0,2] against complete [0,2,0,2]: q=1 over R, bound collapses to 0
    a = np.array([0.0, np.nan, 0.0, 2.0])
    b = np.array([0.0, 2.0, 0.0, 2.0])
    cfg = EngineConfig(m=4)
    d, label = lb_sqdist_windows(a, b, cfg)
    assert label is CaseLabel.ONE_MISSING
    assert d == 0.0
    # same presence pattern but anti-correlated: |R| (v_R/v) with q<0
    a2 = np.array([0.0, np.nan, 2.0, 0.0])
    d2, label2 = lb_sqdist_windows(a2, b, cfg)
    assert label2 is CaseLabel.ONE_MISSING
    assert d2 == pytest.approx(8 / 3, rel=1e-12)


def test_one_missing_against_perfectly_correlated_third():
    # q=1 also kills the bound against [0,-1,0,2]
    a = np.array([0.0, np.nan, 0.0, 2.0])
    c = np.array([0.0, -1.0, 0.0, 2.0])
    d, label = lb_sqdist_windows(a, c, EngineConfig(m=4))
    assert label is CaseLabel.ONE_MISSING
    assert d == 0.0


def test_one_missing_degenerate_complete_variance():
    st = restricted_stats(0.0, 2.0, 0.0, 0.0, 0.0, 0.0)
    assert one_missing_sqlb(st, True, 0.0, EPS) == 0.0


def test_variance_fraction_bound_worked_examples():
    # [0, nan, 0, 2]: u_R=2/3, v_R=8/9, bounds (0,2) -> denominator 1, so f
    # equals whatever intersection variance is passed in
    f = variance_fraction_bound(
        mu_z=0.5, sigma_z=math.sqrt(0.75), mu_b=0.75,
        bounds=CompletionBounds(0.0, 2.0), var_over_r=1.0, epsilon=EPS,
    )
    assert f == pytest.approx(1.0, rel=1e-12)
    # [0,2,0,nan,1]: u_R=3/4, v_R=11/16, mu_b=4/5, denominator 4/5 -> f=(8/9)/(4/5)=10/9
    mu_z = 3 / 5
    sigma_sq = (0 + 4 + 0 + 0 + 1) / 5 - mu_z ** 2
    f2 = variance_fraction_bound(
        mu_z=mu_z, sigma_z=math.sqrt(sigma_sq), mu_b=4 / 5,
        bounds=CompletionBounds(0.0, 2.0), var_over_r=8 / 9, epsilon=EPS,
    )
    assert f2 == pytest.approx(10 / 9, rel=1e-12)


def test_variance_fraction_bound_guards():
    with pytest.raises(ValueError):
        variance_fraction_bound(0.0, 0.0, 0.0, CompletionBounds(0, 1), 1.0, EPS)
    # degenerate denominator collapses to the conservative zero
    f = variance_fraction_bound(0.0, 0.0, 1.0, CompletionBounds(0.0, 0.0), 0.5, EPS)
    assert f == 0.0


def test_both_missing_worked_examples():
    cfg = EngineConfig(m=4)
    a = np.array([0.0, np.nan, 0.0, 2.0])
    b = np.array([0.0, 2.0, np.nan, 2.0])
    d, label = lb_sqdist_windows(a, b, cfg)
    assert label is CaseLabel.BOTH_MISSING
    assert d == 0.0  # restricted q = 1

    a2 = np.array([0.0, 2.0, 0.0, np.nan, 1.0])
    b2 = np.array([2.0, 0.0, 2.0, 1.0, np.nan])
    d2, label2 = lb_sqdist_windows(a2, b2, EngineConfig(m=5))
    assert label2 is CaseLabel.BOTH_MISSING
    assert d2 == pytest.approx(10 / 3, rel=1e-12)


def test_both_missing_single_overlap_gives_zero():
    a = np.array([1.0, np.nan, np.nan, 4.0])
    b = np.array([5.0, 1.0, np.nan, np.nan])
    d, label = lb_sqdist_windows(a, b, EngineConfig(m=4))
    assert label is CaseLabel.BOTH_MISSING
    assert d == 0.0


def test_both_missing_scale_invariant_composition():
    st = restricted_stats(0.0, 3.0, 3.0, 3.0, 9.0, 9.0)
    assert both_missing_sqlb(st, 0.0, 0.5) == both_missing_sqlb(st, 0.5, 0.0)


def test_no_overlap_and_all_missing_dispatch():
    a = np.array([1.0, np.nan, 3.0, np.nan])
    b = np.array([np.nan, 2.0, np.nan, 4.0])
    d, label = lb_sqdist_windows(a, b, EngineConfig(m=4))
    assert label is CaseLabel.NO_OVERLAP
    assert d == 0.0

    gone = np.full(4, np.nan)
    d0, lab0 = lb_sqdist_windows(gone, b, EngineConfig(m=4))
    assert lab0 is CaseLabel.ALL_MISSING
    assert d0 == 0.0
    dn, labn = lb_sqdist_windows(gone, b, EngineConfig(m=4, all_missing_policy="flag"))
    assert labn is CaseLabel.ALL_MISSING
    assert math.isnan(dn)


def test_complete_pair_constant_window_conventions():
    cfg = EngineConfig(m=4)
    const = np.full(4, 3.0)
    other = np.array([0.0, 2.0, 0.0, 2.0])
    d, label = lb_sqdist_windows(const, other, cfg)
    assert label is CaseLabel.COMPLETE
    assert d == 8.0  # 2m with q treated as zero
    d2, _ = lb_sqdist_windows(const, np.full(4, -1.0), cfg)
    assert d2 == 0.0


def test_case1_agreement_with_direct_znorm():
    rng = np.random.default_rng(2)
    for _ in range(60):
        m = int(rng.choice([8, 16, 32]))
        a = rng.normal(size=m) * rng.uniform(0.5, 3)
        b = rng.normal(size=m) + rng.uniform(-2, 2)
        d, label = lb_sqdist_windows(a, b, EngineConfig(m=m))
        assert label is CaseLabel.COMPLETE
        za = (a - a.mean()) / a.std()
        zb = (b - b.mean()) / b.std()
        direct = float(((za - zb) ** 2).sum())
        assert d == pytest.approx(direct, rel=1e-8)


def test_symmetry_across_all_cases():
    rng = np.random.default_rng(4)
    for _ in range(200):
        m = int(rng.choice([8, 16, 32]))
        a = rng.normal(size=m)
        b = rng.normal(size=m)
        for w in (a, b):
            k = int(rng.integers(0, m))
            if k:
                w[rng.choice(m, size=k, replace=False)] = np.nan
        cfg = EngineConfig(m=m)
        d_ab, lab_ab = lb_sqdist_windows(a, b, cfg)
        d_ba, lab_ba = lb_sqdist_windows(b, a, cfg)
        if math.isnan(d_ab):
            assert math.isnan(d_ba)
        else:
            assert d_ab == pytest.approx(d_ba, abs=1e-10)
        assert lab_ab is lab_ba


def test_range_bounds_never_negative_never_above_4m():
    rng = np.random.default_rng(6)
    for _ in range(300):
        m = int(rng.choice([8, 16, 32]))
        a = rng.normal(size=m) * rng.uniform(0.1, 5)
        b = rng.normal(size=m) * rng.uniform(0.1, 5)
        for w in (a, b):
            k = int(rng.integers(0, m))
            if k:
                w[rng.choice(m, size=k, replace=False)] = np.nan
        d, label = lb_sqdist_windows(a, b, EngineConfig(m=m))
        assert d >= 0.0
        assert d <= 4.0 * m + 1e-9
        if label is CaseLabel.COMPLETE:
            assert d <= 4.0 * m


def test_branch_continuity_at_zero_correlation():
    # at q == 0 the damped and undamped branches coincide: (1 - 0^2) == 1
    st = restricted_stats(0.0, 4.0, 0.0, 0.0, 4.0, 4.0)
    assert st.q == 0.0
    with_damp = 4 * (st.var_i_r / 1.0) * (1.0 - st.q ** 2)
    without = 4 * (st.var_i_r / 1.0)
    assert with_damp == without
    assert one_missing_sqlb(st, True, 1.0, EPS) == without


def test_missing_data_dominance():
    # more holes never push the bound above the complete pair's distance
    rng = np.random.default_rng(9)
    for _ in range(120):
        m = int(rng.choice([8, 16, 32]))
        a = rng.normal(size=m)
        b = rng.normal(size=m)
        lo = float(min(a.min(), b.min()))
        hi = float(max(a.max(), b.max()))
        cfg = EngineConfig(m=m, value_bounds_override=(lo, hi))
        exact, _ = lb_sqdist_windows(a, b, cfg)
        a_masked, b_masked = a.copy(), b.copy()
        for w in (a_masked, b_masked):
            k = int(rng.integers(0, m - 1))
            if k:
                w[rng.choice(m, size=k, replace=False)] = np.nan
        d, _ = lb_sqdist_windows(a_masked, b_masked, cfg)
        assert d <= exact + 1e-9


def test_oracle_seeded_and_monotone_in_samples():
    a = np.array([0.3, np.nan, -1.2, 0.8, np.nan, 2.0, -0.5, 1.1])
    b = np.array([np.nan, 0.1, -0.9, np.nan, 0.4, 1.7, -0.2, np.nan])
    ba = CompletionBounds(-1.5, 2.0)
    bb = CompletionBounds(-1.0, 1.8)
    v1 = oracle_min_distance(a, b, ba, bb, samples=250, seed=5)
    assert v1 == oracle_min_distance(a, b, ba, bb, samples=250, seed=5)
    prev = math.inf
    for samples in (1, 10, 100, 1000):
        v = oracle_min_distance(a, b, ba, bb, samples=samples, seed=5)
        assert v <= prev
        prev = v
    with pytest.raises(ValueError):
        oracle_min_distance(a, b, ba, bb, samples=0, seed=1)


def test_oracle_complete_pair_is_exact_distance():
    a = np.array([1.0, -2.0, 0.5, 3.0])
    b = np.array([0.0, 1.0, -1.0, 2.0])
    d = oracle_min_distance(a, b, CompletionBounds(-2, 3), CompletionBounds(-1, 2),
                            samples=1, seed=0)
    expected, _ = lb_sqdist_windows(a, b, EngineConfig(m=4))
    assert d == pytest.approx(expected, rel=1e-12)


def test_admissibility_pair_level_sampling():
    """Sampled completions can never dip below the bound."""
    rng = np.random.default_rng(13)
    pairs = 0
    for _ in range(350):
        m = int(rng.choice([8, 16, 32]))
        a = rng.normal(size=m) * rng.uniform(0.5, 2)
        b = rng.normal(size=m) * rng.uniform(0.5, 2) + rng.uniform(-1, 1)
        for w in (a, b):
            k = int(rng.integers(0, m - 1))
            if k:
                w[rng.choice(m, size=k, replace=False)] = np.nan
        sa, sb = window_summary(a), window_summary(b)
        bounds_a = CompletionBounds(sa.vmin, sa.vmax)
        bounds_b = CompletionBounds(sb.vmin, sb.vmax)
        d_lb, _ = lb_sqdist_windows(a, b, EngineConfig(m=m))
        d_oracle = oracle_min_distance(a, b, bounds_a, bounds_b,
                                       samples=200, seed=pairs)
        assert d_oracle >= d_lb - 1e-9
        pairs += 1
    assert pairs >= 300
