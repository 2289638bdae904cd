"""Container, CSV ingestion, and sliding-statistics tests."""

import numpy as np
import pytest

from gapprofile import (
    EngineConfig,
    MissingValueSeries,
    SeriesLengthError,
    SeriesParseError,
    WindowError,
    build_auxiliary,
    compute_window_stats,
    format_series,
    parse_series,
    read_series,
    sliding_extrema,
    sliding_mean_std,
)
from gapprofile.series import CsvLayout, WindowStats


def test_series_basic_container():
    s = MissingValueSeries([1.0, np.nan, 3.0])
    assert s.n == 3
    assert s.missing_count == 1
    assert not s.is_complete
    assert s.present_mask.tolist() == [True, False, True]
    assert not s.values.flags.writeable


def test_series_rejects_too_short_and_infinite():
    with pytest.raises(SeriesLengthError):
        MissingValueSeries([1.0])
    with pytest.raises(ValueError):
        MissingValueSeries([1.0, np.inf, 2.0])


def test_series_copies_input():
    raw = np.array([1.0, 2.0, 3.0])
    s = MissingValueSeries(raw)
    raw[0] = 99.0
    assert s.values[0] == 1.0


def test_parse_missing_tokens():
    s = parse_series("1.0\n\n3.0\n")
    assert s.n == 3
    assert np.isnan(s.values[1])
    for token in ("nan", "NaN", "NAN", ""):
        s = parse_series(f"1.0\n{token}\n3.0\n")
        assert np.isnan(s.values[1]), token


def test_parse_blank_line_is_one_missing_record():
    s = parse_series("1.0\n\n3.0")
    assert s.values[0] == 1.0 and s.values[2] == 3.0
    assert np.isnan(s.values[1])


def test_parse_error_carries_line_number():
    with pytest.raises(SeriesParseError) as err:
        parse_series("1.0\n2.0\nbogus\n4.0\n")
    assert "line 3" in str(err.value)
    assert err.value.line == 3


def test_parse_rejects_infinities_and_short_input():
    with pytest.raises(SeriesParseError):
        parse_series("1.0\ninf\n")
    with pytest.raises(SeriesLengthError):
        parse_series("1.0\n")


def test_read_series_header_detection():
    s, layout = read_series("value\n1.0\n2.0\n")
    assert layout.header == ("value",)
    assert s.n == 2
    s2, layout2 = read_series("1.0\n2.0\n")
    assert layout2.header is None
    assert s2.n == 2


def test_read_series_two_column_timestamps():
    s, layout = read_series("t,value\n0,1.5\n1,\n2,2.5\n")
    assert s.n == 3
    assert np.isnan(s.values[1])
    assert layout.timestamps == ("0", "1", "2")


def test_format_series_round_trip():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    x[rng.choice(50, 9, replace=False)] = np.nan
    s = MissingValueSeries(x)
    text = format_series(s)
    s2, _ = read_series(text)
    assert np.array_equal(s.values, s2.values, equal_nan=True)
    # and the text itself is stable under a second pass
    assert format_series(s2) == text


def test_format_series_keeps_layout():
    text = "t,value\n0,1.5\n1,\n2,2.5\n"
    s, layout = read_series(text)
    assert format_series(s, layout) == text


def test_build_auxiliary_zero_fill_and_indicator():
    s = MissingValueSeries([1.0, np.nan, -2.0])
    aux = build_auxiliary(s)
    assert aux.z.tolist() == [1.0, 0.0, -2.0]
    assert aux.bind.tolist() == [1.0, 0.0, 1.0]
    assert aux.x.tolist() == [1.0, 0.0, 4.0]


def test_sliding_mean_std_worked_example():
    mu, sigma = sliding_mean_std(np.array([0.0, 2.0, 0.0, 2.0]), 4)
    assert mu.shape == (1,)
    assert mu[0] == 1.0
    assert sigma[0] == 1.0


def test_sliding_mean_std_window_one_is_identity():
    v = np.array([1.0, 2.0, 3.0])
    mu, sigma = sliding_mean_std(v, 1)
    assert np.array_equal(mu, v)
    assert np.array_equal(sigma, np.zeros(3))


def test_sliding_mean_std_matches_direct():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(8, 200))
        m = int(rng.integers(1, n + 1))
        v = rng.normal(loc=rng.uniform(-5, 5), scale=rng.uniform(0.1, 4), size=n)
        mu, sigma = sliding_mean_std(v, m)
        for i in range(0, n - m + 1, max(1, (n - m + 1) // 7)):
            w = v[i:i + m]
            assert abs(mu[i] - w.mean()) < 1e-10
            assert abs(sigma[i] - w.std()) < 1e-10


def test_sliding_mean_std_rejects_bad_window():
    with pytest.raises(WindowError):
        sliding_mean_std(np.arange(4.0), 0)
    with pytest.raises(WindowError):
        sliding_mean_std(np.arange(4.0), 5)


def test_sliding_extrema_matches_naive():
    rng = np.random.default_rng(5)
    for _ in range(15):
        n = int(rng.integers(6, 120))
        m = int(rng.integers(1, n + 1))
        v = rng.normal(size=n)
        v[rng.random(n) < 0.3] = np.nan
        vmax, vmin = sliding_extrema(MissingValueSeries(v) if n >= 2 else v, m)
        for i in range(n - m + 1):
            w = v[i:i + m]
            held = w[~np.isnan(w)]
            if held.size == 0:
                assert np.isnan(vmax[i]) and np.isnan(vmin[i])
            else:
                assert vmax[i] == held.max()
                assert vmin[i] == held.min()


def test_indicator_window_sums_are_exact_counts():
    rng = np.random.default_rng(8)
    v = rng.normal(size=300)
    v[rng.choice(300, 80, replace=False)] = np.nan
    s = MissingValueSeries(v)
    m = 17
    stats = compute_window_stats(s, m)
    counts = np.convolve((~np.isnan(v)).astype(int), np.ones(m, dtype=int), "valid")
    assert np.array_equal(stats.mu_b * m, counts.astype(float))


def test_window_stats_shapes_and_fields():
    s = MissingValueSeries([0.0, 2.0, np.nan, 2.0, 1.0])
    stats = compute_window_stats(s, 2)
    assert isinstance(stats, WindowStats)
    assert stats.window_count == 4
    assert stats.mu_b.tolist() == [1.0, 0.5, 0.5, 1.0]
    assert np.isnan(stats.vmax[2]) is np.False_  # window [nan, 2] still has a present value
    assert stats.vmax[2] == 2.0


def test_engine_config_validation():
    cfg = EngineConfig(m=8)
    assert cfg.exclusion_halfwidth == 2
    cfg.validate_for(16)
    with pytest.raises(WindowError):
        cfg.validate_for(15)
    with pytest.raises(ValueError):
        EngineConfig(m=2)
    with pytest.raises(ValueError):
        EngineConfig(m=8, exclusion_divisor=0)
    with pytest.raises(ValueError):
        EngineConfig(m=8, value_bounds_override=(2.0, 1.0))
    with pytest.raises(ValueError):
        EngineConfig(m=8, all_missing_policy="bogus")


def test_engine_config_policy_coercion():
    assert EngineConfig(m=8, all_missing_policy="flag").all_missing_policy.value == "flag"
    assert EngineConfig(m=8, all_missing_policy="zero").all_missing_policy.value == "zero"
