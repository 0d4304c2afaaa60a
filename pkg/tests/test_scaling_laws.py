import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delta_engine.errors import (
    DegenerateX,
    EmptyWindow,
    InsufficientData,
    InsufficientPoints,
    NoEvents,
    NonPositiveValue,
    ThresholdMismatch,
)
from delta_engine.intrinsic_time import Direction, EventKind, IntrinsicEvent, dissect
from delta_engine.scaling_laws import (
    CONTINUUM_BRIDGING_CONSTANT,
    LogLogPoint,
    avg_overshoot_law,
    bridging_check,
    dc_count_law,
    fit_avg_overshoot,
    fit_dc_counts,
    fit_power_law,
    realized_variance,
    summarize,
    volatility_proxy,
)
from delta_engine.ticks import GbmParams, TickSeries, generate_gbm

from .oracles import brownian_dc_count

LOG_GRID = np.geomspace(5e-4, 5e-3, 6).tolist()
S = 10**9


def sawtooth(n, delta=0.01, p0=100.0):
    """Every tick reverses by exactly ``delta`` from the previous one."""
    prices = [p0, p0 * (1.0 + delta)]
    for i in range(n):
        last = prices[-1]
        prices.append(last * (1.0 - delta) if i % 2 == 0 else last * (1.0 + delta))
    return TickSeries(range(len(prices)), prices)


def dc(ts, direction=Direction.UP, delta=0.01, ordinal=0):
    return IntrinsicEvent(EventKind.DC, direction, delta, 100.0, ts, ordinal)


# --- fit_power_law -------------------------------------------------------


def test_fit_exact_square_law():
    f = fit_power_law([(1, 2), (10, 200), (100, 20000)])
    assert f.c == pytest.approx(2, rel=1e-9)
    assert f.alpha == pytest.approx(2, abs=1e-9)
    assert f.r_squared == pytest.approx(1, abs=1e-9)
    assert f.n_points == 3


def test_fit_constant_function():
    f = fit_power_law([LogLogPoint(1, 5), LogLogPoint(2, 5), LogLogPoint(4, 5)])
    assert f.c == pytest.approx(5, rel=1e-9)
    assert f.alpha == pytest.approx(0, abs=1e-12)
    assert f.r_squared == 1.0


def test_fit_errors():
    with pytest.raises(InsufficientPoints):
        fit_power_law([(1, 1)])
    with pytest.raises(InsufficientPoints):
        fit_power_law([])
    with pytest.raises(DegenerateX):
        fit_power_law([(2, 1), (2, 3)])
    with pytest.raises(NonPositiveValue):
        fit_power_law([(1, 1), (2, 0)])
    with pytest.raises(NonPositiveValue):
        fit_power_law([(-1, 1), (2, 1)])


def test_fit_r_squared_matches_numpy():
    rng = np.random.default_rng(1)
    x = np.geomspace(0.1, 10, 12)
    y = 3 * x**-1.5 * np.exp(rng.normal(0, 0.2, x.size))
    f = fit_power_law(zip(x, y))
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    r = np.corrcoef(np.log(x), np.log(y))[0, 1]
    assert f.alpha == pytest.approx(slope, rel=1e-10)
    assert math.log(f.c) == pytest.approx(intercept, rel=1e-10)
    assert f.r_squared == pytest.approx(r**2, rel=1e-10)
    assert 0 <= f.r_squared <= 1


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=-3, max_value=3),
    st.integers(min_value=2, max_value=10),
)
def test_fit_recovers_exact_power_laws(log10_c, alpha, n):
    c = 10.0**log10_c
    xs = np.geomspace(0.01, 100, n)
    f = fit_power_law([(x, c * x**alpha) for x in xs])
    assert abs(f.c / c - 1) <= 1e-9
    assert abs(f.alpha - alpha) <= 1e-9 * max(1.0, abs(alpha))


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(min_value=-20, max_value=20), min_size=2, max_size=8, unique=True),
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=1e-3, max_value=1e3),
)
def test_fit_is_scale_covariant(exponents, y0, k):
    xs = [10.0 ** (e / 10) for e in exponents]
    ys = [y0 * (1 + 0.3 * math.sin(7 * x)) for x in xs]
    a = fit_power_law(zip(xs, ys))
    b = fit_power_law([(x, k * y) for x, y in zip(xs, ys)])
    assert b.c == pytest.approx(k * a.c, rel=1e-9)
    assert b.alpha == pytest.approx(a.alpha, abs=1e-9)


def test_fit_json_shape():
    f = fit_power_law([(1, 2), (10, 200)])
    d = json.loads(json.dumps(f.to_json()))
    assert set(d) == {"c", "alpha", "r_squared", "n_points", "points"}
    assert d["points"] == [[1.0, 2.0], [10.0, 200.0]]


# --- dissection summaries -----------------------------------------------


def test_summary_matches_dissect():
    s = generate_gbm(GbmParams(sigma=0.001, n=20_000, seed=3))
    for d in (0.001, 0.003):
        evs = dissect(s, d)
        summ = summarize(s, d)
        assert summ.dc_count == sum(e.kind is EventKind.DC for e in evs)
        assert summ.os_count == sum(e.kind is EventKind.OS for e in evs)
        assert len(summ.overshoots) == summ.dc_count - 1


def test_overshoot_length_hand_traced():
    # DC down @99.99, low 98.0, DC up @99.0 (>= 98 * 1.01 = 98.98)
    s = TickSeries(range(6), [100.0, 101.0, 99.99, 98.5, 98.0, 99.0])
    summ = summarize(s, 0.01)
    assert summ.dc_count == 2
    assert summ.overshoots.tolist() == [abs(math.log(98.0 / 99.99))]


# --- dc_count_law / avg_overshoot_law -----------------------------------


@pytest.fixture(scope="module")
def fine_gbm():
    # per-tick log move 5e-5, i.e. 0.1 x the smallest threshold
    return generate_gbm(GbmParams(s0=100, mu=0.0, sigma=0.01, dt=2.5e-5, n=10**7, seed=2024))


@pytest.fixture(scope="module")
def fine_summaries(fine_gbm):
    return [summarize(fine_gbm, d) for d in LOG_GRID]


def test_dc_count_law_brownian_exponent(fine_summaries):
    fit = fit_dc_counts(fine_summaries)
    assert abs(fit.alpha + 2) <= 0.15
    assert fit.r_squared > 0.99


def test_dc_counts_near_brownian_expectation(fine_summaries):
    duration = 10**7 * 2.5e-5
    for s in fine_summaries:
        expected = brownian_dc_count(0.01, duration, s.threshold)
        assert 0.8 <= s.dc_count / expected <= 1.1


def test_avg_overshoot_equals_threshold(fine_summaries):
    for s in fine_summaries:
        assert abs(s.mean_overshoot / s.threshold - 1) <= 0.1
    assert fit_avg_overshoot(fine_summaries).alpha == pytest.approx(1, abs=0.1)


def test_public_laws_agree_with_summaries():
    s = generate_gbm(GbmParams(sigma=0.001, n=50_000, seed=8))
    grid = [0.001, 0.002, 0.004]
    summ = [summarize(s, d) for d in grid]
    assert dc_count_law(s, grid) == fit_dc_counts(summ)
    assert avg_overshoot_law(s, grid) == fit_avg_overshoot(summ)


def test_dc_count_y_is_monotone():
    s = generate_gbm(GbmParams(sigma=0.001, n=50_000, seed=9))
    ys = [p.y for p in dc_count_law(s, LOG_GRID).points]
    assert ys == sorted(ys, reverse=True)


def test_laws_on_constant_series():
    s = TickSeries(range(100), [100.0] * 100)
    with pytest.raises(NoEvents):
        dc_count_law(s, [0.001, 0.01])
    with pytest.raises(NoEvents):
        avg_overshoot_law(s, [0.001, 0.01])


def test_laws_need_two_thresholds():
    s = generate_gbm(GbmParams(sigma=0.01, n=1000, seed=1))
    with pytest.raises(InsufficientPoints):
        dc_count_law(s, [0.01])
    with pytest.raises(InsufficientPoints):
        avg_overshoot_law(s, [0.01])


def test_sawtooth_has_zero_overshoot():
    s = sawtooth(50)
    summ = summarize(s, 0.01)
    assert summ.dc_count == 50
    assert summ.overshoots.tolist() == [0.0] * 49
    with pytest.raises(NonPositiveValue):
        avg_overshoot_law(s, [0.005, 0.01])


# --- volatility proxy ---------------------------------------------------


def test_volatility_zero_events():
    v = volatility_proxy([], 0.01, 100 * S, now=500 * S)
    assert v.sigma_hat == 0 and v.dc_count == 0
    assert (v.window_start, v.window_end) == (400 * S, 500 * S)


def test_volatility_arithmetic():
    events = [dc(i * 100 * S, ordinal=i) for i in range(1, 101)]
    v = volatility_proxy(events, 0.01, 10_000 * S)
    assert v.dc_count == 100
    assert v.sigma_hat == pytest.approx(0.001, rel=1e-12)


def test_volatility_window_is_half_open():
    events = [dc(10 * S), dc(20 * S, ordinal=1), dc(30 * S, ordinal=2)]
    assert volatility_proxy(events, 0.01, 20 * S, now=30 * S).dc_count == 2


def test_volatility_ignores_overshoots():
    events = [dc(S), IntrinsicEvent(EventKind.OS, Direction.UP, 0.01, 101.0, 2 * S, 1)]
    assert volatility_proxy(events, 0.01, 10 * S, now=5 * S).dc_count == 1


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=10**6), max_size=40),
    st.integers(min_value=-(10**12), max_value=10**12),
)
def test_volatility_translation_invariant(offsets, shift):
    ts = sorted(offsets)
    events = [dc(t * S // 1000, ordinal=i) for i, t in enumerate(ts)]
    moved = [e._replace(timestamp=e.timestamp + shift) for e in events]
    now = 10**6 * S // 1000
    a = volatility_proxy(events, 0.01, 300 * S, now=now)
    b = volatility_proxy(moved, 0.01, 300 * S, now=now + shift)
    assert (a.sigma_hat, a.dc_count) == (b.sigma_hat, b.dc_count)


def test_volatility_errors():
    with pytest.raises(EmptyWindow):
        volatility_proxy([], 0.01, 0)
    with pytest.raises(ThresholdMismatch):
        volatility_proxy([dc(S, delta=0.02)], 0.01, 10 * S)


@pytest.fixture(scope="module")
def vol_gbm():
    # sigma = 0.002 / sqrt(s), per-tick log move 5e-5 = 0.05 x delta
    return generate_gbm(GbmParams(sigma=0.002, dt=6.25e-4, n=2 * 10**6, seed=77))


def test_volatility_calibrates_on_gbm(vol_gbm):
    events = dissect(vol_gbm, 0.001)
    window = int(vol_gbm.timestamps[-1])
    v = volatility_proxy(events, 0.001, window, now=window)
    assert 0.8 <= v.sigma_hat / 0.002 <= 1.2


# --- bridging -----------------------------------------------------------


def test_bridging_constant_series():
    s = TickSeries(np.arange(100) * S, [100.0] * 100)
    r = bridging_check(s, 0.01, 5 * S)
    assert (r.lhs, r.rhs, r.relative_error) == (0.0, 0.0, 0.0)


def test_bridging_too_short():
    s = TickSeries(np.arange(100) * S, [100.0] * 100)
    with pytest.raises(InsufficientData):
        bridging_check(s, 0.01, 10 * S)


def test_realized_variance_sampling():
    s = TickSeries([0, S, 2 * S, 3 * S, 4 * S], [1.0, 2.0, 4.0, 2.0, 8.0])
    rv, n = realized_variance(s, 2 * S)
    assert n == 3
    assert rv == pytest.approx(math.log(4) ** 2 + math.log(2) ** 2)
    # grid points between ticks take the last tick at or before them
    s2 = TickSeries([0, 3 * S, 5 * S], [1.0, 2.0, 4.0])
    rv2, n2 = realized_variance(s2, 2 * S)
    assert n2 == 3  # samples at 0, 2s, 4s -> prices 1, 1, 2
    assert rv2 == pytest.approx(math.log(2) ** 2)


def test_bridging_fields_consistent():
    s = generate_gbm(GbmParams(sigma=0.001, n=100_000, seed=12))
    r = bridging_check(s, 0.002, 600 * S)
    summ = summarize(s, 0.002)
    assert r.lhs == CONTINUUM_BRIDGING_CONSTANT * summ.dc_count * summ.mean_sq_overshoot
    assert r.relative_error == abs(r.lhs - r.rhs) / max(r.rhs, 1e-18)
    assert r.dc_count == summ.dc_count


def test_bridging_fine_ticks_with_continuum_constant(vol_gbm):
    r = bridging_check(vol_gbm, 0.001, S)
    assert r.relative_error <= 0.25
