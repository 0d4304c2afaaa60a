import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delta_engine.errors import InputError, InsufficientEvents, OrdinalBeforeAnchor
from delta_engine.intrinsic_time import Direction, EventKind, IntrinsicEvent
from delta_engine.trend_lines import (
    LineKind,
    TrendLine,
    detect_breakout,
    evaluate_line,
    fit_trend_line,
)

from .oracles import ols_line

R, S_ = LineKind.RESISTANCE, LineKind.SUPPORT


def os_event(ordinal, price, direction=Direction.UP, delta=0.01):
    return IntrinsicEvent(EventKind.OS, direction, delta, price, ordinal * 10, ordinal)


def flat(kind, level_price, anchor=0, slope=0.0):
    return TrendLine(kind, slope, math.log(level_price), anchor, 2, 0.01, 2)


def test_two_point_fit():
    evs = [
        IntrinsicEvent(EventKind.DC, Direction.UP, 0.01, 90.0, 0, 3),
        os_event(4, math.exp(4.600)),
        os_event(5, 50.0, Direction.DOWN),
        os_event(7, math.exp(4.630)),
    ]
    line = fit_trend_line(evs, R, 2)
    assert line.slope == pytest.approx(0.010, abs=1e-12)
    assert line.intercept == pytest.approx(4.600, abs=1e-12)
    assert line.anchor_ordinal == 4
    assert (line.kind, line.n_points, line.look_back, line.threshold) == (R, 2, 2, 0.01)


def test_fit_uses_only_most_recent_matching_overshoots():
    evs = [os_event(i, 100.0 * (1 + i), Direction.DOWN) for i in range(6)]
    evs.insert(2, os_event(50, 1.0))  # an UP overshoot is ignored by a support fit
    line = fit_trend_line(evs, S_, 3)
    assert line.anchor_ordinal == 3
    slope, _ = ols_line([0, 1, 2], [math.log(400.0), math.log(500.0), math.log(600.0)])
    assert line.slope == pytest.approx(slope, rel=1e-12)


def test_collinear_points_fit_exactly():
    evs = [os_event(o, math.exp(4.0 + 0.02 * o)) for o in (2, 5, 6)]
    line = fit_trend_line(evs, R, 3)
    assert line.slope == pytest.approx(0.02, abs=1e-12)
    for e in evs:
        assert line.log_level(e.ordinal) == pytest.approx(math.log(e.price), abs=1e-12)


def test_insufficient_events():
    with pytest.raises(InsufficientEvents):
        fit_trend_line([os_event(1, 100.0)], R, 2)
    with pytest.raises(InsufficientEvents):
        fit_trend_line([os_event(1, 100.0), os_event(2, 101.0)], S_, 2)


def test_look_back_must_be_at_least_two():
    with pytest.raises(InputError):
        fit_trend_line([os_event(1, 100.0), os_event(2, 101.0)], R, 1)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=-0.1, max_value=0.1),
    st.floats(min_value=-3, max_value=8),
    st.lists(st.integers(min_value=1, max_value=50), min_size=2, max_size=12),
)
def test_exact_affine_recovery(slope, intercept, gaps):
    ords = [sum(gaps[: i + 1]) for i in range(len(gaps))]
    anchor = ords[0]
    evs = [os_event(o, math.exp(intercept + slope * (o - anchor))) for o in ords]
    line = fit_trend_line(evs, R, len(evs))
    assert line.slope == pytest.approx(slope, abs=1e-9)
    assert line.intercept == pytest.approx(intercept, abs=1e-9)
    again = fit_trend_line(evs, R, len(evs))
    assert again == line


def test_fit_scale_invariance():
    evs = [os_event(o, p) for o, p in [(1, 100.0), (4, 103.0), (9, 102.0)]]
    scaled = [e._replace(price=e.price * 7.5) for e in evs]
    a, b = fit_trend_line(evs, R, 3), fit_trend_line(scaled, R, 3)
    assert b.slope == pytest.approx(a.slope, abs=1e-12)
    assert b.intercept - a.intercept == pytest.approx(math.log(7.5), abs=1e-12)


def test_evaluate_line():
    line = TrendLine(R, 0.010, 4.600, 4, 2, 0.01, 2)
    assert evaluate_line(line, 4) == pytest.approx(math.exp(4.600), rel=1e-15)
    assert evaluate_line(line, 6) == pytest.approx(math.exp(4.620), rel=1e-14)
    with pytest.raises(OrdinalBeforeAnchor):
        evaluate_line(line, 3)


def test_breakout_examples():
    b = detect_breakout(flat(R, 101.0), 101.5, 3, 77, 0.0)
    assert b is not None and b.direction is Direction.UP
    assert (b.price, b.timestamp, b.ordinal_at_breach) == (101.5, 77, 3)
    assert detect_breakout(flat(S_, 99.0), 99.0, 3, 77, 0.0) is None
    assert detect_breakout(flat(R, 101.0), 101.5, 3, 77, 0.01) is None
    down = detect_breakout(flat(S_, 99.0), 98.0, 3, 77, 0.0)
    assert down is not None and down.direction is Direction.DOWN
    assert detect_breakout(flat(R, 101.0), 90.0, 3, 77) is None
    assert detect_breakout(flat(S_, 99.0), 120.0, 3, 77) is None


def test_breakout_before_anchor():
    with pytest.raises(OrdinalBeforeAnchor):
        detect_breakout(flat(R, 101.0, anchor=5), 200.0, 4, 0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=50, max_value=150),
    st.floats(min_value=50, max_value=150),
    st.floats(min_value=0, max_value=0.05),
    st.floats(min_value=-0.01, max_value=0.01),
    st.integers(min_value=0, max_value=30),
)
def test_breakout_monotone_in_price(p1, p2, eps, slope, ordinal):
    lo, hi = sorted((p1, p2))
    res = flat(R, 100.0, slope=slope)
    sup = flat(S_, 100.0, slope=slope)
    if detect_breakout(res, lo, ordinal, 0, eps):
        assert detect_breakout(res, hi, ordinal, 0, eps)
    if detect_breakout(sup, hi, ordinal, 0, eps):
        assert detect_breakout(sup, lo, ordinal, 0, eps)
