"""Power-law fits and the intrinsic-time scaling laws.

All laws are measured on a tick series at a set of thresholds:

* directional-change count ``N(delta)``,
* average overshoot length, where the overshoot of a DC segment is
  ``omega = |ln(p_extreme / p_dc)|`` from the DC confirmation price to the
  extreme reached before the next DC (only completed segments count),
* a volatility estimate obtained by inverting ``N_DC ~ sigma**2 T / delta**2``,
* the bridging relation ``N_DC * mean(omega**2) ~ sum of squared log-returns``.

For driftless Brownian log-prices sampled finely relative to ``delta``,
``omega`` is exponential with mean ``delta`` so ``mean(omega**2) = 2 delta**2``
and the bridging left side is twice the realized variance; see
``docs/bridging_calibration.md`` for the constants used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateX,
    EmptySeries,
    EmptyWindow,
    InsufficientData,
    InsufficientPoints,
    NoEvents,
    NonPositiveValue,
    ThresholdMismatch,
)
from .intrinsic_time import DissectionState, EventKind, IntrinsicEvent, check_threshold
from .ticks import TickSeries

# Prefactor k in N_DC = k * sigma**2 * T / delta**2 used by volatility_proxy.
VOL_PROXY_CONSTANT = 1.0

# Factor applied to N_DC * mean(omega**2) before comparing with realized variance.
# Continuum (fine ticks) value: mean(omega**2) = 2 delta**2.
CONTINUUM_BRIDGING_CONSTANT = 0.5
# Calibrated for coarse ticks where the per-tick log move is about 1-2 delta
# (sigma * sqrt(dt) / delta in [1, 2]); see docs/bridging_calibration.md.
COARSE_TICK_BRIDGING_CONSTANT = 0.71

EPS_DIV = 1e-18
NS_PER_S = 1e9


@dataclass(frozen=True)
class LogLogPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0 and math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonPositiveValue(f"log-log point needs x > 0 and y > 0, got ({self.x!r}, {self.y!r})")


@dataclass(frozen=True)
class ScalingLawFit:
    c: float
    alpha: float
    r_squared: float
    n_points: int
    points: tuple[LogLogPoint, ...] = field(default=(), repr=False)

    def __call__(self, x):
        return self.c * np.power(x, self.alpha)

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "alpha": self.alpha,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "points": [[p.x, p.y] for p in self.points],
        }


def _as_point(p) -> LogLogPoint:
    return p if isinstance(p, LogLogPoint) else LogLogPoint(float(p[0]), float(p[1]))


def fit_power_law(points: Iterable) -> ScalingLawFit:
    """Least-squares fit of ``y = c * x**alpha`` on ``(ln x, ln y)``.

    ``points`` are :class:`LogLogPoint` or ``(x, y)`` pairs. ``r_squared`` is
    the coefficient of determination in log space, taken as 1 when all
    ``ln y`` are identical.
    """
    raw = list(points)
    if len(raw) < 2:
        raise InsufficientPoints(f"need at least 2 points, got {len(raw)}")
    pts = tuple(_as_point(p) for p in raw)
    lx = [math.log(p.x) for p in pts]
    ly = [math.log(p.y) for p in pts]
    if min(lx) == max(lx):
        raise DegenerateX("all x values are equal")

    n = len(pts)
    mx = math.fsum(lx) / n
    my = math.fsum(ly) / n
    sxx = math.fsum((a - mx) ** 2 for a in lx)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(lx, ly))
    alpha = sxy / sxx
    intercept = my - alpha * mx

    if min(ly) == max(ly):
        r2 = 1.0
    else:
        ss_tot = math.fsum((b - my) ** 2 for b in ly)
        ss_res = math.fsum((b - intercept - alpha * a) ** 2 for a, b in zip(lx, ly))
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ScalingLawFit(math.exp(intercept), alpha, r2, n, pts)


@dataclass(frozen=True)
class DissectionSummary:
    """Per-threshold statistics collected in a single dissection pass."""

    threshold: float
    dc_count: int
    os_count: int
    overshoots: np.ndarray  # omega per completed DC segment

    @property
    def mean_overshoot(self) -> float:
        return float(np.mean(self.overshoots)) if len(self.overshoots) else math.nan

    @property
    def mean_sq_overshoot(self) -> float:
        return float(np.mean(self.overshoots**2)) if len(self.overshoots) else 0.0


def summarize(series: TickSeries, threshold: float) -> DissectionSummary:
    if len(series) == 0:
        raise EmptySeries()
    state = DissectionState(threshold, series[0])
    feed = state.feed
    log = math.log
    dc = EventKind.DC
    n_dc = n_os = 0
    omegas: list[float] = []
    last_dc_price = None
    for ts, px in series.iter_pairs():
        extreme = state.extreme_price
        out = feed(ts, px)
        if not out:
            continue
        if out[0].kind is dc:
            n_dc += 1
            if last_dc_price is not None:
                omegas.append(abs(log(extreme / last_dc_price)))
            last_dc_price = out[0].price
        else:
            n_os += len(out)
    return DissectionSummary(state.threshold, n_dc, n_os, np.array(omegas))


def _summaries(series: TickSeries, thresholds: Sequence[float]) -> list[DissectionSummary]:
    thresholds = [check_threshold(d) for d in thresholds]
    if len(thresholds) < 2:
        raise InsufficientPoints(f"need at least 2 thresholds, got {len(thresholds)}")
    return [summarize(series, d) for d in thresholds]


def fit_dc_counts(summaries: Sequence[DissectionSummary]) -> ScalingLawFit:
    points = []
    for s in summaries:
        if s.dc_count == 0:
            raise NoEvents(s.threshold)
        points.append(LogLogPoint(s.threshold, float(s.dc_count)))
    return fit_power_law(points)


def fit_avg_overshoot(summaries: Sequence[DissectionSummary]) -> ScalingLawFit:
    points = []
    for s in summaries:
        if len(s.overshoots) == 0:
            raise NoEvents(s.threshold)
        points.append(LogLogPoint(s.threshold, s.mean_overshoot))
    return fit_power_law(points)


def dc_count_law(series: TickSeries, thresholds: Sequence[float]) -> ScalingLawFit:
    """Fit ``N_DC(delta) = c * delta**alpha`` over ``thresholds``."""
    return fit_dc_counts(_summaries(series, thresholds))


def avg_overshoot_law(series: TickSeries, thresholds: Sequence[float]) -> ScalingLawFit:
    """Fit ``mean(omega)(delta) = c * delta**alpha`` over ``thresholds``."""
    return fit_avg_overshoot(_summaries(series, thresholds))


@dataclass(frozen=True)
class VolatilityEstimate:
    sigma_hat: float  # per sqrt(second)
    window_start: int
    window_end: int
    dc_count: int
    threshold: float


def volatility_proxy(
    events: Sequence[IntrinsicEvent],
    threshold: float,
    window: int,
    now: int | None = None,
    constant: float = VOL_PROXY_CONSTANT,
) -> VolatilityEstimate:
    """Volatility from the DC count in ``(now - window, now]``.

    ``sigma_hat = delta * sqrt(N_DC / (constant * window_seconds))``. ``now``
    defaults to the last event's timestamp (or ``window`` when there are no
    events).
    """
    threshold = check_threshold(threshold)
    if window <= 0:
        raise EmptyWindow(f"window must be positive, got {window}")
    if any(e.threshold != threshold for e in events):
        raise ThresholdMismatch(f"events must all be at threshold {threshold!r}")
    if now is None:
        now = events[-1].timestamp if events else window
    start = now - window
    count = sum(1 for e in events if e.kind is EventKind.DC and start < e.timestamp <= now)
    sigma_hat = threshold * math.sqrt(count / (constant * (window / NS_PER_S)))
    return VolatilityEstimate(sigma_hat, start, now, count, threshold)


@dataclass(frozen=True)
class BridgingReport:
    lhs: float  # calibration * N_DC * mean(omega**2)
    rhs: float  # realized variance of equidistant log returns
    relative_error: float
    dc_count: int
    mean_sq_overshoot: float
    n_samples: int
    calibration: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def realized_variance(series: TickSeries, sampling_interval: int) -> tuple[float, int]:
    """Sum of squared log returns sampled every ``sampling_interval`` ns.

    Samples use the last tick at or before each grid time, starting at the
    first tick. Returns ``(variance, number_of_samples)``.
    """
    if sampling_interval <= 0:
        raise InsufficientData(f"sampling interval must be positive, got {sampling_interval}")
    ts = series.timestamps
    t0 = int(ts[0])
    k = (int(ts[-1]) - t0) // sampling_interval
    grid = t0 + np.arange(k + 1, dtype=np.int64) * sampling_interval
    idx = np.searchsorted(ts, grid, side="right") - 1
    logp = np.log(series.prices[idx])
    return float(np.sum(np.diff(logp) ** 2)), int(k + 1)


def bridging_check(
    series: TickSeries,
    threshold: float,
    sampling_interval: int,
    calibration: float = CONTINUUM_BRIDGING_CONSTANT,
    summary: DissectionSummary | None = None,
) -> BridgingReport:
    """Compare ``calibration * N_DC * mean(omega**2)`` with realized variance."""
    if len(series) == 0:
        raise EmptySeries()
    threshold = check_threshold(threshold)
    span = int(series.timestamps[-1]) - int(series.timestamps[0])
    if sampling_interval <= 0 or span < 10 * sampling_interval:
        raise InsufficientData(
            f"series spans {span} ns, need at least 10 sampling intervals of {sampling_interval} ns"
        )
    if summary is None:
        summary = summarize(series, threshold)
    elif summary.threshold != threshold:
        raise ThresholdMismatch("summary threshold does not match")
    lhs = calibration * summary.dc_count * summary.mean_sq_overshoot
    rhs, n_samples = realized_variance(series, sampling_interval)
    rel = abs(lhs - rhs) / max(rhs, EPS_DIV)
    return BridgingReport(
        lhs, rhs, rel, summary.dc_count, summary.mean_sq_overshoot, n_samples, calibration
    )
