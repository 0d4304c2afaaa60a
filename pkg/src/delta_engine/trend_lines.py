"""Support/resistance lines over overshoot events and breakout tests.

Lines live in (event ordinal, log price) space: the x coordinate is the
global intrinsic-event ordinal at one threshold (DC and OS share the
counter) and y is ``ln(price)``. Resistance lines are fitted to the most
recent upward overshoots, support lines to downward ones.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple, Sequence

from .errors import InputError, InsufficientEvents, OrdinalBeforeAnchor
from .intrinsic_time import Direction, EventKind, IntrinsicEvent


class LineKind(enum.Enum):
    RESISTANCE = "RESISTANCE"
    SUPPORT = "SUPPORT"

    @property
    def source_direction(self) -> Direction:
        """Direction of the overshoots the line is fitted to (and of its breakouts)."""
        return Direction.UP if self is LineKind.RESISTANCE else Direction.DOWN


def check_look_back(size: int) -> int:
    if isinstance(size, bool) or not isinstance(size, int) or size < 2:
        raise InputError(f"look-back must be an integer >= 2, got {size!r}")
    return size


class TrendLine(NamedTuple):
    kind: LineKind
    slope: float  # log price per event ordinal
    intercept: float  # log price at anchor_ordinal
    anchor_ordinal: int
    n_points: int
    threshold: float
    look_back: int

    def log_level(self, ordinal: int) -> float:
        return self.intercept + self.slope * (ordinal - self.anchor_ordinal)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "slope": self.slope,
            "intercept": self.intercept,
            "anchor_ordinal": self.anchor_ordinal,
            "n_points": self.n_points,
            "threshold": self.threshold,
            "look_back": self.look_back,
        }


class Breakout(NamedTuple):
    direction: Direction
    line: TrendLine
    price: float
    timestamp: int
    ordinal_at_breach: int


def fit_points(
    ordinals: Sequence[int], log_prices: Sequence[float], kind: LineKind, threshold: float
) -> TrendLine:
    """OLS line through ``(ordinal, log_price)`` pairs, anchored at the first ordinal."""
    n = len(ordinals)
    anchor = ordinals[0]
    xs = [o - anchor for o in ordinals]
    mx = sum(xs) / n
    my = math.fsum(log_prices) / n
    sxx = sxy = 0.0
    for x, y in zip(xs, log_prices):
        dx = x - mx
        sxx += dx * dx
        sxy += dx * (y - my)
    slope = sxy / sxx
    return TrendLine(kind, slope, my - slope * mx, anchor, n, threshold, n)


def fit_trend_line(events: Sequence[IntrinsicEvent], kind: LineKind, look_back: int) -> TrendLine:
    """Fit ``kind`` to the last ``look_back`` overshoots of the matching direction."""
    look_back = check_look_back(look_back)
    direction = kind.source_direction
    chosen = [e for e in events if e.kind is EventKind.OS and e.direction is direction][-look_back:]
    if len(chosen) < look_back:
        raise InsufficientEvents(
            f"{kind.value.lower()} needs {look_back} {direction.value} overshoots, found {len(chosen)}"
        )
    if len({e.threshold for e in chosen}) != 1:
        raise InputError("events must all be at one threshold")
    return fit_points(
        [e.ordinal for e in chosen],
        [math.log(e.price) for e in chosen],
        kind,
        chosen[0].threshold,
    )


def evaluate_line(line: TrendLine, ordinal: int) -> float:
    """Price on ``line`` at ``ordinal``."""
    if ordinal < line.anchor_ordinal:
        raise OrdinalBeforeAnchor(ordinal, line.anchor_ordinal)
    return math.exp(line.log_level(ordinal))


def detect_breakout(
    line: TrendLine, price: float, ordinal: int, timestamp: int, epsilon: float = 0.0
) -> Breakout | None:
    """Strict breach of ``line`` by more than ``epsilon`` in log price, else None."""
    if ordinal < line.anchor_ordinal:
        raise OrdinalBeforeAnchor(ordinal, line.anchor_ordinal)
    level = line.log_level(ordinal)
    lp = math.log(price)
    if line.kind is LineKind.RESISTANCE:
        if lp > level + epsilon:
            return Breakout(Direction.UP, line, price, timestamp, ordinal)
    elif lp < level - epsilon:
        return Breakout(Direction.DOWN, line, price, timestamp, ordinal)
    return None
