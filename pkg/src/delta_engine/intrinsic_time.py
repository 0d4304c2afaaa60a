"""Intrinsic-time dissection into directional changes and overshoots.

For a relative threshold ``delta`` the dissector runs a small state machine
over ticks:

* Before any direction is known (``mode is None``) it tracks the running
  high and low. The first tick at or above ``low * (1 + delta)`` sets the
  mode up; at or below ``high * (1 - delta)`` sets it down. Setting the
  mode emits no event.
* In up mode a tick at or below ``extreme * (1 - delta)`` is a downward
  directional change (DC) and flips the mode. Otherwise the extreme follows
  new highs, and every time the price reaches ``reference * (1 + delta)``
  an upward overshoot (OS) is emitted and the reference advances by that
  factor. Down mode is the mirror image.
* Overshoots only start once the first DC has been seen; the reference
  restarts at each DC's confirmation price.

Events are confirmed at the triggering tick's actual price, boundaries are
inclusive, and a single tick produces at most one DC but possibly several
OS events.
"""

from __future__ import annotations

import enum
import io
from os import PathLike
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import EmptySeries, InvalidThreshold, StaleTick
from .ticks import Tick, TickSeries

EVENTS_HEADER = "ordinal,timestamp,kind,direction,threshold,price"


class Direction(enum.Enum):
    UP = "UP"
    DOWN = "DOWN"

    @property
    def opposite(self) -> "Direction":
        return Direction.DOWN if self is Direction.UP else Direction.UP


class EventKind(enum.Enum):
    DC = "DC"
    OS = "OS"


class IntrinsicEvent(NamedTuple):
    kind: EventKind
    direction: Direction
    threshold: float
    price: float
    timestamp: int
    ordinal: int

    @property
    def is_dc(self) -> bool:
        return self.kind is EventKind.DC


def check_threshold(delta: float) -> float:
    if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not 0.0 < delta < 1.0:
        raise InvalidThreshold(delta)
    return float(delta)


_NO_EVENTS: tuple = ()
_UP, _DOWN = Direction.UP, Direction.DOWN
_DC, _OS = EventKind.DC, EventKind.OS


class DissectionState:
    """Incremental dissector for one threshold. Single owner, mutated by :meth:`feed`.

    While ``mode`` is ``None`` the ``extreme_price`` holds the running high and
    ``low_price`` the running low.
    """

    __slots__ = (
        "threshold",
        "mode",
        "extreme_price",
        "low_price",
        "os_reference_price",
        "next_ordinal",
        "last_timestamp",
        "_up",
        "_down",
    )

    def __init__(self, threshold: float, first_tick: Tick):
        self.threshold = check_threshold(threshold)
        self.mode: Direction | None = None
        price = float(first_tick.price)
        self.extreme_price = price
        self.low_price = price
        self.os_reference_price = price
        self.next_ordinal = 0
        self.last_timestamp = int(first_tick.timestamp)
        self._up = 1.0 + self.threshold
        self._down = 1.0 - self.threshold

    def __repr__(self):
        mode = self.mode.value if self.mode else "UNSET"
        return (
            f"DissectionState(threshold={self.threshold!r}, mode={mode}, "
            f"extreme={self.extreme_price!r}, ref={self.os_reference_price!r}, "
            f"next_ordinal={self.next_ordinal})"
        )

    def feed(self, timestamp: int, price: float) -> Sequence[IntrinsicEvent]:
        """Advance by one tick and return the events it confirms."""
        if timestamp < self.last_timestamp:
            raise StaleTick(timestamp, self.last_timestamp)
        self.last_timestamp = timestamp
        mode = self.mode

        if mode is _UP:
            if price <= self.extreme_price * self._down:
                self.mode = _DOWN
                self.extreme_price = self.os_reference_price = price
                k = self.next_ordinal
                self.next_ordinal = k + 1
                return [IntrinsicEvent(_DC, _DOWN, self.threshold, price, timestamp, k)]
            if price > self.extreme_price:
                self.extreme_price = price
                if self.next_ordinal:
                    level = self.os_reference_price * self._up
                    if price >= level:
                        events = []
                        k = self.next_ordinal
                        while price >= level:
                            self.os_reference_price = level
                            events.append(IntrinsicEvent(_OS, _UP, self.threshold, price, timestamp, k))
                            k += 1
                            level = level * self._up
                        self.next_ordinal = k
                        return events
            return _NO_EVENTS

        if mode is _DOWN:
            if price >= self.extreme_price * self._up:
                self.mode = _UP
                self.extreme_price = self.os_reference_price = price
                k = self.next_ordinal
                self.next_ordinal = k + 1
                return [IntrinsicEvent(_DC, _UP, self.threshold, price, timestamp, k)]
            if price < self.extreme_price:
                self.extreme_price = price
                if self.next_ordinal:
                    level = self.os_reference_price * self._down
                    if price <= level:
                        events = []
                        k = self.next_ordinal
                        while price <= level:
                            self.os_reference_price = level
                            events.append(IntrinsicEvent(_OS, _DOWN, self.threshold, price, timestamp, k))
                            k += 1
                            level = level * self._down
                        self.next_ordinal = k
                        return events
            return _NO_EVENTS

        if price >= self.low_price * self._up:
            self.mode = _UP
        elif price <= self.extreme_price * self._down:
            self.mode = _DOWN
        else:
            if price > self.extreme_price:
                self.extreme_price = price
            elif price < self.low_price:
                self.low_price = price
            return _NO_EVENTS
        self.extreme_price = self.low_price = self.os_reference_price = price
        return _NO_EVENTS


def new_state(threshold: float, first_tick: Tick) -> DissectionState:
    return DissectionState(threshold, first_tick)


def update(state: DissectionState, tick: Tick) -> tuple[DissectionState, list[IntrinsicEvent]]:
    """Feed one tick; returns the (mutated) state and the emitted events."""
    return state, list(state.feed(tick.timestamp, tick.price))


def dissect(series: TickSeries, threshold: float) -> list[IntrinsicEvent]:
    """All intrinsic events of ``series`` at ``threshold``, in order."""
    if len(series) == 0:
        raise EmptySeries()
    state = DissectionState(threshold, series[0])
    feed = state.feed
    events: list[IntrinsicEvent] = []
    extend = events.extend
    for ts, px in series.iter_pairs():
        out = feed(ts, px)
        if out:
            extend(out)
    return events


def format_events_csv(events: Iterable[IntrinsicEvent]) -> str:
    buf = io.StringIO()
    buf.write(EVENTS_HEADER + "\n")
    for ev in events:
        buf.write(
            f"{ev.ordinal},{ev.timestamp},{ev.kind.value},{ev.direction.value},"
            f"{ev.threshold!r},{ev.price!r}\n"
        )
    return buf.getvalue()


def write_events_csv(events: Iterable[IntrinsicEvent], path: Union[str, PathLike]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_events_csv(events))
