"""Delta Engine: per-threshold agents and the contrarian u/2u position machine.

Each :class:`Agent` owns one threshold. On every tick it advances its
dissection, refits resistance/support lines when a new overshoot arrives,
and (unless silenced) tests the tick price against every line at its
current event ordinal. A breakout is *contrarian* when its direction is
opposite to the agent's current intrinsic mode.

:class:`Engine` consumes the signals of one tick. Only contrarian signals
count. The first one opens a position of size ``u`` in the breakout
direction; afterwards only a contrarian signal opposing the open position
trades, with size ``2u``, so exposure flips between ``+u`` and ``-u``.
Trading decisions never look at PnL.

Agents silence themselves when their DC rate over the last ``vol_window``
drifts away from their full-history rate by more than ``kappa`` times the
latter.
"""

from __future__ import annotations

import enum
import io
import math
from collections import deque
from dataclasses import dataclass
from itertools import islice
from os import PathLike
from typing import Callable, Iterable, NamedTuple, Sequence, Union

from .errors import EngineInvariantError, InputError
from .intrinsic_time import Direction, DissectionState, EventKind, IntrinsicEvent, check_threshold
from .ticks import Tick, TickSeries
from .trend_lines import Breakout, LineKind, TrendLine, check_look_back, fit_points

NS_PER_S = 1e9
TRADES_HEADER = "timestamp,direction,size,price,threshold,cost"
EQUITY_HEADER = "timestamp,realized_pnl,mark_to_market"


class TradeDirection(enum.Enum):
    LONG = "LONG"
    SHORT = "SHORT"


@dataclass(frozen=True)
class AgentConfig:
    threshold: float
    look_backs: tuple[int, ...]
    epsilon: float = 0.0
    vol_window: int = 3600 * 10**9
    sync_band_kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "threshold", check_threshold(self.threshold))
        lbs = tuple(check_look_back(lb) for lb in self.look_backs)
        if not lbs:
            raise InputError("look_backs must not be empty")
        object.__setattr__(self, "look_backs", lbs)
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise InputError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (isinstance(self.vol_window, int) and self.vol_window > 0):
            raise InputError(f"vol_window must be a positive integer of ns, got {self.vol_window!r}")
        if not (self.sync_band_kappa > 0 and math.isfinite(self.sync_band_kappa)):
            raise InputError(f"sync_band_kappa must be > 0, got {self.sync_band_kappa!r}")


class Signal(NamedTuple):
    agent_threshold: float
    direction: Direction
    contrarian: bool
    timestamp: int
    breakout: Breakout


_UP, _DOWN = Direction.UP, Direction.DOWN
_DC = EventKind.DC
_NO_SIGNALS: tuple[Signal, ...] = ()


class Agent:
    """One threshold's view of the market. Single owner; not thread-safe."""

    def __init__(self, config: AgentConfig, keep_history: bool = True):
        self.config = config
        self.dissection: DissectionState | None = None
        self.keep_history = keep_history
        self.event_history: list[IntrinsicEvent] = []
        self.silenced = False
        self.expected_dc_rate = 0.0
        self.observed_dc_rate = 0.0
        self.dc_total = 0
        self.os_total = 0

        self._look_backs = sorted(set(config.look_backs))
        depth = self._look_backs[-1]
        self._up_points: deque[tuple[int, float]] = deque(maxlen=depth)
        self._down_points: deque[tuple[int, float]] = deque(maxlen=depth)
        # current lines per kind, ordered by look-back; a look-back is fitted
        # only once all shorter ones are, so these are prefixes of _look_backs
        self._resistance: list[TrendLine] = []
        self._support: list[TrendLine] = []
        self._dc_times: deque[int] = deque()
        self._first_ts: int | None = None
        self._last_eval: int | None = None
        self._eval_step = -(-config.vol_window // 100)  # ceil(vol_window / 100)
        self.next_silence_eval: int | None = None
        # (line, log-price bound at the current ordinal, is_resistance), resistance first
        self._bounds: list[tuple[TrendLine, float, bool]] = []

    @property
    def threshold(self) -> float:
        return self.config.threshold

    @property
    def mode(self) -> Direction | None:
        return self.dissection.mode if self.dissection else None

    @property
    def lines(self) -> dict[tuple[LineKind, int], TrendLine]:
        """Current line per ``(kind, look_back)`` with enough history."""
        return {(ln.kind, ln.look_back): ln for ln in self._resistance + self._support}

    @property
    def current_ordinal(self) -> int:
        """Ordinal of the latest event, -1 before the first one."""
        return self.dissection.next_ordinal - 1 if self.dissection else -1

    def _refit(self, pts: deque, kind: LineKind) -> list[TrendLine]:
        n = len(pts)
        fitted = []
        for lb in self._look_backs:
            if n < lb:
                break
            recent = list(islice(pts, n - lb, None))
            fitted.append(
                fit_points([p[0] for p in recent], [p[1] for p in recent], kind, self.config.threshold)
            )
        return fitted

    def _refresh_bounds(self) -> None:
        ordinal = self.dissection.next_ordinal - 1
        eps = self.config.epsilon
        self._bounds = [(ln, ln.log_level(ordinal) + eps, True) for ln in self._resistance] + [
            (ln, ln.log_level(ordinal) - eps, False) for ln in self._support
        ]

    def on_tick(self, timestamp: int, price: float) -> Sequence[Signal]:
        """Process one tick; return the breakout signals it triggers."""
        d = self.dissection
        if d is None:
            d = self.dissection = DissectionState(self.config.threshold, Tick(timestamp, price))
            self._first_ts = self._last_eval = timestamp
            self.next_silence_eval = timestamp + self._eval_step
        events = d.feed(timestamp, price)
        if events:
            self._absorb(events)
        if self.silenced or not self._bounds:
            return _NO_SIGNALS

        # Same comparison as detect_breakout, with level +/- epsilon cached per ordinal.
        lp = math.log(price)
        out = None
        for line, bound, resistance in self._bounds:
            if resistance:
                if not lp > bound:
                    continue
                direction = _UP
            elif lp < bound:
                direction = _DOWN
            else:
                continue
            if out is None:
                out = []
                mode = d.mode
                ordinal = d.next_ordinal - 1
            out.append(
                Signal(
                    self.config.threshold,
                    direction,
                    mode is not None and direction is not mode,
                    timestamp,
                    Breakout(direction, line, price, timestamp, ordinal),
                )
            )
        return out if out is not None else _NO_SIGNALS

    def _absorb(self, events: Sequence[IntrinsicEvent]) -> None:
        if self.keep_history:
            self.event_history.extend(events)
        refit_up = refit_down = False
        for e in events:
            if e.kind is _DC:
                self.dc_total += 1
                self._dc_times.append(e.timestamp)
            else:
                self.os_total += 1
                if e.direction is _UP:
                    self._up_points.append((e.ordinal, math.log(e.price)))
                    refit_up = True
                else:
                    self._down_points.append((e.ordinal, math.log(e.price)))
                    refit_down = True
        cutoff = events[-1].timestamp - self.config.vol_window
        dq = self._dc_times
        while dq and dq[0] <= cutoff:
            dq.popleft()
        if refit_up:
            self._resistance = self._refit(self._up_points, LineKind.RESISTANCE)
        if refit_down:
            self._support = self._refit(self._down_points, LineKind.SUPPORT)
        if self._resistance or self._support:
            self._refresh_bounds()

    def silence_due(self, now: int) -> bool:
        """True once ``now`` is at least ``vol_window / 100`` past the last evaluation."""
        return self._last_eval is not None and 100 * (now - self._last_eval) >= self.config.vol_window

    def silence_update(self, now: int) -> None:
        """Re-evaluate the silencing flag from DC rates at time ``now``."""
        self._last_eval = now
        self.next_silence_eval = now + self._eval_step
        window = self.config.vol_window
        if self._first_ts is None or now - self._first_ts < window:
            self.silenced = False
            return
        cutoff = now - window
        dq = self._dc_times
        while dq and dq[0] <= cutoff:
            dq.popleft()
        # every recorded DC has a timestamp <= now
        self.observed_dc_rate = len(dq) / (window / NS_PER_S)
        self.expected_dc_rate = self.dc_total / ((now - self._first_ts) / NS_PER_S)
        deviation = abs(self.observed_dc_rate - self.expected_dc_rate)
        self.silenced = deviation > self.config.sync_band_kappa * self.expected_dc_rate


@dataclass(frozen=True)
class TradeRecord:
    timestamp: int
    direction: TradeDirection
    size: float
    price: float
    triggering_threshold: float
    cost: float


class EquityPoint(NamedTuple):
    timestamp: int
    realized_pnl: float
    mark_to_market: float


class Engine:
    """Aggregates signals into trades; exposure is always 0, +u or -u."""

    def __init__(self, unit_size: float = 1.0):
        if not (unit_size > 0 and math.isfinite(unit_size)):
            raise InputError(f"unit_size must be > 0, got {unit_size!r}")
        self.unit_size = float(unit_size)
        self.position = 0  # -1, 0 or +1 units of u
        self.trades: list[TradeRecord] = []
        self.realized_pnl = 0.0
        self.open_price: float | None = None

    @property
    def net_exposure(self) -> float:
        return self.position * self.unit_size

    def aggregate_and_trade(
        self, signals: Iterable[Signal], tick: Tick, cost_per_trade: float = 0.0
    ) -> TradeRecord | None:
        contrarian = [s for s in signals if s.contrarian]
        if not contrarian:
            return None
        if self.position == 0:
            chosen = min(contrarian, key=lambda s: s.agent_threshold)
        else:
            against = Direction.DOWN if self.position > 0 else Direction.UP
            opposing = [s for s in contrarian if s.direction is against]
            if not opposing:
                return None
            chosen = min(opposing, key=lambda s: s.agent_threshold)

        ts, price = tick
        new_position = 1 if chosen.direction is Direction.UP else -1
        if self.position == 0:
            size = self.unit_size
        else:
            size = 2.0 * self.unit_size
            self.realized_pnl += self.position * self.unit_size * (price - self.open_price)
        self.realized_pnl -= cost_per_trade
        self.position = new_position
        self.open_price = price
        trade = TradeRecord(
            ts,
            TradeDirection.LONG if new_position > 0 else TradeDirection.SHORT,
            size,
            price,
            chosen.agent_threshold,
            cost_per_trade,
        )
        if self.trades and self.trades[-1].direction is trade.direction:
            raise EngineInvariantError("consecutive trades in the same direction")
        self.trades.append(trade)
        return trade

    def mark_to_market(self, price: float) -> float:
        if self.position == 0:
            return self.realized_pnl
        return self.realized_pnl + self.net_exposure * (price - self.open_price)


Observer = Callable[[Tick, list[tuple[Agent, bool, list[Signal]]], "TradeRecord | None"], None]


def run_engine(
    series: TickSeries,
    agents: Sequence[Agent],
    engine: Engine,
    cost_per_trade: float = 0.0,
    observer: Observer | None = None,
) -> list[EquityPoint]:
    """Stream ``series`` through the agents and the engine.

    Per tick: each agent (ascending threshold) processes the tick and, when
    due, re-evaluates silencing; then the engine aggregates all signals.
    ``observer``, if given, is called after every tick with the tick, a list
    of ``(agent, silenced_when_tick_arrived, signals)`` and the trade.
    Returns equity points after each trade and at the last tick.
    """
    agents = sorted(agents, key=lambda a: a.threshold)
    equity: list[EquityPoint] = []
    ts = price = None
    for ts, price in series.iter_pairs():
        signals: list[Signal] = []
        per_agent = [] if observer is not None else None
        for agent in agents:
            was_silenced = agent.silenced
            out = agent.on_tick(ts, price)
            if out:
                signals.extend(out)
            if per_agent is not None:
                per_agent.append((agent, was_silenced, out))
            if ts >= agent.next_silence_eval:  # same as agent.silence_due(ts)
                agent.silence_update(ts)
        trade = engine.aggregate_and_trade(signals, Tick(ts, price), cost_per_trade) if signals else None
        if trade is not None:
            equity.append(EquityPoint(ts, engine.realized_pnl, engine.mark_to_market(price)))
        if observer is not None:
            observer(Tick(ts, price), per_agent, trade)
    if ts is not None:
        equity.append(EquityPoint(ts, engine.realized_pnl, engine.mark_to_market(price)))
    return equity


def format_trades_csv(trades: Iterable[TradeRecord]) -> str:
    buf = io.StringIO()
    buf.write(TRADES_HEADER + "\n")
    for t in trades:
        buf.write(
            f"{t.timestamp},{t.direction.value},{t.size!r},{t.price!r},"
            f"{t.triggering_threshold!r},{t.cost!r}\n"
        )
    return buf.getvalue()


def format_equity_csv(points: Iterable[EquityPoint]) -> str:
    buf = io.StringIO()
    buf.write(EQUITY_HEADER + "\n")
    for p in points:
        buf.write(f"{p.timestamp},{p.realized_pnl!r},{p.mark_to_market!r}\n")
    return buf.getvalue()


def write_trades_csv(trades: Iterable[TradeRecord], path: Union[str, PathLike]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_trades_csv(trades))
