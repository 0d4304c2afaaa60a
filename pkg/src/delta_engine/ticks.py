"""Tick data: CSV round-tripping and seeded GBM paths.

CSV format (read and written byte-for-byte)::

    timestamp,price
    1000,100.0
    2000,101.5

Timestamps are integer nanoseconds, prices are written with Python's
shortest round-trip ``repr`` so ``parse_tick_csv(emit_tick_csv(s)) == s``.
No filtering of gaps or outliers is applied to loaded data.
"""

from __future__ import annotations

import io
import itertools
import math
import re
from dataclasses import dataclass
from os import PathLike
from typing import IO, Iterator, NamedTuple, Union

import numpy as np

from .errors import (
    EmptyInput,
    EmptySeries,
    InvalidParams,
    MalformedRow,
    NonMonotonicTimestamp,
)
from .rng import standard_normals

HEADER = "timestamp,price"
_ROW = re.compile(r"(-?[0-9]+),([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)")

Source = Union[bytes, str, IO[bytes], IO[str]]


class Tick(NamedTuple):
    timestamp: int
    price: float


@dataclass(frozen=True, eq=False)
class TickSeries:
    """Immutable ordered ticks for one instrument.

    Backed by read-only numpy arrays; iterating yields :class:`Tick`.
    """

    timestamps: np.ndarray
    prices: np.ndarray
    instrument: str = ""

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=np.int64)
        px = np.array(self.prices, dtype=np.float64)
        if ts.ndim != 1 or ts.shape != px.shape:
            raise InvalidParams("timestamps and prices must be 1-d arrays of equal length")
        if len(px) and not (np.all(np.isfinite(px)) and np.all(px > 0)):
            raise InvalidParams("prices must be finite and positive")
        if len(ts) > 1 and np.any(np.diff(ts) < 0):
            raise InvalidParams("timestamps must be non-decreasing")
        ts.setflags(write=False)
        px.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)

    def __len__(self) -> int:
        return len(self.prices)

    def __iter__(self) -> Iterator[Tick]:
        return itertools.starmap(Tick, self.iter_pairs())

    def iter_pairs(self, chunk: int = 1 << 16) -> Iterator[tuple[int, float]]:
        """Yield ``(timestamp, price)`` as Python scalars, converting in chunks."""
        ts, px = self.timestamps, self.prices
        for i in range(0, len(px), chunk):
            yield from zip(ts[i : i + chunk].tolist(), px[i : i + chunk].tolist())

    def __getitem__(self, i: int) -> Tick:
        return Tick(int(self.timestamps[i]), float(self.prices[i]))

    def __eq__(self, other):
        if not isinstance(other, TickSeries):
            return NotImplemented
        return (
            self.instrument == other.instrument
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.prices, other.prices)
        )

    __hash__ = None


@dataclass(frozen=True)
class GbmParams:
    s0: float = 100.0
    mu: float = 0.0
    sigma: float = 0.0
    dt: float = 1.0
    n: int = 1
    seed: int = 0
    instrument: str = "GBM"

    def validate(self) -> None:
        checks = [
            (math.isfinite(self.s0) and self.s0 > 0, "s0 must be > 0"),
            (math.isfinite(self.mu), "mu must be finite"),
            (math.isfinite(self.sigma) and self.sigma >= 0, "sigma must be >= 0"),
            (math.isfinite(self.dt) and self.dt > 0, "dt must be > 0"),
            (isinstance(self.n, int) and self.n >= 1, "n must be an integer >= 1"),
            (
                isinstance(self.seed, int) and 0 <= self.seed < 2**64,
                "seed must be a 64-bit unsigned integer",
            ),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidParams(msg)


def generate_gbm(params: GbmParams) -> TickSeries:
    """Simulate ``n`` exact GBM steps, returning ``n + 1`` ticks.

    Price ``i`` is ``s0 * exp((mu - sigma**2 / 2) * dt * i + sigma * sqrt(dt) * W_i)``
    with ``W_i`` the running sum of the first ``i`` normals from
    :func:`delta_engine.rng.standard_normals`; this is the closed form of
    the per-step update ``S_{i+1} = S_i * exp(drift * dt + sigma * sqrt(dt) * Z_i)``.
    Tick ``i`` is stamped ``round(i * dt * 1e9)`` ns.
    """
    params.validate()
    n = params.n
    drift = (params.mu - 0.5 * params.sigma**2) * params.dt
    vol = params.sigma * math.sqrt(params.dt)
    steps = np.arange(n + 1, dtype=np.float64)
    walk = np.zeros(n + 1)
    if vol != 0.0:
        np.cumsum(standard_normals(params.seed, n), out=walk[1:])
    log_path = drift * steps + vol * walk
    prices = params.s0 * np.exp(log_path)
    prices[0] = params.s0
    timestamps = np.rint(steps * params.dt * 1e9).astype(np.int64)
    return TickSeries(timestamps, prices, params.instrument)


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def parse_tick_csv(source: Source, instrument: str = "") -> TickSeries:
    """Parse the ``timestamp,price`` CSV format.

    ``source`` may be bytes, text, or an open file. Line numbers in errors
    are 1-based and count the header as line 1.
    """
    lines = _read_text(source).split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EmptyInput()
    if lines[0].rstrip("\r") != HEADER:
        raise MalformedRow(1, f"expected header {HEADER!r}")

    timestamps: list[int] = []
    prices: list[float] = []
    last = None
    for lineno, line in enumerate(lines[1:], start=2):
        m = _ROW.fullmatch(line.rstrip("\r"))
        if m is None:
            raise MalformedRow(lineno, f"expected '<ns>,<decimal>', got {line!r}")
        ts = int(m.group(1))
        px = float(m.group(2))
        if not (math.isfinite(px) and px > 0):
            raise MalformedRow(lineno, "price must be finite and positive")
        if last is not None and ts < last:
            raise NonMonotonicTimestamp(lineno)
        last = ts
        timestamps.append(ts)
        prices.append(px)
    if not timestamps:
        raise EmptyInput()
    return TickSeries(np.array(timestamps, dtype=np.int64), np.array(prices), instrument)


def format_tick_csv(series: TickSeries) -> str:
    if len(series) == 0:
        raise EmptySeries()
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    for ts, px in zip(series.timestamps.tolist(), series.prices.tolist()):
        buf.write(f"{ts},{px!r}\n")
    return buf.getvalue()


def emit_tick_csv(series: TickSeries, path: Union[str, PathLike]) -> None:
    """Write ``series`` in the format :func:`parse_tick_csv` reads."""
    text = format_tick_csv(series)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
