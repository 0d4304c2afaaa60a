"""Backtest orchestration and report files.

:func:`run_backtest` loads the configured data, streams every tick through
one agent per threshold (ascending) and the engine, then adds the scaling
study over the full series. :func:`emit_reports` writes the artifacts; all
file contents depend only on the report, so reruns are byte identical.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Union

from .config import RunConfig, to_dict
from .engine import (
    Agent,
    AgentConfig,
    Engine,
    EquityPoint,
    Observer,
    TradeRecord,
    format_equity_csv,
    format_trades_csv,
    run_engine,
)
from .errors import DeltaEngineError
from .intrinsic_time import IntrinsicEvent, format_events_csv
from .scaling_laws import (
    BridgingReport,
    DissectionSummary,
    ScalingLawFit,
    bridging_check,
    fit_avg_overshoot,
    fit_dc_counts,
    summarize,
)
from .ticks import TickSeries, generate_gbm, parse_tick_csv

log = logging.getLogger("delta_engine")

PathArg = Union[str, PathLike]


@dataclass
class ScalingStudy:
    """Scaling-law results; a failed fit is kept as its error message."""

    summaries: dict[float, DissectionSummary]
    dc_count_law: ScalingLawFit | str
    avg_overshoot_law: ScalingLawFit | str
    bridging: dict[float, BridgingReport | str]

    def fits_json(self) -> dict:
        return {
            "dc_count_law": _fit_json(self.dc_count_law),
            "avg_overshoot_law": _fit_json(self.avg_overshoot_law),
        }

    def to_json(self) -> dict:
        return {
            "event_counts": {
                repr(d): {"dc_count": s.dc_count, "os_count": s.os_count} for d, s in self.summaries.items()
            },
            "mean_overshoot": {
                repr(d): (s.mean_overshoot if len(s.overshoots) else None) for d, s in self.summaries.items()
            },
            "scaling_fits": self.fits_json(),
            "bridging": {repr(d): _fit_json(b) for d, b in self.bridging.items()},
        }


@dataclass
class BacktestReport:
    config: RunConfig
    n_ticks: int
    trades: list[TradeRecord]
    equity: list[EquityPoint]
    events: dict[float, list[IntrinsicEvent]]
    study: ScalingStudy
    agents: dict[str, dict] = field(default_factory=dict)  # keyed by repr(threshold)
    realized_pnl: float = 0.0
    final_pnl: float = 0.0

    @property
    def event_counts(self) -> dict[float, tuple[int, int]]:
        return {d: (s.dc_count, s.os_count) for d, s in self.study.summaries.items()}

    def to_json(self) -> dict:
        return {
            "config": to_dict(self.config),
            "n_ticks": self.n_ticks,
            **self.study.to_json(),
            "agents": self.agents,
            "n_trades": len(self.trades),
            "trades": [
                {
                    "timestamp": t.timestamp,
                    "direction": t.direction.value,
                    "size": t.size,
                    "price": t.price,
                    "threshold": t.triggering_threshold,
                    "cost": t.cost,
                }
                for t in self.trades
            ],
            "realized_pnl": self.realized_pnl,
            "final_pnl": self.final_pnl,
        }


def _fit_json(result) -> dict:
    return {"error": result} if isinstance(result, str) else result.to_json()


def _attempt(fn, *args):
    try:
        return fn(*args)
    except DeltaEngineError as exc:
        return f"{type(exc).__name__}: {exc}"


def load_series(config: RunConfig, base_dir: PathArg | None = None) -> TickSeries:
    """Tick data named by ``config``; relative CSV paths resolve against ``base_dir``."""
    if config.gbm is not None:
        return generate_gbm(config.gbm)
    path = Path(config.data_csv)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return parse_tick_csv(path.read_bytes(), instrument=config.instrument)


def scaling_study(series: TickSeries, config: RunConfig) -> ScalingStudy:
    summaries = {d: summarize(series, d) for d in config.thresholds}
    ordered = list(summaries.values())
    if len(ordered) < 2:
        dc_law = avg_law = "InsufficientPoints: need at least 2 thresholds"
    else:
        dc_law = _attempt(fit_dc_counts, ordered)
        avg_law = _attempt(fit_avg_overshoot, ordered)
    bridging = {
        d: _attempt(bridging_check, series, d, config.sampling_interval, config.bridging_calibration, s)
        for d, s in summaries.items()
    }
    return ScalingStudy(summaries, dc_law, avg_law, bridging)


def run_backtest(
    config: RunConfig,
    series: TickSeries | None = None,
    base_dir: PathArg | None = None,
    observer: Observer | None = None,
) -> BacktestReport:
    if series is None:
        series = load_series(config, base_dir)
    log.info("backtest: %d ticks, thresholds %s", len(series), list(config.thresholds))
    agents = [
        Agent(AgentConfig(d, config.look_backs, config.epsilon, config.vol_window, config.sync_band_kappa))
        for d in config.thresholds
    ]
    engine = Engine(config.unit_size)
    equity = run_engine(series, agents, engine, config.cost_per_trade, observer)
    log.info("backtest: %d trades", len(engine.trades))

    study = scaling_study(series, config)
    final_pnl = equity[-1].mark_to_market if equity else 0.0
    return BacktestReport(
        config=config,
        n_ticks=len(series),
        trades=engine.trades,
        equity=equity,
        events={a.threshold: a.event_history for a in agents},
        study=study,
        agents={
            repr(a.threshold): {
                "silenced": a.silenced,
                "expected_dc_rate": a.expected_dc_rate,
                "observed_dc_rate": a.observed_dc_rate,
                "lines": [a.lines[k].to_json() for k in sorted(a.lines, key=lambda k: (k[0].value, k[1]))],
            }
            for a in agents
        },
        realized_pnl=engine.realized_pnl,
        final_pnl=final_pnl,
    )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def events_filename(delta: float) -> str:
    return f"events_{delta!r}.csv"


def emit_reports(report: BacktestReport, output_dir: PathArg) -> set[Path]:
    """Write every report file into ``output_dir`` (created if needed)."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {
        _write(out / "trades.csv", format_trades_csv(report.trades)),
        _write(out / "equity_curve.csv", format_equity_csv(report.equity)),
        _write(out / "scaling_fits.json", _dumps(report.study.fits_json())),
        _write(out / "report.json", _dumps(report.to_json())),
    }
    for delta, events in report.events.items():
        written.add(_write(out / events_filename(delta), format_events_csv(events)))
    log.info("wrote %d files to %s", len(written), out)
    return written


def emit_study(study: ScalingStudy, output_dir: PathArg) -> set[Path]:
    """Write ``scaling_fits.json`` and the fuller ``scaling_study.json``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return {
        _write(out / "scaling_fits.json", _dumps(study.fits_json())),
        _write(out / "scaling_study.json", _dumps(study.to_json())),
    }
