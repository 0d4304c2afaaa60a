"""Intrinsic-time analysis and the Delta Engine trading core."""

from .backtest import BacktestReport, emit_reports, run_backtest
from .config import RunConfig, dump_config, load_config
from .engine import Agent, AgentConfig, Engine, Signal, TradeDirection, TradeRecord, run_engine
from .errors import DeltaEngineError, InputError
from .intrinsic_time import Direction, DissectionState, EventKind, IntrinsicEvent, dissect
from .scaling_laws import (
    avg_overshoot_law,
    bridging_check,
    dc_count_law,
    fit_power_law,
    volatility_proxy,
)
from .ticks import GbmParams, Tick, TickSeries, emit_tick_csv, generate_gbm, parse_tick_csv
from .trend_lines import LineKind, TrendLine, detect_breakout, evaluate_line, fit_trend_line

__all__ = [
    "Agent",
    "AgentConfig",
    "BacktestReport",
    "DeltaEngineError",
    "Direction",
    "DissectionState",
    "Engine",
    "EventKind",
    "GbmParams",
    "InputError",
    "IntrinsicEvent",
    "LineKind",
    "RunConfig",
    "Signal",
    "Tick",
    "TickSeries",
    "TradeDirection",
    "TradeRecord",
    "TrendLine",
    "avg_overshoot_law",
    "bridging_check",
    "dc_count_law",
    "detect_breakout",
    "dissect",
    "dump_config",
    "emit_reports",
    "emit_tick_csv",
    "evaluate_line",
    "fit_power_law",
    "fit_trend_line",
    "generate_gbm",
    "load_config",
    "parse_tick_csv",
    "run_backtest",
    "run_engine",
    "volatility_proxy",
]
