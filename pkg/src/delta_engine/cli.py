"""``delta-engine`` command line.

Subcommands::

    delta-engine run --config CFG        full backtest, files into output_dir
    delta-engine laws --config CFG       scaling study only
    delta-engine dissect --data CSV --delta X [--out CSV]
    delta-engine gen-gbm --seed .. --n .. --sigma .. --mu .. --s0 .. --dt .. --out CSV

Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.
``DELTA_ENGINE_LOG`` (error, info or debug) sets stderr verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .backtest import emit_reports, emit_study, load_series, run_backtest, scaling_study
from .config import load_config
from .errors import DeltaEngineError
from .intrinsic_time import dissect, format_events_csv
from .ticks import GbmParams, emit_tick_csv, generate_gbm, parse_tick_csv

log = logging.getLogger("delta_engine")

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 1, 2
_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = _LEVELS.get(os.environ.get("DELTA_ENGINE_LOG", "error").strip().lower(), logging.ERROR)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False


def _load(path: str):
    cfg_path = Path(path)
    return load_config(cfg_path.read_bytes()), cfg_path.parent


def cmd_run(args) -> int:
    config, base = _load(args.config)
    report = run_backtest(config, base_dir=base)
    for path in sorted(emit_reports(report, config.output_dir)):
        print(path)
    return EXIT_OK


def cmd_laws(args) -> int:
    config, base = _load(args.config)
    study = scaling_study(load_series(config, base), config)
    emit_study(study, config.output_dir)
    sys.stdout.write(json.dumps(study.fits_json(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_dissect(args) -> int:
    series = parse_tick_csv(Path(args.data).read_bytes())
    text = format_events_csv(dissect(series, args.delta))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_gbm(args) -> int:
    params = GbmParams(
        s0=args.s0, mu=args.mu, sigma=args.sigma, dt=args.dt, n=args.n, seed=args.seed
    )
    params.validate()
    emit_tick_csv(generate_gbm(params), args.out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # bad command-line usage is invalid input: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="delta-engine", description="Intrinsic-time backtesting engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a full backtest")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("laws", help="scaling-law study only")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("dissect", help="intrinsic events of a tick CSV at one threshold")
    p.add_argument("--data", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out", help="output CSV (default: standard output)")
    p.set_defaults(func=cmd_dissect)

    p = sub.add_parser("gen-gbm", help="write a seeded GBM tick CSV")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--s0", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_gbm)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DeltaEngineError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
