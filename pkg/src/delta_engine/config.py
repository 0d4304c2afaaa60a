"""Flat ``key = value`` run configuration.

One setting per line; blank lines and lines starting with ``#`` are
ignored; lists are comma separated. Example::

    # 10^6 one-second GBM ticks
    gbm_sigma = 0.002
    gbm_n = 1000000
    gbm_seed = 42
    thresholds = 0.001, 0.002, 0.004
    look_backs = 3, 6

The data source is either ``data_csv`` or any of the ``gbm_*`` keys, never
both. Time spans (``vol_window``, ``sampling_interval``) are nanoseconds.
``bridging_calibration`` is the factor applied to ``N_DC * mean(omega**2)``
in the bridging check (0.5 for finely sampled prices).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from typing import BinaryIO, Callable, TextIO, Union

from .errors import DeltaEngineError, ParseError, UnknownKey, ValidationError
from .scaling_laws import CONTINUUM_BRIDGING_CONSTANT
from .ticks import GbmParams

_KEY = re.compile(r"[a-z][a-z0-9_]*")

GBM_KEYS = {
    "gbm_s0": "s0",
    "gbm_mu": "mu",
    "gbm_sigma": "sigma",
    "gbm_dt": "dt",
    "gbm_n": "n",
    "gbm_seed": "seed",
}


@dataclass(frozen=True)
class RunConfig:
    thresholds: tuple[float, ...]
    data_csv: str | None = None
    gbm: GbmParams | None = None
    instrument: str = ""
    look_backs: tuple[int, ...] = (3, 6)
    epsilon: float = 0.0
    unit_size: float = 1.0
    vol_window: int = 3600 * 10**9
    sync_band_kappa: float = 1.0
    cost_per_trade: float = 0.0
    sampling_interval: int = 3600 * 10**9
    bridging_calibration: float = CONTINUUM_BRIDGING_CONSTANT
    output_dir: str = "output"

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(self.thresholds))
        object.__setattr__(self, "look_backs", tuple(self.look_backs))
        validate(self)


def _float(name: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(name, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValidationError(name, "must be finite")
    return value


def _int(name: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    value = _float(name, text)
    if not value.is_integer():
        raise ValidationError(name, f"not an integer: {text!r}")
    return int(value)


def _list(conv: Callable[[str, str], float]) -> Callable[[str, str], tuple]:
    def parse(name: str, text: str) -> tuple:
        items = [t.strip() for t in text.split(",")]
        if any(not t for t in items):
            raise ValidationError(name, "empty list item")
        return tuple(conv(name, t) for t in items)

    return parse


def _str(name: str, text: str) -> str:
    return text


_PARSERS: dict[str, Callable[[str, str], object]] = {
    "data_csv": _str,
    "instrument": _str,
    "thresholds": _list(_float),
    "look_backs": _list(_int),
    "epsilon": _float,
    "unit_size": _float,
    "vol_window": _int,
    "sync_band_kappa": _float,
    "cost_per_trade": _float,
    "sampling_interval": _int,
    "bridging_calibration": _float,
    "output_dir": _str,
    "gbm_s0": _float,
    "gbm_mu": _float,
    "gbm_sigma": _float,
    "gbm_dt": _float,
    "gbm_n": _int,
    "gbm_seed": _int,
}


def validate(cfg: RunConfig) -> None:
    ths = cfg.thresholds
    if not ths:
        raise ValidationError("thresholds", "at least one threshold is required")
    if any(not (0.0 < d < 1.0) for d in ths):
        raise ValidationError("thresholds", "every threshold must lie in (0, 1)")
    if any(b <= a for a, b in zip(ths, ths[1:])):
        raise ValidationError("thresholds", "must be strictly increasing")
    if not cfg.look_backs or any(isinstance(k, bool) or not isinstance(k, int) or k < 2 for k in cfg.look_backs):
        raise ValidationError("look_backs", "need at least one integer >= 2")
    if (cfg.data_csv is None) == (cfg.gbm is None):
        raise ValidationError("data_source", "set exactly one of data_csv or gbm_* keys")
    if cfg.data_csv is not None and not cfg.data_csv:
        raise ValidationError("data_csv", "empty path")
    if cfg.gbm is not None:
        try:
            cfg.gbm.validate()
        except DeltaEngineError as exc:
            raise ValidationError("gbm", str(exc)) from None
    if not cfg.epsilon >= 0:
        raise ValidationError("epsilon", "must be >= 0")
    if not cfg.unit_size > 0:
        raise ValidationError("unit_size", "must be > 0")
    if not cfg.sync_band_kappa > 0:
        raise ValidationError("sync_band_kappa", "must be > 0")
    if not cfg.cost_per_trade >= 0:
        raise ValidationError("cost_per_trade", "must be >= 0")
    if not cfg.vol_window > 0:
        raise ValidationError("vol_window", "must be > 0")
    if not cfg.sampling_interval > 0:
        raise ValidationError("sampling_interval", "must be > 0")
    if not cfg.bridging_calibration > 0:
        raise ValidationError("bridging_calibration", "must be > 0")
    if not cfg.output_dir:
        raise ValidationError("output_dir", "empty path")


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not _KEY.fullmatch(key):
            raise ParseError(lineno, f"expected 'key = value', got {raw!r}")
        if key not in _PARSERS:
            raise UnknownKey(key)
        if key in values:
            raise ParseError(lineno, f"duplicate key {key!r}")
        if not value:
            raise ParseError(lineno, f"missing value for {key!r}")
        values[key] = _PARSERS[key](key, value)

    if "thresholds" not in values:
        raise ValidationError("thresholds", "missing")
    gbm_args = {GBM_KEYS[k]: values.pop(k) for k in list(values) if k in GBM_KEYS}
    instrument = values.get("instrument", "")
    gbm = None
    if gbm_args:
        gbm = GbmParams(**gbm_args, instrument=instrument or "GBM")
    return RunConfig(gbm=gbm, **values)


def load_config(source: Union[bytes, str, BinaryIO, TextIO]) -> RunConfig:
    """Parse and validate a configuration from bytes, text or a file object."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(source[: exc.start].count(b"\n") + 1, "invalid UTF-8") from None
    return parse_config(source)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def to_dict(cfg: RunConfig) -> dict[str, object]:
    """Config as the flat key/value mapping of the file format (lists stay lists)."""
    out: dict[str, object] = {}
    if cfg.data_csv is not None:
        out["data_csv"] = cfg.data_csv
    if cfg.gbm is not None:
        for key, attr in GBM_KEYS.items():
            out[key] = getattr(cfg.gbm, attr)
    for f in fields(cfg):
        if f.name in ("data_csv", "gbm"):
            continue
        value = getattr(cfg, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def dump_config(cfg: RunConfig) -> str:
    """Render ``cfg`` so that ``load_config(dump_config(cfg)) == cfg``."""
    lines = []
    for key, value in to_dict(cfg).items():
        if key == "instrument" and not value:
            continue
        lines.append(f"{key} = {_fmt(tuple(value) if isinstance(value, list) else value)}")
    return "\n".join(lines) + "\n"
