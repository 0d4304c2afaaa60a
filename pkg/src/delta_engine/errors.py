"""Exception types raised across the package.

Everything derives from :class:`DeltaEngineError`. Input and validation
problems also derive from :class:`ValueError` so callers can catch them the
usual way; the CLI maps them to exit code 1.
"""

from __future__ import annotations


class DeltaEngineError(Exception):
    """Base class for all package errors."""


class InputError(DeltaEngineError, ValueError):
    """Invalid data, parameters or configuration."""


# --- tick ingest ---------------------------------------------------------


class MalformedRow(InputError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        msg = f"malformed row at line {line}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonMonotonicTimestamp(InputError):
    def __init__(self, line: int):
        self.line = line
        super().__init__(f"timestamp decreases at line {line}")


class EmptyInput(InputError):
    def __init__(self):
        super().__init__("no data rows")


class EmptySeries(InputError):
    def __init__(self):
        super().__init__("tick series is empty")


class InvalidParams(InputError):
    pass


# --- intrinsic time ------------------------------------------------------


class InvalidThreshold(InputError):
    def __init__(self, delta):
        self.delta = delta
        super().__init__(f"threshold must satisfy 0 < delta < 1, got {delta!r}")


class StaleTick(InputError):
    def __init__(self, timestamp: int, last: int):
        self.timestamp = timestamp
        self.last = last
        super().__init__(f"tick at {timestamp} precedes previous tick at {last}")


class ThresholdMismatch(InputError):
    pass


# --- scaling laws --------------------------------------------------------


class InsufficientPoints(InputError):
    pass


class DegenerateX(InputError):
    pass


class NonPositiveValue(InputError):
    pass


class NoEvents(InputError):
    def __init__(self, delta: float):
        self.delta = delta
        super().__init__(f"no directional changes at threshold {delta!r}")


class EmptyWindow(InputError):
    pass


class InsufficientData(InputError):
    pass


# --- trend lines ---------------------------------------------------------


class InsufficientEvents(InputError):
    pass


class OrdinalBeforeAnchor(InputError):
    def __init__(self, ordinal: int, anchor: int):
        self.ordinal = ordinal
        self.anchor = anchor
        super().__init__(f"ordinal {ordinal} precedes line anchor {anchor}")


# --- engine --------------------------------------------------------------


class EngineInvariantError(DeltaEngineError, AssertionError):
    """Raised if the position machine ever leaves its allowed states."""


# --- config --------------------------------------------------------------


class ParseError(InputError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class ValidationError(InputError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class UnknownKey(InputError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown config key {name!r}")
