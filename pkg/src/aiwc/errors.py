"""Exception types shared across the aiwc package."""

from __future__ import annotations


class AiwcError(Exception):
    """Base class for all aiwc errors."""


class MalformedEvent(AiwcError):
    """A trace line could not be decoded into an event."""

    def __init__(self, reason: str, line_no: int | None = None):
        self.reason = reason
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{reason}")


class ParseError(AiwcError):
    """Kernel source rejected; `line` is 1-based."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class UndefinedLabel(ParseError):
    pass


class UseBeforeDef(ParseError):
    pass


class MissingTerminator(ParseError):
    pass


class ConfigError(AiwcError):
    """Invalid NDRange launch configuration."""


class SimulationError(AiwcError):
    """Fault raised while executing a kernel; `line` is the source line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)


class BarrierDivergence(SimulationError):
    pass


class OutOfBoundsAccess(SimulationError):
    def __init__(self, buffer: str, index: int, line: int | None = None):
        self.buffer = buffer
        self.index = index
        super().__init__(f"line {line}: out-of-bounds access to '{buffer}' at index {index}", line)


class StepLimitExceeded(AiwcError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"instruction step limit of {limit} exceeded")


class InvalidStream(AiwcError):
    """A trace violating the stream invariants was fed to the metrics engine."""

    def __init__(self, event_index: int, rule: str, detail: str = ""):
        self.event_index = event_index
        self.rule = rule
        msg = f"event {event_index}: {rule}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class TraceTooLarge(AiwcError):
    def __init__(self, entries: int, cap: int):
        self.entries = entries
        self.cap = cap
        super().__init__(
            f"trace state exceeds the in-memory cap ({entries} > {cap} entries); "
            "raise AIWC_MEM_CAP_BYTES to allow more"
        )


class EmptyHistogram(AiwcError):
    pass


class InvalidSkip(AiwcError):
    pass


class NoBranches(AiwcError):
    pass


class EmptySample(AiwcError):
    pass


class EmptySuite(AiwcError):
    pass


class IncompatibleReports(AiwcError):
    pass


class SchemaError(AiwcError):
    """A report or comparison file does not match its published schema."""
