"""Exception hierarchy shared by the pipeline stages."""

from __future__ import annotations


class FallDetectError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FallDetectError, ValueError):
    pass


class ParseError(FallDetectError, ValueError):
    """Malformed filename or recording content.

    ``path`` and ``line`` are filled in when known so the CLI can point at
    the offending input.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        self._message = message
        super().__init__(where + message)

    def __reduce__(self):
        return (type(self), (self._message, self.path, self.line))


class EmptyRecordingError(ParseError):
    pass


class FilterDesignError(FallDetectError, ValueError):
    pass


class SignalError(FallDetectError, ValueError):
    pass


class CacheError(FallDetectError, ValueError):
    pass


class TrainingError(FallDetectError, RuntimeError):
    pass


class ConvergenceError(TrainingError):
    def __init__(self, message: str, max_violation: float):
        self.max_violation = max_violation
        self._message = message
        super().__init__(f"{message} (max KKT violation {max_violation:.3g})")

    def __reduce__(self):
        return (type(self), (self._message, self.max_violation))


class UndefinedMetricError(FallDetectError, ZeroDivisionError):
    pass


class ReportError(FallDetectError, ValueError):
    pass
