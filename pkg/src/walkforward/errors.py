"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes; library code raises them
directly so callers can distinguish bad configuration from bad data.
"""


class WalkforwardError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(WalkforwardError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class DataError(WalkforwardError):
    """Market data could not be loaded or failed validation (CLI exit code 3)."""


class ParseError(DataError):
    """A data file could not be parsed.

    Attributes:
        line_number: 1-based line number of the offending row, if known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ValidationError(DataError):
    """Parsed data violated a contract (ordering, positivity, alignment)."""


class EngineError(WalkforwardError):
    """A walk-forward run could not produce a result (e.g. no valid segment)."""


class SegmentError(EngineError):
    """Optimization failed for a single walk-forward segment."""


class UnseenLockError(WalkforwardError):
    """Refusal to re-run an unseen-data evaluation (CLI exit code 4)."""
