"""Exception hierarchy.

Two families map onto the CLI exit codes: :class:`DataError` (exit 2) for
problems with the input data, :class:`ConfigError` (exit 3) for parameters
that cannot be satisfied.
"""


class VBPBBError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DataError(VBPBBError, ValueError):
    exit_code = 2


class ConfigError(VBPBBError, ValueError):
    exit_code = 3


class InvalidPeriodError(ConfigError):
    pass


class InvalidParameterError(ConfigError):
    pass


class BoundsError(DataError, IndexError):
    pass


class NonFiniteError(DataError):
    pass


class InsufficientDataError(DataError):
    """Series shorter than a filter window."""

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class InsufficientCyclesError(DataError):
    pass


class IncompleteCycleError(DataError):
    pass


class InfeasibleBandwidthError(ConfigError):
    def __init__(self, message: str, required_n: int):
        super().__init__(message)
        self.required_n = required_n


class DuplicateFrequencyError(ConfigError):
    pass


class IncompatibleEnsemblesError(ConfigError):
    pass


class UndefinedCorrelationError(DataError):
    pass


class IngestError(DataError):
    """Raised on malformed CSV input; ``row`` is the 1-based file line."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DuplicateDateError(IngestError):
    pass


class GapError(IngestError):
    pass
