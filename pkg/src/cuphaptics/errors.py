"""Exception types shared across the package."""


class CupHapticsError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(CupHapticsError):
    """A numeric input is non-finite or violates a value constraint."""


class ConfigError(CupHapticsError):
    """A configuration object or flag combination is unusable."""


class CsvParseError(CupHapticsError):
    """A dataset file failed to parse.

    Carries the 1-based file line and the offending column name so the
    message pinpoints the bad cell.
    """

    def __init__(self, message: str, *, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ModelFormatError(CupHapticsError):
    """A model file is truncated, corrupt, or of an unsupported version."""


class DegenerateChannelError(CupHapticsError):
    """A feature channel has zero spread and cannot be standardized."""
