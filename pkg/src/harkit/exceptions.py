"""Exception hierarchy shared across the toolkit."""


class HarError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(HarError, ValueError):
    """Invalid parameter combination (window size, kernel, overlap, ...)."""


class InputError(HarError, ValueError):
    """Malformed numeric input passed to a feature or metric operation."""


class ExtractionError(HarError):
    """A computed feature came out non-finite."""

    def __init__(self, feature, message=None):
        self.feature = feature
        super().__init__(message or f"feature {feature!r} is not finite")


class LoadError(HarError):
    """A data file could not be parsed or validated.

    ``line`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class SchemaError(LoadError):
    """Column set does not match an accepted feature schema."""

    def __init__(self, message, missing=(), extra=(), path=None):
        self.missing = list(missing)
        self.extra = list(extra)
        detail = []
        if self.missing:
            detail.append("missing columns: " + ", ".join(self.missing))
        if self.extra:
            detail.append("unexpected columns: " + ", ".join(self.extra))
        if detail:
            message = message + " (" + "; ".join(detail) + ")"
        super().__init__(message, path=path)


class ModelFormatError(HarError):
    """Model file is truncated, corrupt or from an incompatible version."""
