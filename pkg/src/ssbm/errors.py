"""Exception hierarchy shared by the library and the command line."""


class SSBMError(Exception):
    """Base class for every error raised deliberately by this package."""


class ValidationError(SSBMError, ValueError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(SSBMError, ValueError):
    pass


class ConfigurationError(SSBMError, ValueError):
    pass


class EvaluationError(SSBMError, ValueError):
    """Raised when a spin configuration still holds indeterminate entries."""


class QueryError(SSBMError, LookupError):
    pass


class SizeError(SSBMError):
    """Raised when an exact computation is refused because the instance is too large."""
