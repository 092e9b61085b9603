"""Exception types shared across the package."""


class SpinloopError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SpinloopError, ValueError):
    """Invalid input data, configuration, or arguments."""


class ParseError(ValidationError):
    """Malformed text input; message carries the offending line number."""
