"""Exception types shared across the toolkit."""


class SawkitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SawkitError, ValueError):
    """A domain object or argument violates one of its invariants."""


class ParseError(SawkitError, ValueError):
    """Malformed input text. Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FitError(SawkitError, RuntimeError):
    """A fit could not be set up, did not converge, or hit a physical bound."""
