"""Exception types shared across the package."""


class SuccabsError(Exception):
    """Base class for all errors raised by this package."""


class CorpusParseError(SuccabsError):
    """Malformed corpus input. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(SuccabsError):
    """Input violates a documented precondition or invariant."""


class ModelFormatError(SuccabsError):
    """Model file is missing, truncated, or not in a supported format."""
