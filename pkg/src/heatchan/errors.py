"""Exception hierarchy shared across the package."""


class HeatchanError(Exception):
    """Base class for package errors."""


class SpecValidationError(HeatchanError, ValueError):
    """Invalid user-supplied parameters (bad family parameter, bad flag value)."""


class NumericError(HeatchanError):
    """A computation cannot proceed (divergent sum, failed precondition)."""


class DivergentSumError(NumericError):
    """A coefficient sum required to be finite diverges."""


class PreconditionError(NumericError):
    """A validated mathematical precondition fails; carries the failing index."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResourceLimitError(HeatchanError):
    """A requested computation exceeds the configured memory budget."""
