"""Exception types shared across the package."""


class SugmError(Exception):
    """Base class for all package errors."""


class SpecError(SugmError, ValueError):
    """A model specification is structurally malformed."""


class DomainError(SugmError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(SugmError):
    """The requested computation exceeds a configured size budget."""


class ConvergenceError(SugmError):
    """An iterative method did not converge within its iteration budget.

    ``last`` holds the final iterate (or estimate) so callers can inspect it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last
