"""Exception types shared across the package."""


class PinchlabError(Exception):
    """Base class for all library errors."""


class DomainError(PinchlabError):
    """Input outside the supported domain of an operation."""


class PoleError(DomainError):
    """Evaluation at or too close to a pole of a meromorphic family."""


class DegenerateInputError(PinchlabError):
    """Geometric input degenerates (vanishing self-product, zero height, ...)."""


class ToleranceNotMetError(PinchlabError):
    """A certified computation could not reach the requested tolerance."""

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BudgetExceededError(PinchlabError):
    """An enumeration outgrew its configured budget.

    Carries the partial result and the radius up to which it is certified.
    """

    def __init__(self, message, partial=None, certified_r=None):
        super().__init__(message)
        self.partial = partial
        self.certified_r = certified_r


class GraphError(PinchlabError):
    """Invalid augmented graph or label data."""
