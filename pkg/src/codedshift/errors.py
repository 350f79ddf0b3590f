"""Exception types shared across the package."""


class CodedShiftError(Exception):
    """Base class for errors raised by this package."""


class DivergenceError(CodedShiftError):
    """A series was evaluated outside its certified convergence region."""


class NoRootError(CodedShiftError):
    """The characteristic equation has no root in the search region.

    Carries the best lower estimate of the series supremum and the depth at
    which the search gave up, so callers can report a status instead of a
    number.
    """

    def __init__(self, message, sup_estimate=None, depth=None):
        super().__init__(message)
        self.sup_estimate = sup_estimate
        self.depth = depth


class GurevichError(CodedShiftError):
    """The length-weighted generator series could not be certified finite.

    Raised when constructing a maximal-entropy measure whose normalizer
    sum(|g| p_g) cannot be bounded by the available tail certificate.
    """


class BudgetError(CodedShiftError):
    """An enumeration or state budget was exceeded."""

    def __init__(self, message, at=None):
        super().__init__(message)
        self.at = at


class SamplerError(CodedShiftError):
    """The truncated sampling distribution failed a shortfall check."""
