from typing import Any, Optional


class SamplerToolkitError(Exception):
    """Базовое исключение пакета"""

    def __init__(self, detail: str, context: Optional[dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.context = context or {}


class InvalidMeasureError(SamplerToolkitError):
    """Weight vector cannot be normalized into a probability measure"""


class InvalidProposalError(SamplerToolkitError):
    """Proposal set contains the current state, duplicates or has a bad size"""


class IndexRangeError(SamplerToolkitError):
    """State or basis index outside its admissible range"""


class InvalidRatioError(SamplerToolkitError):
    """Likelihood ratio is not strictly positive"""


class RatioOverflowError(SamplerToolkitError):
    """Likelihood ratio overflowed to a non-finite value"""


class InvalidParameterError(SamplerToolkitError):
    """Scalar or vector parameter violates its precondition"""


class MembershipViolationError(SamplerToolkitError):
    """Matrix leaves the positive monoid fixing p"""


class NonErgodicError(SamplerToolkitError):
    """Transition matrix has no unique invariant measure"""


class EnumerationLimitError(SamplerToolkitError):
    """Exact enumeration would exceed the configured guard"""


class LpSolveError(SamplerToolkitError):
    """Linear program did not reach an optimal vertex"""


class BudgetExceededError(SamplerToolkitError):
    """Requested run exceeds the chain-step budget"""


__all__ = [
    "SamplerToolkitError",
    "InvalidMeasureError",
    "InvalidProposalError",
    "IndexRangeError",
    "InvalidRatioError",
    "RatioOverflowError",
    "InvalidParameterError",
    "MembershipViolationError",
    "NonErgodicError",
    "EnumerationLimitError",
    "LpSolveError",
    "BudgetExceededError",
]
