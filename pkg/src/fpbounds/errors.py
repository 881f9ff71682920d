"""Shared exception types."""


class FpBoundsError(Exception):
    """Base class for all toolkit errors."""


class NonPrimeError(FpBoundsError):
    """Modulus failed the primality check."""


class DimensionMismatchError(FpBoundsError):
    """Operands have incompatible shapes or moduli."""


class SingularMatrixError(FpBoundsError):
    """Matrix is not invertible over F_p."""


class SizeLimitError(FpBoundsError):
    """Requested enumeration exceeds the configured cap."""


class ZeroWitnessError(FpBoundsError):
    """Witness function is identically zero."""


class NonpositiveBoundError(FpBoundsError):
    """Certificate bound is not positive, no bit bound can be derived."""


class UnsupportedFieldError(FpBoundsError):
    """Operation is only implemented for a restricted set of moduli."""


class ZeroVectorError(FpBoundsError):
    """Vector argument must be nonzero."""


class PromiseViolationError(FpBoundsError):
    """Instance does not satisfy the problem's promise."""


class RoundLimitError(FpBoundsError):
    """Protocol exceeded its declared message budget."""


class ProtocolStateError(FpBoundsError):
    """Protocol produced no output or produced it twice."""


class BudgetExhaustedError(FpBoundsError):
    """Search budget ran out; carries the best candidate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleError(FpBoundsError):
    """Linear program has no feasible point."""


class UnboundedError(FpBoundsError):
    """Linear program is unbounded below."""
