"""Exception hierarchy.

Three families map onto the CLI exit codes: validation problems (2),
numerical failures (3) and structure the analytic solver cannot handle (4).
"""


class FusegainError(Exception):
    """Base class for all package errors."""


class ValidationError(FusegainError, ValueError):
    """A problem instance or argument violates a stated invariant."""


class DimensionMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    def __init__(self, field, detail=""):
        self.field = field
        msg = f"{field} is not positive definite"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class JointCovarianceInvalid(ValidationError):
    pass


class NumericalError(FusegainError, ArithmeticError):
    """A factorization or inverse failed on a degenerate configuration."""


class SingularMatrix(NumericalError):
    pass


class SingularConditionalCovariance(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass


class ZeroIterate(NumericalError):
    pass


class UnsupportedStructure(FusegainError):
    """The instance lacks the structure required by the closed-form design."""


class UnsupportedNoise(UnsupportedStructure):
    pass


class NoInformativeChannel(UnsupportedStructure):
    pass


class ZeroMatrix(FusegainError, ValueError):
    """Rank reduction of an all-zero channel matrix (rank 0)."""
