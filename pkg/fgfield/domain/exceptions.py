"""
Domain-specific exceptions for fgfield.

Two families are distinguished: ValidationError for inputs that do not meet an
operation's preconditions, and NumericalError for failures raised while
evaluating formulas, quadratures or factorizations. The CLI maps the first to
exit code 1 and the second to exit code 2.
"""
from typing import Any, Optional


class FieldError(Exception):
    """
    Base class for every error raised by fgfield.

    Carries the name of the offending quantity and a human readable message,
    rendered as ``"<field>: <message>"``.
    """
    def __init__(self, field: Optional[str] = None, message: Optional[str] = None, **context: Any):
        self.field = field
        self.message = message
        self.context = context
        super().__init__(f"{field}: {message}" if field else message)


class ValidationError(FieldError):
    """
    Raised when input data fails validation rules.

    This exception is used when:
    - Required parameters are missing (e.g. no seed for a stochastic command)
    - Parameter values are outside acceptable ranges
    - Grids or point sets have inconsistent shapes
    """


class NumericalError(FieldError):
    """Base class for failures raised during numerical evaluation."""


class DomainError(NumericalError):
    """
    Raised when a formula is evaluated outside its parameter domain.

    This exception is used when:
    - s ≤ 0 is passed to a positive-order constant
    - the Hurst parameter of a pinned sampler is outside (0, 1)
    - a ball point lies on or outside the unit sphere
    """


class PoleError(NumericalError):
    """
    Raised when C(s,d) hits a pole of Γ(d/2 − s).

    This happens exactly when H = s − d/2 is a nonnegative integer; the
    log-corrected kernel with the residue constant must be used instead.
    """
    def __init__(self, s: float, d: int, message: Optional[str] = None):
        self.s = s
        self.d = d
        super().__init__(
            field="s",
            message=message or f"C(s={s}, d={d}) has a pole (H = s - d/2 is a nonnegative integer)",
        )


class NoPointwiseKernel(NumericalError):
    """Raised when a pointwise covariance is requested for a distributional kernel (s ≤ 0)."""


class MomentError(NumericalError):
    """Raised when a test function does not have enough vanishing moments for the requested H."""


class QuadratureError(NumericalError):
    """Raised when an adaptive quadrature does not reach its tolerance within budget."""


class SingularityError(NumericalError):
    """Raised when a kernel is evaluated on the diagonal where it diverges."""


class PSDError(NumericalError):
    """Raised when an assembled covariance matrix violates its eigenvalue floor."""


class TailError(NumericalError):
    """
    Raised when a truncated sum or integral cannot be certified.

    This exception is used when:
    - the singular-integral tail bound exceeds the requested tolerance
    - the eigenfunction series diverges pointwise (s ≤ d/2)
    """


class DominanceError(NumericalError):
    """Raised when a precision matrix fails its diagonal dominance certificate."""


class FactorizationError(NumericalError):
    """Raised when a Cholesky factorization fails."""


class InsufficientData(NumericalError):
    """Raised when an ensemble statistic has too few samples to be meaningful."""


class GeometryError(NumericalError):
    """Raised when a point set is not a uniform lattice where one is required."""


class HypergeometricError(NumericalError):
    """
    Raised when the Gauss hypergeometric evaluation cannot be completed.

    This exception is used when:
    - the power series does not converge within the term budget
    - the z → 1 connection formula hits the degenerate integer c − a − b case
    """
