from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..exceptions import ValidationError
from .field_spec import FieldSpec


@dataclass
class BallPointPair:
    """Two points strictly inside the open unit ball of R^d."""
    x: np.ndarray
    y: np.ndarray
    d: int

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(self.d)
        self.y = np.asarray(self.y, dtype=float).reshape(self.d)
        for name, point in (("x", self.x), ("y", self.y)):
            if float(np.linalg.norm(point)) >= 1.0:
                raise ValidationError(field=name, message=f"point {point.tolist()} is not inside the unit ball")

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.x - self.y))

    def swapped(self) -> "BallPointPair":
        return BallPointPair(x=self.y, y=self.x, d=self.d)


@dataclass
class SampleEnsemble:
    """Independent samples sharing one spec and one geometry (rows are samples)."""
    samples: np.ndarray
    spec: FieldSpec
    spacing: float
    config: Optional[Any] = None
    periodic: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim < 2:
            raise ValidationError(field="samples", message="ensemble needs a leading sample axis")
        self.samples.setflags(write=False)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass
class StructureFunction:
    lags: np.ndarray
    values: np.ndarray
    pair_counts: np.ndarray
    slope: float

    @property
    def hurst_estimate(self) -> float:
        return 0.5 * self.slope


@dataclass
class EigenfunctionSample:
    values: np.ndarray
    tail_bound: float
    n_modes: int


@dataclass
class WalkEstimate:
    """Occupation-time estimate of one Green's function row."""
    values: np.ndarray
    stderr: np.ndarray
    start: int
    n_walks: int
    censored: int
    mean_jumps: float
    exit_jump_probability: float
    time_scale: float


@dataclass
class ConvergenceRow:
    delta: float
    label: str
    discrete: float
    continuum: float

    @property
    def relative_error(self) -> float:
        return abs(self.discrete - self.continuum) / abs(self.continuum)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "label": self.label,
            "discrete": self.discrete,
            "continuum": self.continuum,
            "relative_error": self.relative_error,
        }


@dataclass
class ConvergenceReport:
    s: float
    d: int
    rows: List[ConvergenceRow] = field(default_factory=list)

    def errors_by_delta(self) -> Dict[float, float]:
        """Worst relative error at each spacing."""
        worst: Dict[float, float] = {}
        for row in self.rows:
            worst[row.delta] = max(worst.get(row.delta, 0.0), row.relative_error)
        return worst

    @property
    def monotone(self) -> bool:
        """True when the worst error does not grow as δ decreases."""
        errors = [err for _, err in sorted(self.errors_by_delta().items(), reverse=True)]
        return all(later <= earlier for earlier, later in zip(errors, errors[1:]))

    @property
    def final_error(self) -> float:
        by_delta = self.errors_by_delta()
        return by_delta[min(by_delta)]


@dataclass
class SplitResult:
    """Harmonic + zero-boundary decomposition of a field over points P = D ∪ E."""
    harmonic_part: np.ndarray
    zero_part: np.ndarray
    conditioning_map: np.ndarray
    d_mask: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.d_mask = np.asarray(self.d_mask, dtype=bool)
        outside = np.abs(self.zero_part[~self.d_mask])
        if outside.size and float(outside.max()) > 1e-12:
            raise ValidationError(field="zero_part", message="zero-boundary part does not vanish outside D")

    @property
    def field(self) -> np.ndarray:
        return self.harmonic_part + self.zero_part


@dataclass
class SphericalKernelQuery:
    d: int
    H: float
    k: int
    r1: float
    r2: float

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(field="d", message="spherical averages need d >= 2")
        if self.k < 0:
            raise ValidationError(field="k", message="harmonic degree must be nonnegative")
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValidationError(field="r1", message="radii must be positive")

    @property
    def s(self) -> float:
        return self.H + self.d / 2.0

    @property
    def integer_hurst(self) -> bool:
        return self.H >= 0 and abs(self.H - round(self.H)) <= 1e-12

    def shifted(self) -> "SphericalKernelQuery":
        """Same s in dimension d + 2k, degree 0."""
        return SphericalKernelQuery(d=self.d + 2 * self.k, H=self.H - self.k, k=0, r1=self.r1, r2=self.r2)


@dataclass
class SphericalKernelResult:
    query: SphericalKernelQuery
    theta_form: float
    closed_form: Optional[float] = None
    fallback: Optional[str] = None

    @property
    def form(self) -> str:
        """Which value is reported: ``closed`` for the ₂F₁ form, ``theta`` for the angle integral alone."""
        return "closed" if self.closed_form is not None else "theta"

    @property
    def value(self) -> float:
        return self.closed_form if self.closed_form is not None else self.theta_form

    @property
    def relative_gap(self) -> Optional[float]:
        if self.closed_form is None:
            return None
        return abs(self.closed_form - self.theta_form) / max(abs(self.theta_form), 1e-300)


@dataclass
class RestrictionResult:
    var_d: float
    var_lower: float
    analytic_constant: float
    lift_values: List[float] = field(default_factory=list)
    var_fourier: Optional[float] = None
    mc_variance: Optional[float] = None
    mc_stderr: Optional[float] = None
    discrete_variance: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.var_d / self.var_lower

    @property
    def lift_drift(self) -> List[float]:
        """Relative change between successive mollification widths and the hyperplane value."""
        return [abs(v - self.var_d) / abs(self.var_d) for v in self.lift_values]


@dataclass
class SphericalProjectionStudy:
    radii: np.ndarray
    empirical: np.ndarray
    standard_errors: np.ndarray
    kernel: np.ndarray
    fitted_constant: float

    @property
    def z_scores(self) -> np.ndarray:
        return (self.empirical - self.fitted_constant * self.kernel) / self.standard_errors

    @property
    def max_relative_deviation(self) -> float:
        predicted = self.fitted_constant * self.kernel
        return float(np.max(np.abs(self.empirical - predicted) / np.abs(predicted)))
