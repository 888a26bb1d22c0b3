from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg

from ..exceptions import FactorizationError, ValidationError
from .lattice import LatticeDomain

SYMMETRY_TOL = 1e-12
PSD_FLOOR = 1e-10


class DensityNormalization(str, Enum):
    """
    Scaling of the discrete fractional Gaussian field precision.

    ORDERED_PAIRS expands the ordered-pair density literally: Q = 2·C·δ^d·L.
    CONTINUUM uses Q = C·δ^{2d}·L, under which Q⁻¹ converges pointwise to the
    ball Green's function and walk occupation times equal Q⁻¹·δ^d.
    """
    ORDERED_PAIRS = "ordered_pairs"
    CONTINUUM = "continuum"

    @property
    def pair_factor(self) -> float:
        return 2.0 if self is DensityNormalization.ORDERED_PAIRS else 1.0

    def lattice_power(self, d: int) -> int:
        return d if self is DensityNormalization.ORDERED_PAIRS else 2 * d

    def covariance_per_occupation(self, spacing: float, d: int) -> float:
        """Factor turning expected occupation time into Q⁻¹ entries."""
        if self is DensityNormalization.ORDERED_PAIRS:
            return 0.5
        return spacing ** (-d)


def _symmetric(entries: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(field=name, message=f"expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.size and float(np.max(np.abs(matrix - matrix.T))) > SYMMETRY_TOL * scale:
        raise ValidationError(field=name, message="matrix is not symmetric")
    return 0.5 * (matrix + matrix.T)


@dataclass
class CovMatrix:
    """Dense covariance over an explicit point set, with optional Cholesky factor."""
    points: np.ndarray
    entries: np.ndarray
    factor: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.entries = _symmetric(self.entries, "entries")
        if self.entries.shape[0] != self.points.shape[0]:
            raise ValidationError(
                field="points",
                message=f"{self.points.shape[0]} points for a {self.entries.shape[0]}x{self.entries.shape[0]} matrix",
            )

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(linalg.eigvalsh(self.entries)[0])

    def eigenvalue_floor(self) -> float:
        return -PSD_FLOOR * max(float(np.trace(self.entries)), 0.0)

    def is_psd(self) -> bool:
        return self.min_eigenvalue() >= self.eigenvalue_floor()

    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor, computed once."""
        if self.factor is None:
            try:
                self.factor = linalg.cholesky(self.entries, lower=True)
            except linalg.LinAlgError as exc:
                raise FactorizationError(field="entries", message=f"Cholesky factorization failed: {exc}") from exc
        return self.factor

    def submatrix(self, rows: np.ndarray, cols: Optional[np.ndarray] = None) -> np.ndarray:
        cols = rows if cols is None else cols
        return self.entries[np.ix_(rows, cols)]


@dataclass
class PrecisionMatrix:
    """DFGF precision over the interior sites of a lattice domain."""
    entries: np.ndarray
    domain: LatticeDomain
    s: float
    normalization: DensityNormalization
    margin: float
    tail_bound: float
    factor: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.entries = _symmetric(self.entries, "entries")
        if self.entries.shape[0] != self.domain.size:
            raise ValidationError(field="entries", message="precision size does not match the domain")

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def cholesky(self) -> np.ndarray:
        if self.factor is None:
            try:
                self.factor = linalg.cholesky(self.entries, lower=True)
            except linalg.LinAlgError as exc:
                raise FactorizationError(field="entries", message=f"Cholesky factorization failed: {exc}") from exc
        return self.factor

    def quadratic_form(self, values: np.ndarray) -> float:
        vector = np.asarray(values, dtype=float).reshape(self.size)
        return float(vector @ self.entries @ vector)
