from dataclasses import dataclass, field
from enum import Enum
import itertools
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..exceptions import ValidationError

MAX_MOMENT_ORDER = 8
MOMENT_TOL = 1e-8
BOUNDARY_TOL = 1e-6


class BoundaryMode(str, Enum):
    TORUS = "Torus"
    ZERO_EXTERIOR = "ZeroExterior"


def _as_cube(values: np.ndarray, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim < 1:
        raise ValidationError(field=name, message="values must be at least one-dimensional")
    if len(set(array.shape)) != 1:
        raise ValidationError(field=name, message=f"all axes must have the same length, got {array.shape}")
    if array.shape[0] < 2:
        raise ValidationError(field=name, message="need at least 2 points per axis")
    if not np.all(np.isfinite(array)):
        raise ValidationError(field=name, message="values must be finite")
    return array


@dataclass
class FieldGrid:
    """Real field samples on a uniform d-dimensional lattice."""
    values: np.ndarray
    spacing: float
    boundary_mode: BoundaryMode = BoundaryMode.TORUS
    origin: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = _as_cube(self.values, "values")
        if not self.spacing > 0:
            raise ValidationError(field="spacing", message=f"spacing must be positive, got {self.spacing}")
        self.spacing = float(self.spacing)
        self.boundary_mode = BoundaryMode(self.boundary_mode)
        if self.origin is None:
            self.origin = np.zeros(self.d)
        self.origin = np.asarray(self.origin, dtype=float).reshape(self.d)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def box_length(self) -> float:
        return self.n * self.spacing

    def coordinates(self) -> List[np.ndarray]:
        """Axis coordinate vectors x_j = origin + j·δ."""
        return [self.origin[axis] + self.spacing * np.arange(self.n) for axis in range(self.d)]

    def with_values(self, values: np.ndarray) -> "FieldGrid":
        return FieldGrid(values=values, spacing=self.spacing, boundary_mode=self.boundary_mode, origin=self.origin.copy())

    def inner(self, other: "FieldGrid") -> float:
        """Lattice inner product Σ f g δ^d."""
        return float(np.sum(self.values * other.values) * self.spacing ** self.d)


def _centered_coordinates(shape: Sequence[int], spacing: float, origin: np.ndarray) -> List[np.ndarray]:
    coords = []
    for axis, n in enumerate(shape):
        axis_coords = origin[axis] + spacing * np.arange(n)
        coords.append(axis_coords - axis_coords.mean())
    return coords


def vanishing_moment_order(values: np.ndarray, spacing: float, origin: np.ndarray,
                           max_order: int = MAX_MOMENT_ORDER) -> int:
    """
    Largest k such that every moment ∫x^α φ with |α| ≤ k vanishes.

    A moment counts as zero when |∫x^α φ| ≤ 1e-8·‖φ‖_{L¹}·ρ^{|α|}, with ρ the
    support radius about the grid center. Returns −1 when the mass does not
    vanish and ``max_order`` when every tested moment vanishes.
    """
    d = values.ndim
    cell = spacing ** d
    l1 = float(np.sum(np.abs(values)) * cell)
    if l1 == 0.0:
        return max_order
    coords = _centered_coordinates(values.shape, spacing, origin)
    mesh = np.meshgrid(*coords, indexing="ij")
    support = np.abs(values) > 1e-12 * np.max(np.abs(values))
    radius = float(np.sqrt(sum(axis ** 2 for axis in mesh))[support].max())
    radius = max(radius, spacing)

    order = -1
    for k in range(max_order + 1):
        tol = MOMENT_TOL * l1 * radius ** k
        for alpha in itertools.product(range(k + 1), repeat=d):
            if sum(alpha) != k:
                continue
            weight = values
            for axis, power in enumerate(alpha):
                if power:
                    shape = [1] * d
                    shape[axis] = -1
                    weight = weight * (coords[axis] ** power).reshape(shape)
            if abs(float(np.sum(weight)) * cell) > tol:
                return order
        order = k
    return order


@dataclass
class TestFunctionGrid:
    """A discretized test function with its recomputed moment-vanishing order."""
    __test__ = False

    values: np.ndarray
    spacing: float
    origin: np.ndarray
    moment_order: int = field(init=False)

    def __post_init__(self):
        self.values = _as_cube(self.values, "values")
        if not self.spacing > 0:
            raise ValidationError(field="spacing", message=f"spacing must be positive, got {self.spacing}")
        self.spacing = float(self.spacing)
        self.origin = np.asarray(self.origin, dtype=float).reshape(self.values.ndim)
        self._check_boundary_decay()
        self.moment_order = vanishing_moment_order(self.values, self.spacing, self.origin)

    def _check_boundary_decay(self) -> None:
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return
        edge = 0.0
        for axis in range(self.d):
            edge = max(
                edge,
                float(np.max(np.abs(np.take(self.values, 0, axis=axis)))),
                float(np.max(np.abs(np.take(self.values, -1, axis=axis)))),
            )
        if edge > BOUNDARY_TOL * peak:
            raise ValidationError(
                field="values",
                message=f"test function does not decay at the grid boundary (edge/peak = {edge / peak:.2e})",
            )

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def box_length(self) -> float:
        return self.n * self.spacing

    def coordinates(self) -> List[np.ndarray]:
        return [self.origin[axis] + self.spacing * np.arange(self.n) for axis in range(self.d)]

    def l2_norm_squared(self) -> float:
        return float(np.sum(self.values ** 2) * self.spacing ** self.d)

    def rescaled(self, a: float) -> "TestFunctionGrid":
        """φ_a(x) = a^{−d} φ(x/a), sampled on the dilated lattice."""
        return TestFunctionGrid(values=self.values * a ** (-self.d), spacing=self.spacing * a, origin=self.origin * a)

    def compatible_with(self, other: "TestFunctionGrid") -> bool:
        return (
            self.values.shape == other.values.shape
            and abs(self.spacing - other.spacing) <= 1e-12 * self.spacing
            and np.allclose(self.origin, other.origin, rtol=0.0, atol=1e-12 * self.spacing)
        )

    @classmethod
    def from_function(cls, func: Callable[..., np.ndarray], n: int, spacing: float, d: int,
                      center: Optional[Sequence[float]] = None) -> "TestFunctionGrid":
        """Sample ``func(x_1, ..., x_d)`` on an n^d grid centered at ``center``."""
        center_arr = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        origin = center_arr - 0.5 * (n - 1) * spacing
        axes = [origin[axis] + spacing * np.arange(n) for axis in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(values=np.asarray(func(*mesh), dtype=float), spacing=spacing, origin=origin)
