from dataclasses import dataclass, field
import itertools
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import GeometryError, ValidationError
from .grids import BoundaryMode, FieldGrid

_EDGE = 1e-12


@dataclass
class LatticeDomain:
    """
    Interior sites δZ^d ∩ D of a ball or box, with the interaction truncation radius.

    ``indices`` holds the integer lattice coordinates of the interior sites
    (points = indices·δ), ordered lexicographically.
    """
    d: int
    spacing: float
    kind: str
    lower: np.ndarray
    upper: np.ndarray
    radius: Optional[float] = None
    truncation_radius: Optional[float] = None
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(field="d", message="dimension must be positive")
        if not self.spacing > 0:
            raise ValidationError(field="spacing", message="spacing must be positive")
        if self.kind not in ("ball", "box"):
            raise ValidationError(field="kind", message=f"unknown domain kind {self.kind!r}")
        self.lower = np.asarray(self.lower, dtype=float).reshape(self.d)
        self.upper = np.asarray(self.upper, dtype=float).reshape(self.d)
        if np.any(self.upper <= self.lower):
            raise ValidationError(field="upper", message="box upper corner must exceed the lower corner")
        self.indices = self._interior_indices()
        if len(self.indices) == 0:
            raise ValidationError(field="spacing", message="domain has no interior lattice sites")
        if self.truncation_radius is None:
            self.truncation_radius = self.diameter
        if self.truncation_radius < self.diameter * (1.0 - _EDGE):
            raise ValidationError(
                field="truncation_radius",
                message=f"R = {self.truncation_radius} is smaller than the domain diameter {self.diameter}",
            )

    @classmethod
    def ball(cls, d: int, spacing: float, radius: float = 1.0,
             truncation_radius: Optional[float] = None) -> "LatticeDomain":
        return cls(d=d, spacing=spacing, kind="ball", lower=-radius * np.ones(d), upper=radius * np.ones(d),
                   radius=radius, truncation_radius=truncation_radius)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], spacing: float,
            truncation_radius: Optional[float] = None) -> "LatticeDomain":
        lower_arr = np.atleast_1d(np.asarray(lower, dtype=float))
        return cls(d=len(lower_arr), spacing=spacing, kind="box", lower=lower_arr,
                   upper=np.atleast_1d(np.asarray(upper, dtype=float)), truncation_radius=truncation_radius)

    def _interior_indices(self) -> np.ndarray:
        ranges = []
        for axis in range(self.d):
            first = math.floor(self.lower[axis] / self.spacing) - 1
            last = math.ceil(self.upper[axis] / self.spacing) + 1
            ranges.append(range(first, last + 1))
        candidates = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, self.d)
        return candidates[self.contains(candidates * self.spacing)]

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Mask of points strictly inside D."""
        pts = np.atleast_2d(points)
        scale = self.spacing * _EDGE
        if self.kind == "ball":
            return np.sqrt(np.sum(pts ** 2, axis=1)) < self.radius - scale
        return np.all((pts > self.lower + scale) & (pts < self.upper - scale), axis=1)

    @property
    def points(self) -> np.ndarray:
        return self.indices * self.spacing

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.upper - self.lower))

    def index_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.indices.min(axis=0), self.indices.max(axis=0)

    def site_of(self, point: Sequence[float]) -> int:
        """Row of the interior site at ``point``; GeometryError when it is not one."""
        target = np.asarray(point, dtype=float).reshape(self.d) / self.spacing
        rounded = np.round(target)
        if np.max(np.abs(target - rounded)) > 1e-9:
            raise GeometryError(field="point", message=f"{list(point)} is not a lattice site at spacing {self.spacing}")
        matches = np.where(np.all(self.indices == rounded.astype(np.int64), axis=1))[0]
        if len(matches) == 0:
            raise GeometryError(field="point", message=f"{list(point)} is not an interior site")
        return int(matches[0])

    def embed(self, values: np.ndarray) -> FieldGrid:
        """Place interior values on a zero-exterior cube grid covering the domain."""
        low, high = self.index_bounds()
        n = int(np.max(high - low)) + 1
        n = max(n, 2)
        grid = np.zeros((n,) * self.d)
        grid[tuple((self.indices - low).T)] = np.asarray(values, dtype=float).reshape(self.size)
        return FieldGrid(values=grid, spacing=self.spacing, boundary_mode=BoundaryMode.ZERO_EXTERIOR,
                         origin=low * self.spacing)

    def restrict(self, grid: FieldGrid) -> np.ndarray:
        """Interior values of a grid produced by :meth:`embed`."""
        low = np.round(grid.origin / self.spacing).astype(np.int64)
        return grid.values[tuple((self.indices - low).T)]
