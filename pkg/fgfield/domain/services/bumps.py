"""
Test functions with prescribed vanishing moments.

Iterated Laplacians of a Gaussian, Δ^j e^{-|x|²/(2σ²)}, have Fourier transform
|ξ|^{2j} times a Gaussian, so every moment of order below 2j vanishes. In
closed form (σ = 1) Δ^j G = (-2)^j j! L_j^{(d/2-1)}(|x|²/2) e^{-|x|²/2}.
"""
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from ..entities.field_spec import FieldSpec
from ..entities.grids import TestFunctionGrid

# Half-width of the sampling box in units of σ; edge values are below e^{-32}.
EXTENT_SIGMAS = 8.0


def laplacian_power_of_gaussian(j: int, d: int, sigma: float = 1.0) -> Callable[..., np.ndarray]:
    """Return x ↦ Δ^j exp(-|x|²/(2σ²)) as a function of the d coordinate arrays."""
    def evaluate(*coords: np.ndarray) -> np.ndarray:
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords) / sigma ** 2
        poly = special.eval_genlaguerre(j, d / 2.0 - 1.0, r2 / 2.0)
        return (-2.0) ** j * math.factorial(j) * poly * np.exp(-r2 / 2.0) / sigma ** (2 * j)
    return evaluate


def iterations_for(spec: FieldSpec) -> int:
    """Smallest j with moment order 2j - 1 ≥ ⌊H⌋ (0 when H < 0)."""
    if spec.H < 0:
        return 0
    return (spec.hurst_floor + 2) // 2


def gaussian_test_function(d: int, j: int = 0, sigma: float = 1.0, n: int = 129,
                           center: Optional[Sequence[float]] = None) -> TestFunctionGrid:
    """Sample Δ^j of a Gaussian on an n^d grid spanning ±8σ around ``center``."""
    spacing = 2.0 * EXTENT_SIGMAS * sigma / (n - 1)
    return TestFunctionGrid.from_function(laplacian_power_of_gaussian(j, d, sigma), n, spacing, d, center)


def admissible_test_function(spec: FieldSpec, sigma: float = 1.0, n: int = 129,
                             center: Optional[Sequence[float]] = None) -> TestFunctionGrid:
    """A test function with enough vanishing moments for ``spec``."""
    return gaussian_test_function(spec.d, iterations_for(spec), sigma, n, center)


def odd_test_function(d: int, sigma: float = 1.0, n: int = 129) -> TestFunctionGrid:
    """x₁·exp(-|x|²/(2σ²)); antisymmetric, so its lattice sum is zero to rounding."""
    spacing = 2.0 * EXTENT_SIGMAS * sigma / (n - 1)

    def evaluate(*coords: np.ndarray) -> np.ndarray:
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords) / sigma ** 2
        return coords[0] / sigma * np.exp(-r2 / 2.0)
    return TestFunctionGrid.from_function(evaluate, n, spacing, d)
