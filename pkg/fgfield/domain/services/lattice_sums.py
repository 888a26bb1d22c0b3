"""
Long-range lattice interaction sums w(k) = |k|^{-d-2s} over integer offsets.

Both the truncated fractional Laplacian and the DFGF precision are written
in integer offsets k = (x - y)/δ with a truncation radius K = R/δ in lattice
units; interactions beyond K are folded into the diagonal through the
integral bound Ω_d K^{-2s}/(2s).
"""
from functools import lru_cache
import itertools
import math

import numpy as np

from .quadrature import sphere_area


def radius_steps(truncation_radius: float, spacing: float) -> float:
    return truncation_radius / spacing


def offset_weights(offsets: np.ndarray, d: int, s: float, steps: float) -> np.ndarray:
    """w(k) for an array of integer offset norms; zero at k = 0 and beyond ``steps``."""
    norms = np.asarray(offsets, dtype=float)
    weights = np.zeros_like(norms)
    inside = (norms > 0) & (norms <= steps * (1.0 + 1e-12))
    weights[inside] = norms[inside] ** (-d - 2.0 * s)
    return weights


@lru_cache(maxsize=128)
def diagonal_sum(d: int, s: float, steps: float) -> float:
    """S_K = Σ_{0<|k|≤K} |k|^{-d-2s} over k ∈ Z^d."""
    bound = int(math.floor(steps))
    axis = np.arange(-bound, bound + 1, dtype=float)
    if d == 1:
        return float(np.sum(offset_weights(np.abs(axis), 1, s, steps)))
    total = 0.0
    # one leading coordinate at a time keeps memory at (2K+1)^{d-1}
    rest = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
    rest_sq = sum(component ** 2 for component in rest)
    for first in axis:
        total += float(np.sum(offset_weights(np.sqrt(first ** 2 + rest_sq), d, s, steps)))
    return total


def tail_sum(d: int, s: float, steps: float) -> float:
    """Integral bound Ω_d K^{-2s}/(2s) for Σ_{|k|>K} |k|^{-d-2s}."""
    return sphere_area(d) * steps ** (-2.0 * s) / (2.0 * s)


def pair_weights(indices: np.ndarray, d: int, s: float, steps: float) -> np.ndarray:
    """Matrix w(k_i - k_j) between integer lattice sites (zero diagonal)."""
    sites = np.asarray(indices, dtype=float).reshape(-1, d)
    norms = np.sqrt(np.sum((sites[:, None, :] - sites[None, :, :]) ** 2, axis=-1))
    return offset_weights(norms, d, s, steps)


def offset_norms(extent: int, d: int) -> np.ndarray:
    """|k| on the full correlation window k ∈ [-(extent-1), extent-1]^d."""
    axis = np.arange(-(extent - 1), extent, dtype=float)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.sqrt(sum(component ** 2 for component in mesh))


def neighbour_offsets(d: int):
    """The 2d unit offsets ±e_i."""
    for axis, sign in itertools.product(range(d), (-1, 1)):
        offset = [0] * d
        offset[axis] = sign
        yield tuple(offset)
