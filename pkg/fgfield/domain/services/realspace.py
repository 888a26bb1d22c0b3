"""
Real-space double sums ∫∫ K(|x - y|) φ1(x) φ2(y) dx dy for radial kernels.

The double integral is written as ∫ K(z) g(z) dz with g the cross-correlation
of the two test functions, sampled on lattice offsets. Offsets are weighted by
tent averages of K (the exact integral of K against the multilinear
interpolant of g); the leading interpolation error is removed by replacing
g with g - (δ²/12) Δ_h g. Tent averages are computed by adaptive quadrature
for near offsets and by a second-order expansion for far ones.
"""
from dataclasses import dataclass
import itertools
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import integrate, signal

from ..entities.grids import TestFunctionGrid
from ..exceptions import ValidationError

NEAR_OFFSETS = 4
QUAD_EPSREL = 1e-11


@dataclass(frozen=True)
class KernelProfile:
    """A radial kernel K(r) with its first two radial derivatives."""
    value: Callable[[np.ndarray], np.ndarray]
    first: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def power(cls, constant: float, exponent: float) -> "KernelProfile":
        """K(r) = constant·r^exponent."""
        a = exponent
        return cls(
            value=lambda r: constant * np.power(r, a),
            first=lambda r: constant * a * np.power(r, a - 1.0),
            second=lambda r: constant * a * (a - 1.0) * np.power(r, a - 2.0),
        )

    @classmethod
    def power_log(cls, constant: float, k: int) -> "KernelProfile":
        """K(r) = constant·r^{2k}·ln r."""
        n = 2 * k

        def first(r):
            return constant * (n * np.power(r, n - 1.0) * np.log(r) + np.power(r, n - 1.0))

        def second(r):
            return constant * np.power(r, n - 2.0) * (n * (n - 1.0) * np.log(r) + 2.0 * n - 1.0)
        return cls(value=lambda r: constant * np.power(r, float(n)) * np.log(r), first=first, second=second)

    def laplacian(self, r: np.ndarray, d: int) -> np.ndarray:
        return self.second(r) + (d - 1) * self.first(r) / r


def _tent(u: float) -> float:
    return 1.0 - abs(u)


def _cuts(m: int):
    """Breakpoints of the unit tent on [-1, 1] plus the kernel singularity at u = -m."""
    return sorted({x for x in (-1.0, 0.0, 1.0, float(-m)) if -1.0 <= x <= 1.0})


def _near_average_1d(profile: KernelProfile, m: int, spacing: float, transverse: float) -> float:
    """Tent average of K(|((m + u)δ, v·w)|) over u (and over a tent in v when w = ``transverse`` > 0)."""
    total = 0.0
    cuts = _cuts(m)
    if transverse == 0.0:
        for a, b in zip(cuts[:-1], cuts[1:]):
            value, _ = integrate.quad(
                lambda u: _tent(u) * float(profile.value(abs((m + u) * spacing))),
                a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200,
            )
            total += value
        return total
    for a, b in zip(cuts[:-1], cuts[1:]):
        for c, e in ((-1.0, 0.0), (0.0, 1.0)):
            value, _ = integrate.dblquad(
                lambda v, u: _tent(u) * _tent(v) * float(profile.value(np.hypot((m + u) * spacing, v * transverse))),
                a, b, c, e, epsabs=0.0, epsrel=1e-10,
            )
            total += value
    return total


def _near_average_2d(profile: KernelProfile, m1: int, m2: int, spacing: float) -> float:
    total = 0.0
    cu, cv = _cuts(m1), _cuts(m2)
    for a, b in zip(cu[:-1], cu[1:]):
        for c, e in zip(cv[:-1], cv[1:]):
            value, _ = integrate.dblquad(
                lambda v, u: _tent(u) * _tent(v) * float(profile.value(np.hypot((m1 + u) * spacing, (m2 + v) * spacing))),
                a, b, c, e, epsabs=0.0, epsrel=1e-10,
            )
            total += value
    return total


def tent_weights(profile: KernelProfile, spacing: float, extent: int, d: int,
                 transverse: float = 0.0) -> np.ndarray:
    """
    Tent averages W(m) of K over offsets m ∈ [-(extent-1), extent-1]^d.

    ``transverse`` > 0 (d = 1 only) additionally averages over a tent of that
    half-width in an orthogonal direction, the kernel of a mollified lift of a
    one-dimensional test function into the plane.
    """
    if d not in (1, 2):
        raise ValidationError(field="d", message=f"real-space sums support d <= 2, got {d}")
    if transverse and d != 1:
        raise ValidationError(field="transverse", message="transverse mollification needs d = 1")
    offsets = np.arange(-(extent - 1), extent)
    mesh = np.meshgrid(*([offsets] * d), indexing="ij")
    r = spacing * np.sqrt(sum(axis ** 2 for axis in mesh))
    safe = np.where(r > 0, r, 1.0)
    # far field: K + (δ²/12)ΔK (+ (w²/12) K'/r for the transverse tent)
    weights = profile.value(safe) + spacing ** 2 / 12.0 * (
        profile.second(safe) if d == 1 else profile.laplacian(safe, 2)
    )
    if transverse:
        weights = weights + transverse ** 2 / 12.0 * profile.first(safe) / safe

    cache: Dict[Tuple[int, ...], float] = {}
    near_limit = max(NEAR_OFFSETS, int(np.ceil(8.0 * transverse / spacing)) if transverse else NEAR_OFFSETS)
    centre = extent - 1
    for m in itertools.product(range(-near_limit, near_limit + 1), repeat=d):
        if max(abs(c) for c in m) > extent - 1:
            continue
        key = tuple(sorted(abs(c) for c in m))
        if key not in cache:
            if d == 1:
                cache[key] = _near_average_1d(profile, key[0], spacing, transverse)
            else:
                cache[key] = _near_average_2d(profile, key[1], key[0], spacing)
        weights[tuple(centre + c for c in m)] = cache[key]
    return weights


def cross_correlation(phi1: TestFunctionGrid, phi2: TestFunctionGrid) -> np.ndarray:
    """g(mδ) = δ^d Σ_j φ1(x_j + mδ) φ2(x_j) on offsets m ∈ [-(n-1), n-1]^d."""
    return signal.correlate(phi1.values, phi2.values, mode="full", method="auto") * phi1.spacing ** phi1.d


def corrected_samples(g: np.ndarray, spacing: float) -> np.ndarray:
    """g - (δ²/12) Δ_h g with zero values beyond the offset table."""
    padded = np.pad(g, 1)
    laplacian = -2.0 * g.ndim * g
    for axis in range(g.ndim):
        for shift in (-1, 1):
            laplacian = laplacian + np.roll(padded, shift, axis=axis)[tuple(slice(1, -1) for _ in range(g.ndim))]
    return g - laplacian / 12.0


def bilinear(profile: KernelProfile, phi1: TestFunctionGrid, phi2: TestFunctionGrid,
             transverse: float = 0.0) -> float:
    """∫∫ K(|x - y|) φ1(x) φ2(y) dx dy on the common grid of the two test functions."""
    if not phi1.compatible_with(phi2):
        raise ValidationError(field="phi2", message="test functions must share one grid")
    g = cross_correlation(phi1, phi2)
    weights = tent_weights(profile, phi1.spacing, phi1.n, phi1.d, transverse)
    return float(np.sum(weights * corrected_samples(g, phi1.spacing)) * phi1.spacing ** phi1.d)
