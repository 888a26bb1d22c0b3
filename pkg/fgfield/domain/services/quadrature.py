"""
Quadrature building blocks shared by the services.

Rules are returned as plain ``(nodes, weights)`` arrays so that integrands can
be evaluated in one vectorized call. Radial rules live on ``[0, 1]`` and are
rescaled by the caller.
"""
import math
from typing import Callable, Tuple

import numpy as np
from scipy import special

from ..exceptions import QuadratureError, ValidationError

MAX_SPHERE_DIMENSION = 3


def sphere_area(d: int) -> float:
    """Surface measure Ω_d of the unit sphere S^{d-1} in R^d (Ω_1 = 2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def jacobi_rule(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss–Jacobi rule on [0, 1] for ∫ (1 - t)^alpha t^beta f(t) dt.

    Both exponents must exceed -1.
    """
    if alpha <= -1.0 or beta <= -1.0:
        raise ValidationError(field="beta", message=f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")
    x, w = special.roots_jacobi(n, alpha, beta)
    return 0.5 * (x + 1.0), w * 2.0 ** (-alpha - beta - 1.0)


def sphere_rule(d: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Directions and weights integrating over S^{d-1}; weights sum to Ω_d.

    d = 1 uses the two points ±1, d = 2 an n-point trapezoid rule in the
    angle, d = 3 Gauss–Legendre in cos θ times a 2n-point trapezoid in φ.
    """
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        theta = 2.0 * math.pi * np.arange(n) / n
        return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.full(n, 2.0 * math.pi / n)
    if d == 3:
        cos_theta, w_theta = np.polynomial.legendre.leggauss(n)
        phi = 2.0 * math.pi * np.arange(2 * n) / (2 * n)
        ct, pp = np.meshgrid(cos_theta, phi, indexing="ij")
        st = np.sqrt(1.0 - ct ** 2)
        directions = np.stack([st * np.cos(pp), st * np.sin(pp), ct], axis=-1).reshape(-1, 3)
        weights = np.outer(w_theta, np.full(2 * n, 2.0 * math.pi / (2 * n))).reshape(-1)
        return directions, weights
    raise ValidationError(
        field="d",
        message=f"sphere quadrature is implemented for d <= {MAX_SPHERE_DIMENSION}, got {d}",
    )


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1."""
    t = np.asarray(t, dtype=float)
    left = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    right = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return left / (left + right)


def radial_cutoff(r: np.ndarray, rho: float) -> np.ndarray:
    """χ(r) = 1 for r ≤ ρ, 0 for r ≥ 2ρ, smooth in between."""
    return 1.0 - smooth_step((np.asarray(r, dtype=float) - rho) / rho)


def refine_until_stable(evaluate: Callable[[int], float], tol: float, max_level: int,
                        what: str, floor: float = 0.0) -> Tuple[float, int, float]:
    """
    Evaluate at levels 0, 1, ... until two successive values agree.

    Agreement means ``|v_k - v_{k-1}| <= tol * max(|v_k|, floor)``. Returns
    (value, level, last change) or raises QuadratureError after ``max_level``.
    """
    previous = evaluate(0)
    change = math.inf
    for level in range(1, max_level + 1):
        current = evaluate(level)
        change = abs(current - previous)
        if change <= tol * max(abs(current), floor):
            return current, level, change
        previous = current
    raise QuadratureError(
        field=what,
        message=f"no convergence after {max_level} refinements (last change {change:.3e})",
    )


def radial_second_difference_integral(profile: Callable[[np.ndarray], np.ndarray], s: float, radius: float,
                                      scale: float = 1.0, panels_per_scale: int = 4,
                                      order: int = 24) -> float:
    """
    ∫_0^radius r^{-1-2s} D(r) dr for a profile with D(r) = O(r²) at the origin.

    The innermost shell [0, r0] (r0 = 1e-3·scale) uses the Taylor form
    D(r) ≈ D(r0)(r/r0)²; [r0, scale] is covered by geometric panels and
    [scale, radius] by uniform panels, each with an ``order``-point
    Gauss–Legendre rule.
    """
    r0 = 1e-3 * scale
    top = min(scale, radius)
    total = profile(np.array([r0]))[0] / r0 ** 2 * r0 ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    if radius <= r0:
        return total

    edges = [r0]
    while edges[-1] * 2.0 < top:
        edges.append(edges[-1] * 2.0)
    edges.append(top)
    if radius > top:
        count = max(1, int(math.ceil(panels_per_scale * (radius - top) / scale)))
        edges.extend(np.linspace(top, radius, count + 1)[1:].tolist())

    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        x, w = gauss_legendre(order, a, b)
        nodes.append(x)
        weights.append(w)
    r = np.concatenate(nodes)
    w = np.concatenate(weights)
    return float(total + np.sum(w * r ** (-1.0 - 2.0 * s) * profile(r)))
