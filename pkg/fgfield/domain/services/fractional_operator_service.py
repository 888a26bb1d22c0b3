from functools import lru_cache
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, signal, special
import structlog

from fgfield.config import Config
from fgfield.infrastructure.monitoring import measure_service_operation_time
from ..entities.grids import BoundaryMode, FieldGrid
from ..entities.lattice import LatticeDomain
from ..entities.matrices import DensityNormalization
from ..exceptions import DomainError, QuadratureError, TailError, ValidationError
from . import fourier, lattice_sums, quadrature

# Angular resolution of the singular-integral sphere average, per dimension.
SPHERE_POINTS = {1: 2, 2: 64, 3: 16}
PERIODIC_ORDER = 32


def _check_fractional(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise DomainError(field="s", message=f"order must lie in (0, 1), got {s}")


def _transverse_factor(d: int, s: float) -> float:
    """∫_{R^{d-1}} (1 + |u|²)^{-(d+2s)/2} du, by radial quadrature."""
    if d == 1:
        return 1.0
    exponent = -(d + 2.0 * s) / 2.0
    value, error = integrate.quad(lambda rho: rho ** (d - 2) * (1.0 + rho * rho) ** exponent,
                                  0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return quadrature.sphere_area(d - 1) * value


def _one_dimensional_integral(s: float) -> float:
    """∫_R (1 - cos t)|t|^{-1-2s} dt, split at |t| = 1."""
    inner, _ = integrate.quad(lambda t: 0.5 * np.sinc(t / (2.0 * math.pi)) ** 2, 0.0, 1.0,
                              weight="alg", wvar=(1.0 - 2.0 * s, 0.0), epsabs=0.0, epsrel=1e-12)
    oscillating, _ = integrate.quad(lambda t: t ** (-1.0 - 2.0 * s), 1.0, np.inf,
                                    weight="cos", wvar=1.0, epsabs=1e-14, limlst=100)
    return 2.0 * (inner + 1.0 / (2.0 * s) - oscillating)


@lru_cache(maxsize=256)
def _levy_constant(d: int, s: float) -> float:
    return 1.0 / (_transverse_factor(d, s) * _one_dimensional_integral(s))


class FractionalOperatorService:
    """Fractional Laplacian in spectral and singular-integral form, and the fractional gradient energy."""

    def __init__(self, tail_tol: float = Config.TAIL_TOL, quad_tol: float = Config.QUAD_TOL):
        self.tail_tol = tail_tol
        self.quad_tol = quad_tol
        self.logger = structlog.get_logger(__name__)

    @measure_service_operation_time(service="FractionalOperatorService", operation="spectral_fractional_laplacian")
    def spectral_fractional_laplacian(self, f: FieldGrid, s: float) -> FieldGrid:
        """
        Apply the Fourier multiplier |ξ|^{2s} on the torus of ``f``.

        The zero mode is always mapped to 0, so for s < 0 the result is
        defined modulo an additive constant and for s = 0 the operator
        removes the mean.

        Raises:
            ValidationError: if ``f`` is not periodic
        """
        if f.boundary_mode is not BoundaryMode.TORUS:
            raise ValidationError(field="boundary_mode", message="spectral operator needs a Torus grid")
        spectrum = np.fft.rfftn(f.values)
        magnitude = fourier.frequency_magnitude(f.values.shape, f.spacing, real=True)
        multiplier = np.zeros_like(magnitude)
        nonzero = magnitude > 0
        multiplier[nonzero] = magnitude[nonzero] ** (2.0 * s)
        values = np.fft.irfftn(spectrum * multiplier, s=f.values.shape)
        return f.with_values(values)

    def levy_constant(self, d: int, s: float) -> float:
        """
        C(d,s) with 1/C(d,s) = ∫_{R^d} (1 - cos x₁)|x|^{-d-2s} dx.

        The transverse directions integrate out to a one-dimensional factor,
        leaving ∫_R (1 - cos t)|t|^{-1-2s} dt, which is split at |t| = 1: an
        algebraic-weight rule below and a cosine-weight Fourier rule above.

        Raises:
            DomainError: unless 0 < s < 1
        """
        _check_fractional(s)
        if d < 1:
            raise ValidationError(field="d", message=f"dimension must be positive, got {d}")
        try:
            return _levy_constant(int(d), float(s))
        except Exception as e:
            self.logger.error("levy_constant_failed", d=d, s=s, error=str(e), error_type=type(e).__name__)
            raise

    @staticmethod
    def levy_constant_closed_form(d: int, s: float) -> float:
        """s·4^s Γ(d/2 + s) / (π^{d/2} Γ(1 - s))."""
        _check_fractional(s)
        return s * 4.0 ** s * math.gamma(d / 2.0 + s) / (math.pi ** (d / 2.0) * math.gamma(1.0 - s))

    @staticmethod
    def transverse_factor(d: int, s: float) -> float:
        return _transverse_factor(d, s)

    def _sphere_mean(self, f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, d: int):
        directions, weights = quadrature.sphere_rule(d, SPHERE_POINTS.get(d, 16))
        centre = float(f(x[None, :])[0])
        omega = float(np.sum(weights))

        def second_difference(r: np.ndarray) -> np.ndarray:
            points = x[None, None, :] + r[:, None, None] * directions[None, :, :]
            values = np.asarray(f(points.reshape(-1, d)), dtype=float).reshape(len(r), len(weights))
            return 2.0 * (values @ weights - omega * centre)
        return second_difference, centre, omega, directions, weights

    @measure_service_operation_time(service="FractionalOperatorService", operation="singular_integral_fraclap")
    def singular_integral_fraclap(self, f: Callable[[np.ndarray], np.ndarray], x: Sequence[float], s: float,
                                  truncation_radius: float, d: int = 1, scale: float = 1.0,
                                  period: Optional[float] = None) -> float:
        """
        (-Δ)^s f(x) = -½ C(d,s) ∫ (f(x+y) - 2f(x) + f(x-y)) |y|^{-d-2s} dy.

        Args:
            f: vectorized function taking points of shape (K, d)
            x: evaluation point
            s: order in (0, 1)
            truncation_radius: R; |y| > R enters only through the tail bound
            d: dimension (1, 2 or 3)
            scale: length scale of f, sets the radial panel widths
            period: for d = 1, the period of f; the lattice of images is summed
                exactly with the Hurwitz zeta function and no tail remains

        Returns:
            The value of the fractional Laplacian at x

        Raises:
            TailError: if the bound on |y| > R exceeds tail_tol·max(1, |value|)
        """
        _check_fractional(s)
        point = np.asarray(x, dtype=float).reshape(d)
        try:
            constant = self.levy_constant(d, s)
            if period is not None:
                return self._periodized(f, point, s, period, constant)
            value, bound = self._truncated(f, point, s, truncation_radius, d, scale, constant)
            self.logger.debug("singular_integral_evaluated", s=s, d=d, value=value, tail_bound=bound)
            if bound > self.tail_tol * max(1.0, abs(value)):
                raise TailError(
                    field="truncation_radius",
                    message=f"tail bound {bound:.3e} exceeds tolerance at R = {truncation_radius}",
                    bound=bound,
                )
            return value
        except Exception as e:
            self.logger.error("singular_integral_fraclap_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    def _truncated(self, f, point: np.ndarray, s: float, radius: float, d: int, scale: float,
                   constant: float) -> Tuple[float, float]:
        second_difference, centre, omega, directions, _ = self._sphere_mean(f, point, d)
        radial = quadrature.radial_second_difference_integral(second_difference, s, radius, scale)
        exact_tail = -2.0 * centre * omega * radius ** (-2.0 * s) / (2.0 * s)
        on_sphere = np.asarray(f(point[None, :] + radius * directions), dtype=float)
        bound = constant * float(np.max(np.abs(on_sphere))) * omega * radius ** (-2.0 * s) / (2.0 * s)
        return -0.5 * constant * (radial + exact_tail), bound

    def _periodized(self, f, point: np.ndarray, s: float, period: float, constant: float) -> float:
        if point.size != 1:
            raise ValidationError(field="period", message="periodized evaluation is one-dimensional")
        second_difference, _, _, _, _ = self._sphere_mean(f, point, 1)
        # nearest image as the bare power, the remaining images through ζ(1+2s, 1 + t/P)
        near = quadrature.radial_second_difference_integral(second_difference, s, period, period)
        t, w = quadrature.gauss_legendre(PERIODIC_ORDER, 0.0, period)
        images = period ** (-1.0 - 2.0 * s) * special.zeta(1.0 + 2.0 * s, 1.0 + t / period)
        far = float(np.sum(w * images * second_difference(t)))
        return -0.5 * constant * (near + far)

    def _energy_scale(self, d: int, s: float, spacing: float, normalization: DensityNormalization) -> float:
        return (normalization.pair_factor * self.levy_constant(d, s)
                * spacing ** normalization.lattice_power(d) * spacing ** (-d - 2.0 * s))

    @measure_service_operation_time(service="FractionalOperatorService", operation="fractional_gradient_energy")
    def fractional_gradient_energy(self, f: FieldGrid, s: float, truncation_radius: float,
                                   normalization: DensityNormalization = DensityNormalization.CONTINUUM) -> float:
        """
        Discrete ‖∇^s f‖² of a zero-exterior lattice field.

        Equals κ·[½ Σ_x Σ_{0<|k|≤K} |f(x+k) - f(x)|² |k|^{-d-2s} + T_K Σ_x f(x)²]
        with κ = factor·C(d,s)·δ^p·δ^{-d-2s}, K = R/δ and T_K the folded tail,
        which is exactly the quadratic form of the DFGF precision with the
        same truncation and normalization.

        Raises:
            ValidationError: if ``f`` is periodic
        """
        if f.boundary_mode is not BoundaryMode.ZERO_EXTERIOR:
            raise ValidationError(field="boundary_mode", message="fractional gradient energy needs a ZeroExterior grid")
        _check_fractional(s)
        d = f.d
        steps = lattice_sums.radius_steps(truncation_radius, f.spacing)
        autocorrelation = signal.correlate(f.values, f.values, mode="full", method="direct")
        weights = lattice_sums.offset_weights(lattice_sums.offset_norms(f.n, d), d, s, steps)
        norm_sq = float(np.sum(f.values ** 2))
        diagonal = lattice_sums.diagonal_sum(d, s, steps) + lattice_sums.tail_sum(d, s, steps)
        energy = self._energy_scale(d, s, f.spacing, normalization) * (
            norm_sq * diagonal - float(np.sum(weights * autocorrelation))
        )
        self.logger.debug("fractional_gradient_energy_evaluated", s=s, d=d, energy=energy)
        return energy

    @measure_service_operation_time(service="FractionalOperatorService", operation="truncated_operator")
    def truncated_operator(self, indices: np.ndarray, spacing: float, s: float,
                           truncation_radius: Optional[float] = None) -> np.ndarray:
        """
        Matrix of the truncated fractional Laplacian on integer lattice sites, zero outside them.

        A_xx = C δ^{-2s} (S_K + T_K), A_xy = -C δ^{-2s} |k|^{-d-2s}. On the
        interior sites of a domain A·δ^d is the DFGF precision under the
        CONTINUUM normalization.
        """
        _check_fractional(s)
        sites = np.atleast_2d(np.asarray(indices))
        d = sites.shape[1]
        if truncation_radius is None:
            span = np.linalg.norm(sites.max(axis=0) - sites.min(axis=0))
            truncation_radius = max(float(span), 1.0) * spacing
        steps = lattice_sums.radius_steps(truncation_radius, spacing)
        scale = self.levy_constant(d, s) * spacing ** (-2.0 * s)
        weights = lattice_sums.pair_weights(sites, d, s, steps)
        diagonal = lattice_sums.diagonal_sum(d, s, steps) + lattice_sums.tail_sum(d, s, steps)
        return scale * (diagonal * np.eye(len(sites)) - weights)

    def domain_operator(self, domain: LatticeDomain, s: float) -> np.ndarray:
        """Truncated operator on the interior sites of ``domain`` with its truncation radius."""
        return self.truncated_operator(domain.indices, domain.spacing, s, domain.truncation_radius)

    def check_against_spectral(self, grid: FieldGrid, f: Callable[[np.ndarray], np.ndarray], s: float) -> float:
        """Relative L² gap between the spectral operator on ``grid`` and the periodized singular integral of ``f``."""
        spectral = self.spectral_fractional_laplacian(grid, s).values.reshape(-1)
        nodes = grid.coordinates()[0]
        singular = np.array([
            self.singular_integral_fraclap(f, [x], s, truncation_radius=grid.box_length, period=grid.box_length)
            for x in nodes
        ])
        gap = float(np.linalg.norm(spectral - singular) / np.linalg.norm(singular))
        if not math.isfinite(gap):
            raise QuadratureError(field="s", message="non-finite singular integral")
        return gap
