import math
from typing import Sequence

import numpy as np
from scipy import special
import structlog

from fgfield.config import Config
from fgfield.infrastructure.monitoring import measure_service_operation_time
from ..entities.field_spec import FieldSpec, Regime
from ..entities.grids import TestFunctionGrid
from ..entities.matrices import CovMatrix, PSD_FLOOR
from ..exceptions import (
    DomainError,
    MomentError,
    NoPointwiseKernel,
    PoleError,
    PSDError,
    ValidationError,
)
from . import fourier, quadrature, realspace

# Inner-ball radius of the Fourier oracle, in units of the lattice frequency step 2π/L.
CUTOFF_STEPS = 10
MAX_REFINEMENTS = 6


class KernelService:
    """Whole-space FGF covariance kernels, their constants, and the Fourier covariance oracle."""

    def __init__(self, quad_tol: float = Config.QUAD_TOL, pad_factor: int = Config.PAD_FACTOR):
        self.quad_tol = quad_tol
        self.pad_factor = pad_factor
        self.logger = structlog.get_logger(__name__)

    def normalization_constant(self, s: float, d: int) -> float:
        """
        C(s,d) = 2^{-2s} π^{-d/2} Γ(d/2 - s) / Γ(s), evaluated through log-gamma with sign tracking.

        Raises:
            DomainError: if s <= 0
            PoleError: if H = s - d/2 is a nonnegative integer
        """
        spec = FieldSpec.of(s, d)
        if spec.s <= 0:
            raise DomainError(field="s", message=f"C(s,d) needs s > 0, got {spec.s}")
        if spec.regime is Regime.NONNEG_INTEGER_H:
            raise PoleError(spec.s, d)
        a = d / 2.0 - spec.s
        log_abs = (-2.0 * spec.s * math.log(2.0) - 0.5 * d * math.log(math.pi)
                   + special.gammaln(a) - special.gammaln(spec.s))
        sign = special.gammasgn(a) * special.gammasgn(spec.s)
        return float(sign * math.exp(log_abs))

    def log_residue(self, k: int, d: int) -> float:
        """c₋₁ = (-1)^{k+1} 2^{-2k-d} π^{-d/2} / (k! Γ(d/2 + k))."""
        if isinstance(k, bool) or int(k) != k or k < 0:
            raise ValidationError(field="k", message=f"k must be a nonnegative integer, got {k}")
        if isinstance(d, bool) or int(d) != d or d < 1:
            raise ValidationError(field="d", message=f"d must be a positive integer, got {d}")
        k, d = int(k), int(d)
        return ((-1.0) ** (k + 1) * 2.0 ** (-2 * k - d) * math.pi ** (-d / 2.0)
                / (math.factorial(k) * math.gamma(d / 2.0 + k)))

    def kernel_profile(self, spec: FieldSpec) -> realspace.KernelProfile:
        """The radial kernel of ``spec`` as a profile with derivatives."""
        if not spec.has_pointwise_kernel:
            raise NoPointwiseKernel(
                field="s",
                message=f"regime {spec.regime.value} has no pointwise kernel; use covariance_bilinear",
            )
        if spec.regime is Regime.NONNEG_INTEGER_H:
            k = spec.integer_hurst
            return realspace.KernelProfile.power_log(2.0 * self.log_residue(k, spec.d), k)
        return realspace.KernelProfile.power(self.normalization_constant(spec.s, spec.d), 2.0 * spec.H)

    def whole_space_kernel(self, spec: FieldSpec, r: float) -> float:
        """
        Pointwise covariance G^s(x, y) at distance r = |x - y| > 0.

        PosNonIntegerH gives C(s,d)·r^{2H}; NonnegIntegerH with H = k gives
        2·c₋₁·r^{2k}·ln r.

        Raises:
            NoPointwiseKernel: for s <= 0
            ValidationError: if r <= 0
        """
        if not r > 0:
            raise ValidationError(field="r", message=f"distance must be positive, got {r}")
        return float(self.kernel_profile(spec).value(np.float64(r)))

    def _check_moments(self, spec: FieldSpec, *phis: TestFunctionGrid) -> None:
        if spec.H < 0:
            return
        needed = spec.hurst_floor
        for position, phi in enumerate(phis, start=1):
            if phi.moment_order < needed:
                raise MomentError(
                    field=f"phi{position}",
                    message=f"moments vanish to order {phi.moment_order}, need {needed} for H = {spec.H}",
                )

    @staticmethod
    def _real_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Re(a·conj b), written out so that swapping a and b gives identical bits."""
        return a.real * b.real + a.imag * b.imag

    @measure_service_operation_time(service="KernelService", operation="covariance_bilinear")
    def covariance_bilinear(self, spec: FieldSpec, phi1: TestFunctionGrid, phi2: TestFunctionGrid) -> float:
        """
        (2π)^{-d} ∫ |ξ|^{-2s} φ̂1(ξ) conj φ̂2(ξ) dξ for any real s.

        The sampled test functions are treated as band limited, so the integral
        runs over the principal frequency cell. A smooth radial partition splits
        it: the outer part is a lattice Riemann sum over the zero-padded DFT,
        the inner ball is integrated in polar coordinates with a Gauss–Jacobi
        radial rule absorbing |ξ|^{d-1-2s+2p}, where p = ⌊H⌋ + 1 is the
        guaranteed vanishing order of φ̂ at the origin.

        Raises:
            MomentError: if a test function has too few vanishing moments
            QuadratureError: if the inner refinement does not converge
        """
        if not phi1.compatible_with(phi2):
            raise ValidationError(field="phi2", message="test functions must share one grid")
        if spec.d != phi1.d:
            raise ValidationError(field="d", message=f"spec has d = {spec.d}, test functions d = {phi1.d}")
        self._check_moments(spec, phi1, phi2)
        try:
            d, delta, n = spec.d, phi1.spacing, phi1.n
            size = self.pad_factor * n
            box = size * delta
            rho = CUTOFF_STEPS * 2.0 * math.pi / box

            # outer part
            cell = delta ** d
            hat1 = np.fft.fftn(fourier.zero_pad(phi1.values, size)) * cell
            hat2 = hat1 if phi2 is phi1 else np.fft.fftn(fourier.zero_pad(phi2.values, size)) * cell
            magnitude = fourier.frequency_magnitude(hat1.shape, delta)
            weight = np.zeros_like(magnitude)
            nonzero = magnitude > 0
            weight[nonzero] = (1.0 - quadrature.radial_cutoff(magnitude[nonzero], rho)) * magnitude[nonzero] ** (-2.0 * spec.s)
            outer = float(np.sum(weight * self._real_product(hat1, hat2))) / box ** d

            # inner ball in polar coordinates
            p = spec.hurst_floor + 1 if spec.H >= 0 else 0
            beta = d - 1 - 2.0 * spec.s + 2 * p
            centred = [c - c.mean() for c in phi1.coordinates()]

            def inner(level: int) -> float:
                n_radial = 16 * 2 ** level
                n_angular = 8 * 2 ** level
                t, w_t = quadrature.jacobi_rule(n_radial, 0.0, beta)
                radii = 2.0 * rho * t
                directions, w_dir = quadrature.sphere_rule(d, n_angular)
                xi = (radii[:, None, None] * directions[None, :, :]).reshape(-1, d)
                f1 = fourier.direct_transform(phi1.values, delta, centred, xi)
                f2 = f1 if phi2 is phi1 else fourier.direct_transform(phi2.values, delta, centred, xi)
                product = self._real_product(f1, f2).reshape(len(radii), len(w_dir))
                angular = product @ w_dir
                smooth = quadrature.radial_cutoff(radii, rho) * angular / radii ** (2 * p)
                return float((2.0 * rho) ** (beta + 1) * np.sum(w_t * smooth)) / (2.0 * math.pi) ** d

            scale = abs(outer) + 1e-300
            inner_value, level, change = quadrature.refine_until_stable(
                inner, self.quad_tol, MAX_REFINEMENTS, "covariance_bilinear", floor=scale,
            )
            self.logger.debug(
                "covariance_bilinear_evaluated",
                s=spec.s, d=d, outer=outer, inner=inner_value, refinement_level=level, last_change=change,
            )
            return outer + inner_value
        except Exception as e:
            self.logger.error("covariance_bilinear_failed", s=spec.s, d=spec.d, error=str(e), error_type=type(e).__name__)
            raise

    def covariance_bilinear_torus(self, spec: FieldSpec, phi1: TestFunctionGrid, phi2: TestFunctionGrid) -> float:
        """
        The same pairing on the periodic grid of the test functions: L^{-d} δ^{2d} Σ_{k≠0} |ξ_k|^{-2s} Φ1_k conj Φ2_k.

        This is exactly the covariance of pairings with the spectral torus sampler.
        """
        if not phi1.compatible_with(phi2):
            raise ValidationError(field="phi2", message="test functions must share one grid")
        hat1 = np.fft.fftn(phi1.values)
        hat2 = np.fft.fftn(phi2.values)
        magnitude = fourier.frequency_magnitude(phi1.values.shape, phi1.spacing)
        weight = np.zeros_like(magnitude)
        nonzero = magnitude > 0
        weight[nonzero] = magnitude[nonzero] ** (-2.0 * spec.s)
        cell = phi1.spacing ** phi1.d
        return float(np.sum(weight * self._real_product(hat1, hat2))) * cell ** 2 / phi1.box_length ** phi1.d

    @measure_service_operation_time(service="KernelService", operation="real_space_bilinear")
    def real_space_bilinear(self, spec: FieldSpec, phi1: TestFunctionGrid, phi2: TestFunctionGrid) -> float:
        """
        ∫∫ G^s(x, y) φ1(x) φ2(y) dx dy by direct summation against the pointwise kernel (d ≤ 2).

        Raises:
            NoPointwiseKernel: for s <= 0
            MomentError: if the test functions lack the moments needed for H >= 0
        """
        self._check_moments(spec, phi1, phi2)
        return realspace.bilinear(self.kernel_profile(spec), phi1, phi2)

    def fbm_covariance(self, spec: FieldSpec, x: Sequence[float], y: Sequence[float]) -> float:
        """
        Covariance of the field pinned at the origin: |C(s,d)|·(|x|^{2H} + |y|^{2H} - |x - y|^{2H}).

        Raises:
            DomainError: unless 0 < H < 1
        """
        constant = self._fbm_constant(spec)
        x_arr = np.asarray(x, dtype=float).reshape(spec.d)
        y_arr = np.asarray(y, dtype=float).reshape(spec.d)
        two_h = 2.0 * spec.H
        return float(constant * (np.linalg.norm(x_arr) ** two_h + np.linalg.norm(y_arr) ** two_h
                                 - np.linalg.norm(x_arr - y_arr) ** two_h))

    def _fbm_constant(self, spec: FieldSpec) -> float:
        if not 0.0 < spec.H < 1.0:
            raise DomainError(field="s", message=f"pinned covariance needs 0 < H < 1, got H = {spec.H}")
        return abs(self.normalization_constant(spec.s, spec.d))

    @measure_service_operation_time(service="KernelService", operation="fbm_covariance_matrix")
    def fbm_covariance_matrix(self, spec: FieldSpec, points: np.ndarray) -> CovMatrix:
        """Gram matrix of :meth:`fbm_covariance` on a point set, checked against the eigenvalue floor."""
        pts = np.asarray(points, dtype=float).reshape(-1, spec.d)
        constant = self._fbm_constant(spec)
        two_h = 2.0 * spec.H
        norms = np.linalg.norm(pts, axis=1) ** two_h
        distances = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1) ** two_h
        entries = constant * (norms[:, None] + norms[None, :] - distances)
        matrix = CovMatrix(points=pts, entries=entries)
        if not matrix.is_psd():
            raise PSDError(field="entries", message=f"minimum eigenvalue {matrix.min_eigenvalue():.3e} below floor")
        return matrix

