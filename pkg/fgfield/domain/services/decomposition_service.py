import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg, ndimage, special
import structlog

from fgfield.infrastructure.monitoring import measure_service_operation_time
from fgfield.infrastructure.random_streams import Stream, substream
from ..entities.field_spec import FieldSpec, Regime
from ..entities.grids import TestFunctionGrid
from ..entities.matrices import CovMatrix
from ..entities.results import (
    RestrictionResult,
    SphericalKernelQuery,
    SphericalKernelResult,
    SphericalProjectionStudy,
    SplitResult,
)
from ..exceptions import (
    FactorizationError,
    GeometryError,
    HypergeometricError,
    QuadratureError,
    ValidationError,
)
from ..validators.run_config import RunConfig
from . import lattice_sums, realspace
from .fractional_operator_service import FractionalOperatorService
from .hypergeometric import hyp2f1
from .kernel_service import KernelService
from .sampler_service import ExactMode, SamplerService

AGREEMENT_TOL = 1e-8
THETA_EPSREL = 1e-12
PROJECTION_ANGLES = 256
PROJECTION_RADII = (0.03, 0.06, 0.12)


class _Conditioning:
    """Factorizations shared by every split over one (cov, D) pair."""

    def __init__(self, cov: CovMatrix, d_mask: np.ndarray):
        self.d_mask = d_mask
        inner, outer = np.flatnonzero(d_mask), np.flatnonzero(~d_mask)
        sigma_ee = cov.submatrix(outer)
        sigma_de = cov.submatrix(inner, outer)
        try:
            ee_factor = linalg.cho_factor(sigma_ee, lower=True)
            self.exterior_factor = linalg.cholesky(sigma_ee, lower=True)
        except linalg.LinAlgError as exc:
            raise FactorizationError(field="cov", message=f"exterior block is not positive definite: {exc}") from exc
        # M = Σ_DE Σ_EE⁻¹
        self.conditioning_map = linalg.cho_solve(ee_factor, sigma_de.T).T
        schur = cov.submatrix(inner) - self.conditioning_map @ sigma_de.T
        schur = 0.5 * (schur + schur.T)
        try:
            self.schur_factor = linalg.cholesky(schur, lower=True)
        except linalg.LinAlgError as exc:
            raise FactorizationError(field="cov", message=f"Schur complement is not positive definite: {exc}") from exc
        self.inner, self.outer = inner, outer

    def harmonic(self, exterior_values: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.d_mask))
        out[self.outer] = exterior_values
        out[self.inner] = self.conditioning_map @ exterior_values
        return out


class DecompositionService:
    """Gaussian conditioning splits, restrictions to hyperplanes and spherical reductions."""

    def __init__(self, kernel_service: Optional[KernelService] = None,
                 operators: Optional[FractionalOperatorService] = None,
                 sampler: Optional[SamplerService] = None):
        self.kernel_service = kernel_service or KernelService()
        self.operators = operators or FractionalOperatorService()
        self.sampler = sampler or SamplerService(operators=self.operators, kernel_service=self.kernel_service)
        self.logger = structlog.get_logger(__name__)

    # conditioning

    @staticmethod
    def _mask(cov: CovMatrix, d_mask: Sequence[bool]) -> np.ndarray:
        mask = np.asarray(d_mask, dtype=bool).reshape(-1)
        if mask.shape[0] != cov.size:
            raise ValidationError(field="d_mask", message=f"mask has {mask.shape[0]} entries for {cov.size} points")
        if mask.all() or not mask.any():
            raise ValidationError(field="d_mask", message="D must be a proper nonempty subset of the points")
        return mask

    @staticmethod
    def _exterior(values: Sequence[float], size: int) -> np.ndarray:
        vector = np.asarray(values, dtype=float).reshape(-1)
        if vector.shape[0] != size:
            raise ValidationError(field="exterior_values", message=f"expected {size} exterior values, got {vector.shape[0]}")
        return vector

    @measure_service_operation_time(service="DecompositionService", operation="condition_on_complement")
    def condition_on_complement(self, cov: CovMatrix, d_mask: Sequence[bool], exterior_values: Sequence[float],
                                config: RunConfig, index: int = 0) -> SplitResult:
        """
        Split a field given on E = P \\ D into its conditional mean and an independent zero-boundary draw.

        Args:
            cov: Covariance over all points P
            d_mask: Mask of the points in D
            exterior_values: Field values on E, in point order
            config: Run configuration carrying the seed
            index: Substream index of the zero-boundary draw

        Returns:
            SplitResult with harmonic part Σ_DE Σ_EE⁻¹ g on D (g on E) and a
            zero part drawn from the Schur complement

        Raises:
            FactorizationError: if Σ_EE or the Schur complement cannot be factored
        """
        seed = config.require_seed()
        mask = self._mask(cov, d_mask)
        try:
            conditioning = _Conditioning(cov, mask)
            return self._split(cov, conditioning, self._exterior(exterior_values, len(conditioning.outer)), seed, index)
        except Exception as e:
            self.logger.error("condition_on_complement_failed", size=cov.size, error=str(e),
                              error_type=type(e).__name__)
            raise

    def _split(self, cov: CovMatrix, conditioning: _Conditioning, exterior: np.ndarray,
               seed: int, index: int) -> SplitResult:
        zero_part = np.zeros(cov.size)
        z = substream(seed, Stream.CONDITION, index).standard_normal(len(conditioning.inner))
        zero_part[conditioning.inner] = conditioning.schur_factor @ z
        return SplitResult(harmonic_part=conditioning.harmonic(exterior), zero_part=zero_part,
                           conditioning_map=conditioning.conditioning_map, d_mask=conditioning.d_mask,
                           points=cov.points)

    @measure_service_operation_time(service="DecompositionService", operation="resample_split")
    def resample_split(self, cov: CovMatrix, d_mask: Sequence[bool], config: RunConfig,
                       count: Optional[int] = None) -> List[SplitResult]:
        """
        Draw the exterior from Σ_EE and condition on it, ``count`` times.

        The reassembled fields harmonic_part + zero_part have the law of ``cov``.
        """
        seed = config.require_seed()
        mask = self._mask(cov, d_mask)
        conditioning = _Conditioning(cov, mask)
        total = count if count is not None else config.ensemble_size
        splits = []
        for index in range(total):
            z = substream(seed, Stream.EXTERIOR, index).standard_normal(len(conditioning.outer))
            splits.append(self._split(cov, conditioning, conditioning.exterior_factor @ z, seed, index))
        return splits

    def split_field(self, cov: CovMatrix, d_mask: Sequence[bool], values: Sequence[float]) -> SplitResult:
        """Deterministic split of a given field: conditional mean from its E values plus the remainder on D."""
        mask = self._mask(cov, d_mask)
        field_values = self._exterior(values, cov.size)
        conditioning = _Conditioning(cov, mask)
        harmonic = conditioning.harmonic(field_values[conditioning.outer])
        zero_part = np.where(mask, field_values - harmonic, 0.0)
        return SplitResult(harmonic_part=harmonic, zero_part=zero_part,
                           conditioning_map=conditioning.conditioning_map, d_mask=mask, points=cov.points)

    # s-harmonicity

    @staticmethod
    def _lattice_indices(points: np.ndarray, spacing: float) -> np.ndarray:
        scaled = points / spacing
        indices = np.rint(scaled)
        if float(np.max(np.abs(scaled - indices))) > 1e-9:
            raise GeometryError(field="points", message=f"points do not lie on the lattice of spacing {spacing}")
        return indices.astype(np.int64)

    @staticmethod
    def _stencil_power(indices: np.ndarray, spacing: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
        """(-Δ_h)^order with zero values off the point set, and the mask of points whose stencil stays inside it."""
        lookup = {tuple(site): i for i, site in enumerate(indices.tolist())}
        size, d = indices.shape
        laplacian = np.zeros((size, size))
        complete = np.ones(size, dtype=bool)
        neighbours = [[] for _ in range(size)]
        for i, site in enumerate(indices.tolist()):
            laplacian[i, i] = 2.0 * d
            for offset in lattice_sums.neighbour_offsets(d):
                j = lookup.get(tuple(a + b for a, b in zip(site, offset)))
                if j is None:
                    complete[i] = False
                else:
                    laplacian[i, j] -= 1.0
                    neighbours[i].append(j)
        laplacian /= spacing ** 2
        valid = complete.copy()
        for _ in range(order - 1):
            valid = np.array([valid[i] and all(valid[j] for j in neighbours[i]) for i in range(size)])
        return np.linalg.matrix_power(laplacian, order), valid

    @measure_service_operation_time(service="DecompositionService", operation="s_harmonicity_residual")
    def s_harmonicity_residual(self, split: SplitResult, s: float, spacing: float, margin: float = 0.0,
                               truncation_radius: Optional[float] = None, part: str = "harmonic") -> float:
        """
        max over core points of D of |(-Δ)^s h| / max|h| for the chosen part of a split.

        Integer s applies powers of the nearest-neighbour stencil; s in (0, 1)
        the truncated singular-integral matrix with zero values outside the
        points. Core points lie in D at distance greater than ``margin`` from
        every exterior point (and, for stencils, with the whole stencil inside
        the point set).

        Raises:
            GeometryError: if the points are not on a lattice of the given spacing
            ValidationError: for non-integer s outside (0, 1), an unknown part or an empty core
        """
        if part not in ("harmonic", "zero"):
            raise ValidationError(field="part", message=f"unknown part {part!r}")
        values = split.harmonic_part if part == "harmonic" else split.zero_part
        indices = self._lattice_indices(split.points, spacing)
        spec = FieldSpec.of(s, split.points.shape[1])
        if spec.integer_order is not None and spec.integer_order >= 1:
            operator, valid = self._stencil_power(indices, spacing, spec.integer_order)
        elif 0.0 < spec.s < 1.0:
            operator = self.operators.truncated_operator(indices, spacing, spec.s, truncation_radius)
            valid = np.ones(len(indices), dtype=bool)
        else:
            raise ValidationError(field="s", message=f"s-harmonicity needs integer s or 0 < s < 1, got {s}")

        exterior = split.points[~split.d_mask]
        gaps = np.min(np.linalg.norm(split.points[:, None, :] - exterior[None, :, :], axis=-1), axis=1)
        core = split.d_mask & valid & (gaps > margin)
        if not core.any():
            raise ValidationError(field="margin", message="no core points remain inside D")
        scale = float(np.max(np.abs(values)))
        if scale == 0.0:
            return 0.0
        residual = float(np.max(np.abs(operator[core] @ values))) / scale
        self.logger.info("s_harmonicity_residual", s=s, part=part, core_points=int(core.sum()), residual=residual)
        return residual

    # zero-boundary fields on lattice point sets

    def _dirichlet_spectrum(self, points: np.ndarray, spacing: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ValidationError(field="points", message="points must be an (N, d) array")
        laplacian, _ = self._stencil_power(self._lattice_indices(points, spacing), spacing, 1)
        eigenvalues, eigenvectors = linalg.eigh(laplacian)
        return laplacian, eigenvalues, eigenvectors

    @staticmethod
    def _noise(points: np.ndarray, spacing: float, config: RunConfig, index: int) -> np.ndarray:
        seed = config.require_seed()
        return substream(seed, Stream.CONDITION, index).standard_normal(len(points)) * spacing ** (-points.shape[1] / 2.0)

    def zero_boundary_field(self, points: np.ndarray, spacing: float, s: float, config: RunConfig,
                            index: int = 0) -> np.ndarray:
        """(-Δ_D)^{-s/2} W on lattice points, with the field taken to vanish off the point set."""
        _, eigenvalues, eigenvectors = self._dirichlet_spectrum(points, spacing)
        noise = self._noise(np.asarray(points), spacing, config, index)
        return eigenvectors @ (eigenvalues ** (-float(s) / 2.0) * (eigenvectors.T @ noise))

    @measure_service_operation_time(service="DecompositionService", operation="laplacian_intertwining_residual")
    def laplacian_intertwining_residual(self, points: np.ndarray, spacing: float, s: float, config: RunConfig,
                                        index: int = 0) -> float:
        """
        max |(-Δ_D) h^s - h^{s-2}| / max |h^{s-2}| for zero-boundary fields sharing one noise draw.

        Both fields come from the eigendecomposition of the nearest-neighbour
        Dirichlet Laplacian of the point set; the Laplacian is then applied to
        h^s as a stencil, not through the eigenbasis.

        Raises:
            GeometryError: if the points are not on a lattice of the given spacing
        """
        try:
            laplacian, eigenvalues, eigenvectors = self._dirichlet_spectrum(points, spacing)
            coefficients = eigenvectors.T @ self._noise(np.asarray(points), spacing, config, index)
            field = eigenvectors @ (eigenvalues ** (-float(s) / 2.0) * coefficients)
            lowered = eigenvectors @ (eigenvalues ** (1.0 - float(s) / 2.0) * coefficients)
            residual = float(np.max(np.abs(laplacian @ field - lowered))) / float(np.max(np.abs(lowered)))
        except Exception as e:
            self.logger.error("laplacian_intertwining_residual_failed", s=s, error=str(e), error_type=type(e).__name__)
            raise
        self.logger.info("laplacian_intertwining_residual", s=s, points=len(eigenvalues), residual=residual)
        return residual

    # restriction to a hyperplane

    @staticmethod
    def restriction_constant(s: float) -> float:
        """Var of the lifted pairing over the (d-1)-dimensional variance: Γ(s - 1/2) / (2√π Γ(s))."""
        return math.exp(special.gammaln(s - 0.5) - special.gammaln(s)) / (2.0 * math.sqrt(math.pi))

    @measure_service_operation_time(service="DecompositionService", operation="restrict_variance_check")
    def restrict_variance_check(self, d: int, s: float, phi: TestFunctionGrid, config: Optional[RunConfig] = None,
                                widths: Optional[Sequence[float]] = None, mc_draws: int = 0) -> RestrictionResult:
        """
        Compare the d-dimensional field paired with the surface lift of φ to the (d-1)-dimensional field of the same H.

        Args:
            d: Ambient dimension, 2 or 3
            s: Order of the ambient field, above 1/2
            phi: Test function on R^{d-1}
            config: Needed only for the Monte-Carlo estimate
            widths: Transverse mollifier widths for the lift (d = 2); defaults to δ, δ/2, δ/4
            mc_draws: Number of exact 2-D draws on the hyperplane points (0 skips)

        Returns:
            RestrictionResult holding both variances, the analytic ratio, the
            mollified lift values and optional Fourier and Monte-Carlo checks

        Raises:
            ValidationError: for s <= 1/2, d outside {2, 3} or a test function of the wrong dimension
        """
        if not s > 0.5:
            raise ValidationError(field="s", message=f"restriction needs s > 1/2, got {s}")
        if d not in (2, 3):
            raise ValidationError(field="d", message=f"restriction is supported for d = 2 or 3, got {d}")
        if phi.d != d - 1:
            raise ValidationError(field="phi", message=f"test function must live in dimension {d - 1}")
        spec = FieldSpec.of(s, d)
        lower = FieldSpec.of(s - 0.5, d - 1)
        try:
            # the lower-dimensional call also checks the moments φ needs for H
            var_lower = self.kernel_service.real_space_bilinear(lower, phi, phi)
            profile = self.kernel_service.kernel_profile(spec)
            var_d = realspace.bilinear(profile, phi, phi)
            result = RestrictionResult(var_d=var_d, var_lower=var_lower,
                                       analytic_constant=self.restriction_constant(s))
            result.var_fourier = self.kernel_service.covariance_bilinear(lower, phi, phi)
            if d == 2:
                for width in widths if widths is not None else (phi.spacing, phi.spacing / 2, phi.spacing / 4):
                    result.lift_values.append(realspace.bilinear(profile, phi, phi, transverse=float(width)))
            if mc_draws > 0:
                self._restriction_monte_carlo(result, spec, phi, config, mc_draws)
            self.logger.info("restriction_checked", d=d, s=s, ratio=result.ratio,
                             analytic_constant=result.analytic_constant)
            return result
        except Exception as e:
            self.logger.error("restrict_variance_check_failed", d=d, s=s, error=str(e), error_type=type(e).__name__)
            raise

    def _restriction_monte_carlo(self, result: RestrictionResult, spec: FieldSpec, phi: TestFunctionGrid,
                                 config: Optional[RunConfig], draws: int) -> None:
        if config is None:
            raise ValidationError(field="config", message="Monte-Carlo restriction check needs a seeded config")
        if spec.d != 2:
            raise ValidationError(field="d", message="Monte-Carlo restriction check runs on the plane")
        nodes = phi.coordinates()[0]
        points = np.stack([nodes, np.zeros_like(nodes)], axis=1)
        weights = phi.values.reshape(-1) * phi.spacing
        free = np.linalg.norm(points, axis=1) > 0
        covariance = self.kernel_service.fbm_covariance_matrix(spec, points[free])
        result.discrete_variance = float(weights[free] @ covariance.entries @ weights[free])
        samples = self.sampler.sample_fgf_exact(spec, points, ExactMode.PINNED_AT_ZERO, config, count=draws)
        pairings = samples @ weights
        variance = float(np.var(pairings, ddof=1))
        result.mc_variance = variance
        result.mc_stderr = variance * math.sqrt(2.0 / (draws - 1))

    # spherical averages

    def _kernel_constant(self, spec: FieldSpec) -> float:
        if spec.regime is Regime.NONNEG_INTEGER_H:
            return 2.0 * self.kernel_service.log_residue(spec.integer_hurst, spec.d)
        return self.kernel_service.normalization_constant(spec.s, spec.d)

    @staticmethod
    def _sphere_weight(d: int) -> float:
        """Γ(d/2) / (√π Γ((d-1)/2)), the density of the polar angle on S^{d-1}."""
        return math.exp(special.gammaln(d / 2.0) - special.gammaln((d - 1) / 2.0)) / math.sqrt(math.pi)

    def _theta_form(self, q: SphericalKernelQuery, spec: FieldSpec) -> float:
        constant = self._kernel_constant(spec)
        d, two_h = q.d, 2.0 * q.H
        integer = spec.regime is Regime.NONNEG_INTEGER_H

        def rho(theta):
            return np.sqrt(np.maximum(q.r1 ** 2 + q.r2 ** 2 - 2.0 * q.r1 * q.r2 * np.cos(theta), 0.0))

        def kernel(theta):
            r = rho(theta)
            if integer:
                return r ** two_h * np.log(r) if r > 0 else 0.0
            return r ** two_h

        if q.r1 == q.r2 and not integer:
            # ρ = θ·r·sinc(θ/2π) and sin θ = θ·sinc(θ/π); θ^{2H+d-2} goes to the quadrature weight
            def smooth(theta):
                return ((q.r1 * np.sinc(theta / (2.0 * math.pi))) ** two_h
                        * np.sinc(theta / math.pi) ** (d - 2))
            value, _ = integrate.quad(smooth, 0.0, math.pi, weight="alg", wvar=(two_h + d - 2.0, 0.0),
                                      epsabs=0.0, epsrel=THETA_EPSREL, limit=200)
        else:
            value, _ = integrate.quad(lambda t: kernel(t) * np.sin(t) ** (d - 2), 0.0, math.pi,
                                      epsabs=0.0, epsrel=THETA_EPSREL, limit=200)
        if not math.isfinite(value):
            raise QuadratureError(field="theta", message="non-finite spherical average integral")
        return constant * self._sphere_weight(d) * value

    def _closed_form(self, q: SphericalKernelQuery, spec: FieldSpec) -> Tuple[Optional[float], Optional[str]]:
        """The ₂F₁ value, or None with the reason the angle integral has to stand alone."""
        if spec.regime is Regime.NONNEG_INTEGER_H:
            return None, "integer Hurst parameter"
        d = q.d
        z = 4.0 * q.r1 * q.r2 / (q.r1 + q.r2) ** 2
        try:
            series = hyp2f1((d - 1) / 2.0, -q.H, d - 1.0, min(z, 1.0))
        except HypergeometricError as exc:
            self.logger.warning("spherical_closed_form_unavailable", d=d, H=q.H, r1=q.r1, r2=q.r2, reason=str(exc))
            return None, str(exc)
        beta = math.exp(2.0 * special.gammaln((d - 1) / 2.0) - special.gammaln(d - 1.0))
        return (self._kernel_constant(spec) * self._sphere_weight(d) * 2.0 ** (d - 2) * beta
                * (q.r1 + q.r2) ** (2.0 * q.H) * series), None

    @measure_service_operation_time(service="DecompositionService", operation="spherical_average_kernel")
    def spherical_average_kernel(self, q: SphericalKernelQuery) -> SphericalKernelResult:
        """
        Covariance of the spherical averages of the field at radii r1 and r2.

        The polar-angle integral is always computed; for non-integer H the
        ₂F₁ closed form is computed as well and the two must agree.

        Raises:
            ValidationError: if the query has k != 0
            QuadratureError: if the two forms disagree beyond 1e-8 relative
        """
        if q.k != 0:
            raise ValidationError(field="k", message="spherical averages are the k = 0 coefficient")
        spec = FieldSpec.of(q.s, q.d)
        try:
            closed_form, fallback = self._closed_form(q, spec)
            result = SphericalKernelResult(query=q, theta_form=self._theta_form(q, spec),
                                           closed_form=closed_form, fallback=fallback)
            gap = result.relative_gap
            if gap is not None and gap > AGREEMENT_TOL:
                raise QuadratureError(field="theta", message=f"closed form and angle integral differ by {gap:.2e}")
            return result
        except Exception as e:
            self.logger.error("spherical_average_kernel_failed", d=q.d, H=q.H, error=str(e),
                              error_type=type(e).__name__)
            raise

    def spherical_coefficient_cov(self, q: SphericalKernelQuery) -> SphericalKernelResult:
        """Covariance of the degree-k coefficient processes: the average kernel in dimension d + 2k at the same s."""
        return self.spherical_average_kernel(q.shifted())

    def _circle_coefficients(self, values: np.ndarray, spacing: float, radii: Sequence[float]) -> np.ndarray:
        """r^{-1}·∫ h(c + r e_θ) cos θ dθ / √π around the grid centre, bilinear interpolation."""
        n = values.shape[0]
        theta = 2.0 * math.pi * np.arange(PROJECTION_ANGLES) / PROJECTION_ANGLES
        centre = 0.5 * n
        out = np.empty(len(radii))
        for i, r in enumerate(radii):
            rows = centre + r * np.cos(theta) / spacing
            cols = centre + r * np.sin(theta) / spacing
            samples = ndimage.map_coordinates(values, [rows, cols], order=1, mode="wrap")
            out[i] = np.sum(samples * np.cos(theta)) * (2.0 * math.pi / PROJECTION_ANGLES) / (math.sqrt(math.pi) * r)
        return out

    @measure_service_operation_time(service="DecompositionService", operation="spherical_projection_study")
    def spherical_projection_study(self, config: RunConfig, s: float = 1.25,
                                   radii: Sequence[float] = PROJECTION_RADII,
                                   count: Optional[int] = None) -> SphericalProjectionStudy:
        """
        Project planar spectral samples onto cos θ around circles and compare with the d = 4 average kernel.

        The empirical covariances of the degree-one coefficients are fitted to
        the kernel with one least-squares constant.
        """
        if config.d != 2:
            raise ValidationError(field="d", message="projection study runs on planar samples")
        total = count if count is not None else config.ensemble_size
        radii = list(radii)
        coefficients = np.stack([
            self._circle_coefficients(self.sampler.sample_fgf_spectral(config, s, index).values, config.spacing, radii)
            for index in range(total)
        ])
        covariance = np.cov(coefficients, rowvar=False)
        pairs = [(i, j) for i in range(len(radii)) for j in range(i, len(radii))]
        empirical = np.array([covariance[i, j] for i, j in pairs])
        errors = np.array([math.sqrt((covariance[i, i] * covariance[j, j] + covariance[i, j] ** 2) / total)
                           for i, j in pairs])
        H = s - 1.0
        kernel = np.array([
            self.spherical_coefficient_cov(SphericalKernelQuery(d=2, H=H, k=1, r1=radii[i], r2=radii[j])).value
            for i, j in pairs
        ])
        fitted = float(np.sum(empirical * kernel) / np.sum(kernel ** 2))
        pair_radii = np.array([(radii[i], radii[j]) for i, j in pairs])
        study = SphericalProjectionStudy(radii=pair_radii, empirical=empirical, standard_errors=errors,
                                         kernel=kernel, fitted_constant=fitted)
        self.logger.info("spherical_projection_study", draws=total, fitted_constant=fitted,
                         max_relative_deviation=study.max_relative_deviation)
        return study

    def summary(self, result: RestrictionResult) -> Dict[str, float]:
        """Flat view of a restriction check for reports."""
        out = {
            "var_d": result.var_d,
            "var_lower": result.var_lower,
            "ratio": result.ratio,
            "analytic_constant": result.analytic_constant,
        }
        for position, drift in enumerate(result.lift_drift):
            out[f"lift_drift_{position}"] = drift
        for key in ("var_fourier", "mc_variance", "mc_stderr", "discrete_variance"):
            value = getattr(result, key)
            if value is not None:
                out[key] = value
        return out
