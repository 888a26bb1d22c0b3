from enum import Enum
import math
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
import structlog

from fgfield.infrastructure.monitoring import measure_service_operation_time
from fgfield.infrastructure.random_streams import Stream, substream
from ..entities.field_spec import FieldSpec
from ..entities.grids import BoundaryMode, FieldGrid, TestFunctionGrid
from ..entities.matrices import CovMatrix
from ..entities.results import EigenfunctionSample, SampleEnsemble, StructureFunction
from ..exceptions import InsufficientData, TailError, ValidationError
from ..validators.run_config import RunConfig
from . import quadrature
from .fractional_operator_service import FractionalOperatorService
from .green_service import GreenService
from .kernel_service import KernelService

MIN_PAIRS = 100


class ExactMode(str, Enum):
    PINNED_AT_ZERO = "PinnedAtZero"
    ZERO_BOUNDARY_BALL = "ZeroBoundaryBall"


class SamplerService:
    """Draws of fractional Gaussian fields: spectral on the torus, exact from covariance matrices, and eigen-series."""

    def __init__(self, operators: Optional[FractionalOperatorService] = None,
                 kernel_service: Optional[KernelService] = None,
                 green_service: Optional[GreenService] = None):
        self.operators = operators or FractionalOperatorService()
        self.kernel_service = kernel_service or KernelService()
        self.green_service = green_service or GreenService(self.kernel_service)
        self.logger = structlog.get_logger(__name__)

    @measure_service_operation_time(service="SamplerService", operation="sample_white_noise")
    def sample_white_noise(self, config: RunConfig, index: int = 0) -> FieldGrid:
        """
        I.i.d. N(0, δ^{-d}) lattice values, so that Σ W φ δ^d has variance Σ φ² δ^d.

        Raises:
            ValidationError: without a seed
        """
        seed = config.require_seed()
        shape = (config.n,) * config.d
        noise = substream(seed, Stream.WHITE_NOISE, index).standard_normal(shape)
        return FieldGrid(values=noise * config.spacing ** (-config.d / 2.0), spacing=config.spacing,
                         boundary_mode=BoundaryMode.TORUS)

    @measure_service_operation_time(service="SamplerService", operation="sample_fgf_spectral")
    def sample_fgf_spectral(self, config: RunConfig, s: float, index: int = 0) -> FieldGrid:
        """
        h = (-Δ)^{-s/2} W on the torus of the config, zero mode removed.

        The torus field differs from the whole-space field at wavelengths
        comparable to the box; exact samplers are the reference for
        covariance checks.
        """
        noise = self.sample_white_noise(config, index)
        return self.operators.spectral_fractional_laplacian(noise, -s / 2.0)

    @measure_service_operation_time(service="SamplerService", operation="sample_coupled_family")
    def sample_coupled_family(self, config: RunConfig, s_list: Sequence[float], index: int = 0) -> Dict[float, FieldGrid]:
        """One white-noise draw pushed through the spectral pipeline for every s in ``s_list``."""
        if not len(s_list):
            raise ValidationError(field="s_list", message="need at least one order")
        noise = self.sample_white_noise(config, index)
        family = {float(s): self.operators.spectral_fractional_laplacian(noise, -float(s) / 2.0) for s in s_list}
        self.logger.info("coupled_family_sampled", orders=sorted(family), n=config.n, d=config.d)
        return family

    def spectral_ensemble(self, config: RunConfig, s: float, count: Optional[int] = None) -> SampleEnsemble:
        total = count if count is not None else config.ensemble_size
        samples = np.stack([self.sample_fgf_spectral(config, s, index).values for index in range(total)])
        return SampleEnsemble(samples=samples, spec=FieldSpec.of(s, config.d), spacing=config.spacing,
                              config=config, periodic=True)

    def pairings(self, ensemble: SampleEnsemble, phi: TestFunctionGrid) -> np.ndarray:
        """(h, φ) = Σ h φ δ^d for every member; φ must live on the sample grid."""
        if phi.values.shape != ensemble.samples.shape[1:]:
            raise ValidationError(field="phi", message="test function grid does not match the samples")
        axes = tuple(range(1, ensemble.samples.ndim))
        return np.sum(ensemble.samples * phi.values, axis=axes) * ensemble.spacing ** phi.d

    def _exact_covariance(self, spec: FieldSpec, points: np.ndarray, mode: ExactMode) -> Tuple[CovMatrix, np.ndarray]:
        if mode is ExactMode.PINNED_AT_ZERO:
            at_origin = np.linalg.norm(points, axis=1) == 0.0
            return self.kernel_service.fbm_covariance_matrix(spec, points[~at_origin]), ~at_origin
        return self.green_service.ball_covariance_matrix(spec.s, spec.d, points), np.ones(len(points), dtype=bool)

    @measure_service_operation_time(service="SamplerService", operation="sample_fgf_exact")
    def sample_fgf_exact(self, spec: FieldSpec, points: Sequence[Sequence[float]], mode: ExactMode,
                         config: RunConfig, count: Optional[int] = None) -> np.ndarray:
        """
        Exact finite-dimensional draws L·z from the Cholesky factor of the point covariance.

        PinnedAtZero uses the pinned covariance (0 < H < 1) and returns
        exactly 0 at points equal to the origin; ZeroBoundaryBall uses the
        ball Green's function.

        Returns:
            Array of shape (count, len(points)); count defaults to the ensemble size

        Raises:
            DomainError: outside 0 < H < 1 in pinned mode
            PSDError: if the covariance fails its eigenvalue floor
        """
        seed = config.require_seed()
        pts = np.asarray(points, dtype=float).reshape(-1, spec.d)
        total = count if count is not None else config.ensemble_size
        try:
            covariance, free = self._exact_covariance(spec, pts, ExactMode(mode))
            factor = covariance.cholesky()
            draws = np.zeros((total, len(pts)))
            for index in range(total):
                z = substream(seed, Stream.EXACT, index).standard_normal(covariance.size)
                draws[index, free] = factor @ z
            return draws
        except Exception as e:
            self.logger.error("sample_fgf_exact_failed", s=spec.s, d=spec.d, error=str(e), error_type=type(e).__name__)
            raise

    # eigenfunction field on (0, π)^d

    @staticmethod
    def _modes(d: int, n_modes: int) -> np.ndarray:
        axis = np.arange(1, n_modes + 1)
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([component.reshape(-1) for component in mesh], axis=1)

    @staticmethod
    def _eigenfunctions(modes: np.ndarray, points: np.ndarray) -> np.ndarray:
        """∏_i √(2/π) sin(k_i x_i), shape (points, modes)."""
        d = modes.shape[1]
        values = np.ones((len(points), len(modes)))
        for axis in range(d):
            values *= math.sqrt(2.0 / math.pi) * np.sin(np.outer(points[:, axis], modes[:, axis]))
        return values

    @staticmethod
    def efgf_tail_bound(s: float, d: int, n_modes: int) -> float:
        """Bound on the pointwise variance carried by the modes outside {1..K}^d."""
        if s <= d / 2.0:
            raise TailError(field="s", message=f"the eigen-series diverges pointwise for s <= d/2 (s = {s}, d = {d})")
        if d == 1:
            return (2.0 / math.pi) * n_modes ** (1.0 - 2.0 * s) / (2.0 * s - 1.0)
        radius = n_modes - math.sqrt(d)
        if radius <= 0:
            return math.inf
        return (quadrature.sphere_area(d) / 2 ** d * (2.0 / math.pi) ** d
                * radius ** (d - 2.0 * s) / (2.0 * s - d))

    def _check_box(self, points: np.ndarray) -> None:
        if np.any(points < 0) or np.any(points > math.pi):
            raise ValidationError(field="eval_points", message="evaluation points must lie in [0, π]^d")

    @measure_service_operation_time(service="SamplerService", operation="sample_efgf")
    def sample_efgf(self, s: float, d: int, n_modes: int, eval_points: Sequence[Sequence[float]],
                    config: RunConfig, index: int = 0) -> EigenfunctionSample:
        """
        Σ_k Z_k λ_k^{-s/2} f_k(x) over the sine modes k ∈ {1..K}^d of the box (0, π)^d, λ_k = |k|².

        Raises:
            TailError: for s <= d/2, where the series has no pointwise value
        """
        seed = config.require_seed()
        tail = self.efgf_tail_bound(s, d, n_modes)
        points = np.asarray(eval_points, dtype=float).reshape(-1, d)
        self._check_box(points)
        modes = self._modes(d, n_modes)
        eigenvalues = np.sum(modes ** 2, axis=1).astype(float)
        z = substream(seed, Stream.EIGENFUNCTION, index).standard_normal(len(modes))
        values = self._eigenfunctions(modes, points) @ (z * eigenvalues ** (-s / 2.0))
        return EigenfunctionSample(values=values, tail_bound=tail, n_modes=n_modes)

    def efgf_covariance(self, s: float, d: int, n_modes: int, x: Sequence[float],
                        y: Sequence[float]) -> Tuple[float, float]:
        """Partial sum Σ λ_k^{-s} f_k(x) f_k(y) and its tail bound."""
        tail = self.efgf_tail_bound(s, d, n_modes)
        points = np.vstack([np.asarray(x, dtype=float).reshape(1, d), np.asarray(y, dtype=float).reshape(1, d)])
        self._check_box(points)
        modes = self._modes(d, n_modes)
        eigenvalues = np.sum(modes ** 2, axis=1).astype(float)
        basis = self._eigenfunctions(modes, points)
        return float(np.sum(basis[0] * basis[1] * eigenvalues ** (-s))), tail

    # diagnostics

    @measure_service_operation_time(service="SamplerService", operation="structure_function")
    def structure_function(self, ensemble: SampleEnsemble, lags: Iterable[float]) -> StructureFunction:
        """
        Mean of |h(x + r) - h(x)|² along the first grid axis for each lag.

        Lags are snapped to whole lattice steps. The slope of log S(r)
        against log r estimates 2H.

        Raises:
            InsufficientData: if some lag has fewer than 100 sample pairs
        """
        samples = ensemble.samples
        n = samples.shape[1]
        steps, values, counts = [], [], []
        for lag in lags:
            m = int(round(float(lag) / ensemble.spacing))
            if m < 1:
                raise ValidationError(field="lags", message=f"lag {lag} is below one lattice step")
            if ensemble.periodic:
                increments = np.roll(samples, -m, axis=1) - samples
            else:
                increments = samples[:, m:] - samples[:, :n - m]
            pairs = increments.size // max(1, int(np.prod(samples.shape[2:])))
            if pairs < MIN_PAIRS:
                raise InsufficientData(field="lags", message=f"lag {lag}: {pairs} pairs, need {MIN_PAIRS}")
            steps.append(m)
            values.append(float(np.mean(increments ** 2)))
            counts.append(pairs)
        lag_values = np.asarray(steps, dtype=float) * ensemble.spacing
        value_array = np.asarray(values)
        if len(values) >= 2 and np.all(value_array > 0):
            slope = float(np.polyfit(np.log(lag_values), np.log(value_array), 1)[0])
        else:
            slope = float("nan")
        return StructureFunction(lags=lag_values, values=value_array, pair_counts=np.asarray(counts), slope=slope)

    def gaussianity(self, pairings: np.ndarray) -> Dict[str, float]:
        """Skewness and excess kurtosis of standardized pairings."""
        values = np.asarray(pairings, dtype=float)
        if len(values) < MIN_PAIRS:
            raise InsufficientData(field="pairings", message=f"{len(values)} draws, need {MIN_PAIRS}")
        standardized = (values - values.mean()) / values.std()
        return {
            "skewness": float(stats.skew(standardized)),
            "excess_kurtosis": float(stats.kurtosis(standardized, fisher=True)),
            "draws": int(len(values)),
        }
