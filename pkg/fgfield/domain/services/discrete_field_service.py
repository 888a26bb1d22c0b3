import math
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
import structlog

from fgfield.config import Config
from fgfield.infrastructure.monitoring import measure_service_operation_time
from fgfield.infrastructure.random_streams import Stream, substream
from ..entities.grids import TestFunctionGrid
from ..entities.lattice import LatticeDomain
from ..entities.matrices import CovMatrix, DensityNormalization, PrecisionMatrix
from ..entities.results import BallPointPair, ConvergenceReport, ConvergenceRow, WalkEstimate
from ..exceptions import DomainError, DominanceError, ValidationError
from ..validators.run_config import RunConfig
from . import lattice_sums
from .fractional_operator_service import FractionalOperatorService
from .green_service import GreenService

WALK_BATCH = 1000
CONTINUUM_GRID_POINTS = 257


def _check_order(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise DomainError(field="s", message=f"the discrete field is defined for 0 < s < 1, got {s}")


class StepLaw:
    """
    Jump law of the long-range walk on Z^d truncated at |k| <= K.

    Each offset k has probability w(k)/(S_K + T_K); the remaining mass
    T_K/(S_K + T_K) is a jump beyond the truncation radius, which always
    leaves the domain.
    """

    def __init__(self, d: int, s: float, steps: float):
        bound = int(math.floor(steps))
        axis = np.arange(-bound, bound + 1)
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        offsets = np.stack([component.reshape(-1) for component in mesh], axis=1)
        weights = lattice_sums.offset_weights(np.linalg.norm(offsets, axis=1), d, s, steps)
        keep = weights > 0
        self.offsets = offsets[keep]
        self.weights = weights[keep]
        self.tail = lattice_sums.tail_sum(d, s, steps)
        self.total = float(np.sum(self.weights)) + self.tail
        self.cdf = np.cumsum(self.weights) / self.total

    @property
    def exit_probability(self) -> float:
        return self.tail / self.total

    def draw(self, uniforms: np.ndarray) -> np.ndarray:
        """Offset rows for each uniform; index len(offsets) marks a jump beyond the truncation."""
        return np.searchsorted(self.cdf, uniforms, side="right")


class DiscreteFieldService:
    """The discrete fractional Gaussian field on δZ^d ∩ D: precision, sampling and Green's function estimators."""

    def __init__(self, operators: Optional[FractionalOperatorService] = None,
                 green_service: Optional[GreenService] = None,
                 normalization: DensityNormalization = DensityNormalization.CONTINUUM,
                 max_walk_steps: int = Config.MAX_WALK_STEPS):
        self.operators = operators or FractionalOperatorService()
        self.green_service = green_service or GreenService()
        self.normalization = normalization
        self.max_walk_steps = max_walk_steps
        self.logger = structlog.get_logger(__name__)

    def _scale(self, d: int, s: float, spacing: float, normalization: DensityNormalization) -> float:
        return (normalization.pair_factor * self.operators.levy_constant(d, s)
                * spacing ** normalization.lattice_power(d) * spacing ** (-d - 2.0 * s))

    @measure_service_operation_time(service="DiscreteFieldService", operation="assemble_precision")
    def assemble_precision(self, domain: LatticeDomain, s: float,
                           normalization: Optional[DensityNormalization] = None) -> PrecisionMatrix:
        """
        Precision of the DFGF with zero exterior values.

        Off-diagonal entries are -κ|k|^{-d-2s} and diagonal entries
        κ(S_K + T_K), where κ = factor·C(d,s)·δ^p·δ^{-d-2s}, k is the integer
        offset, S_K sums |k|^{-d-2s} over all lattice offsets within the
        truncation radius (interior and exterior sites alike) and T_K is the
        integral bound on the rest.

        Args:
            domain: interior sites and truncation radius
            s: order in (0, 1)
            normalization: ORDERED_PAIRS (factor 2, p = d) or CONTINUUM (factor 1, p = 2d)

        Returns:
            PrecisionMatrix with its diagonal dominance margin and folded tail

        Raises:
            DominanceError: if some row is not strictly diagonally dominant
        """
        _check_order(s)
        norm = normalization or self.normalization
        try:
            steps = lattice_sums.radius_steps(domain.truncation_radius, domain.spacing)
            scale = self._scale(domain.d, s, domain.spacing, norm)
            weights = lattice_sums.pair_weights(domain.indices, domain.d, s, steps)
            tail = lattice_sums.tail_sum(domain.d, s, steps)
            diagonal = lattice_sums.diagonal_sum(domain.d, s, steps) + tail
            entries = scale * (diagonal * np.eye(domain.size) - weights)

            off_diagonal = entries - np.diag(np.diag(entries))
            pairs = ~np.eye(domain.size, dtype=bool)
            if domain.size > 1 and float(np.max(entries[pairs])) >= 0.0:
                raise DominanceError(field="entries", message="off-diagonal precision entries must be negative")
            margin = float(np.min(np.diag(entries) - np.sum(np.abs(off_diagonal), axis=1)))
            if margin <= 0:
                raise DominanceError(
                    field="truncation_radius",
                    message=f"diagonal dominance margin {margin:.3e} is not positive",
                )
            self.logger.info(
                "precision_assembled",
                s=s, d=domain.d, sites=domain.size, spacing=domain.spacing,
                normalization=norm.value, margin=margin,
            )
            return PrecisionMatrix(entries=entries, domain=domain, s=s, normalization=norm,
                                   margin=margin, tail_bound=scale * tail)
        except Exception as e:
            self.logger.error("assemble_precision_failed", s=s, error=str(e), error_type=type(e).__name__)
            raise

    @measure_service_operation_time(service="DiscreteFieldService", operation="sample_dfgf")
    def sample_dfgf(self, precision: PrecisionMatrix, config: RunConfig, index: int = 0) -> np.ndarray:
        """
        Exact draw with precision Q = LLᵀ: solve Lᵀh = z for standard normal z.

        Raises:
            ValidationError: without a seed
            FactorizationError: if Q is not positive definite
        """
        seed = config.require_seed()
        factor = precision.cholesky()
        z = substream(seed, Stream.DISCRETE, index).standard_normal(precision.size)
        return linalg.solve_triangular(factor, z, lower=True, trans="T")

    def sample_dfgf_ensemble(self, precision: PrecisionMatrix, config: RunConfig,
                             count: Optional[int] = None) -> np.ndarray:
        total = count if count is not None else config.ensemble_size
        return np.stack([self.sample_dfgf(precision, config, index) for index in range(total)])

    @measure_service_operation_time(service="DiscreteFieldService", operation="dfgf_green")
    def dfgf_green(self, precision: PrecisionMatrix) -> CovMatrix:
        """Q⁻¹ through the Cholesky factor of Q."""
        factor = precision.cholesky()
        inverse = linalg.cho_solve((factor, True), np.eye(precision.size))
        return CovMatrix(points=precision.domain.points, entries=0.5 * (inverse + inverse.T))

    def time_scale(self, d: int, s: float, steps: float) -> float:
        """γ = C(d,s)⁻¹ (S_K + T_K), the lattice sum behind the total jump rate."""
        total = lattice_sums.diagonal_sum(d, s, steps) + lattice_sums.tail_sum(d, s, steps)
        return total / self.operators.levy_constant(d, s)

    @measure_service_operation_time(service="DiscreteFieldService", operation="walk_green_estimator")
    def walk_green_estimator(self, domain: LatticeDomain, s: float, start: Union[int, Sequence[float]],
                             n_walks: int, config: RunConfig,
                             normalization: Optional[DensityNormalization] = None,
                             sampled_holding: bool = False) -> WalkEstimate:
        """
        Occupation-time estimate of one row of Q⁻¹ from the killed long-range walk.

        The walk jumps from x to x + δk at rate C δ^d |δk|^{-d-2s}; its total
        jump rate is λ = C δ^{-2s}(S_K + T_K). By default each visit adds the
        expected holding time 1/λ; ``sampled_holding`` adds Exp(λ) draws
        instead. Occupation times are scaled to covariance entries by the
        normalization (δ^{-d} for CONTINUUM, 1/2 for ORDERED_PAIRS). Walks still
        alive after ``max_walk_steps`` jumps are censored and counted.

        Args:
            domain: lattice domain; leaving it kills the walk
            s: order in (0, 1)
            start: interior site index or a lattice point
            n_walks: number of walks
            config: run configuration carrying the seed

        Returns:
            WalkEstimate with the mean row, its standard errors and diagnostics
        """
        _check_order(s)
        norm = normalization or self.normalization
        seed = config.require_seed()
        if n_walks < 1:
            raise ValidationError(field="n_walks", message="need at least one walk")
        origin = start if isinstance(start, (int, np.integer)) else domain.site_of(start)
        if not 0 <= origin < domain.size:
            raise ValidationError(field="start", message=f"site {origin} is not an interior site")
        try:
            steps = lattice_sums.radius_steps(domain.truncation_radius, domain.spacing)
            law = StepLaw(domain.d, s, steps)
            rate = self.operators.levy_constant(domain.d, s) * domain.spacing ** (-2.0 * s) * law.total

            low, high = domain.index_bounds()
            lookup = -np.ones(tuple(high - low + 1), dtype=np.int64)
            lookup[tuple((domain.indices - low).T)] = np.arange(domain.size)

            totals = np.zeros(domain.size)
            squares = np.zeros(domain.size)
            censored = 0
            jumps = 0
            for batch, first in enumerate(range(0, n_walks, WALK_BATCH)):
                size = min(WALK_BATCH, n_walks - first)
                rng = substream(seed, Stream.WALK, batch)
                occupation, batch_censored, batch_jumps = self._run_batch(
                    rng, size, domain, origin, law, lookup, low, rate, sampled_holding,
                )
                totals += occupation.sum(axis=0)
                squares += (occupation ** 2).sum(axis=0)
                censored += batch_censored
                jumps += batch_jumps

            factor = norm.covariance_per_occupation(domain.spacing, domain.d)
            mean = totals / n_walks
            variance = np.maximum(squares / n_walks - mean ** 2, 0.0)
            stderr = np.sqrt(variance / max(n_walks - 1, 1))
            if censored:
                self.logger.warning("walks_censored", censored=censored, n_walks=n_walks, cap=self.max_walk_steps)
            return WalkEstimate(
                values=factor * mean,
                stderr=factor * stderr,
                start=int(origin),
                n_walks=n_walks,
                censored=censored,
                mean_jumps=jumps / n_walks,
                exit_jump_probability=law.exit_probability,
                time_scale=self.time_scale(domain.d, s, steps),
            )
        except Exception as e:
            self.logger.error("walk_green_estimator_failed", s=s, error=str(e), error_type=type(e).__name__)
            raise

    def _run_batch(self, rng: np.random.Generator, size: int, domain: LatticeDomain, origin: int,
                   law: StepLaw, lookup: np.ndarray, low: np.ndarray, rate: float,
                   sampled_holding: bool) -> Tuple[np.ndarray, int, int]:
        occupation = np.zeros((size, domain.size))
        position = np.repeat(domain.indices[origin][None, :], size, axis=0)
        site = np.full(size, origin)
        walkers = np.arange(size)
        jumps = 0
        step = 0
        while len(walkers) and step < self.max_walk_steps:
            holding = rng.exponential(1.0 / rate, len(walkers)) if sampled_holding else np.full(len(walkers), 1.0 / rate)
            np.add.at(occupation, (walkers, site), holding)
            choice = law.draw(rng.random(len(walkers)))
            jumps += len(walkers)
            step += 1
            stays = choice < len(law.offsets)
            moved = position[stays] + law.offsets[choice[stays]]
            relative = moved - low
            in_box = np.all((relative >= 0) & (relative < np.array(lookup.shape)), axis=1)
            next_site = np.full(len(moved), -1)
            next_site[in_box] = lookup[tuple(relative[in_box].T)]
            alive = next_site >= 0
            walkers = walkers[stays][alive]
            position = moved[alive]
            site = next_site[alive]
        return occupation, len(walkers), jumps

    @measure_service_operation_time(service="DiscreteFieldService", operation="convergence_report")
    def convergence_report(self, s: float, deltas: Iterable[float], d: int = 1,
                           pairs: Optional[Sequence[Tuple[Sequence[float], Sequence[float]]]] = None,
                           test_function: Optional[Callable[..., np.ndarray]] = None) -> ConvergenceReport:
        """
        Discrete-to-continuum table on the unit ball.

        For each spacing the DFGF covariance Q⁻¹ (CONTINUUM normalization) is
        compared with the ball Green's function at the point pairs, and, when
        ``test_function`` is given, δ^{2d} φᵀQ⁻¹φ with the continuum variance
        ∬ G_B φ φ.

        Raises:
            GeometryError: if a pair point is not a lattice site at some spacing
        """
        _check_order(s)
        if not pairs and test_function is None:
            raise ValidationError(field="pairs", message="give point pairs or a test function")
        report = ConvergenceReport(s=s, d=d)
        continuum_pairs = []
        for x, y in pairs or []:
            pair = BallPointPair(x=x, y=y, d=d)
            continuum_pairs.append((pair, self.green_service.fractional_ball_green(s, d, pair)))
        continuum_phi = None
        if test_function is not None:
            spacing = 2.0 / (CONTINUUM_GRID_POINTS - 1)
            grid = TestFunctionGrid.from_function(test_function, CONTINUUM_GRID_POINTS, spacing, d)
            continuum_phi = self.green_service.ball_bilinear(s, d, grid)

        for delta in sorted(deltas, reverse=True):
            domain = LatticeDomain.ball(d, delta)
            precision = self.assemble_precision(domain, s, DensityNormalization.CONTINUUM)
            green = self.dfgf_green(precision).entries
            for pair, continuum in continuum_pairs:
                i, j = domain.site_of(pair.x), domain.site_of(pair.y)
                report.rows.append(ConvergenceRow(
                    delta=delta, label=f"x={pair.x.tolist()} y={pair.y.tolist()}",
                    discrete=float(green[i, j]), continuum=continuum,
                ))
            if continuum_phi is not None:
                samples = test_function(*[domain.points[:, axis] for axis in range(d)])
                variance = float(samples @ green @ samples) * delta ** (2 * d)
                report.rows.append(ConvergenceRow(delta=delta, label="phi", discrete=variance, continuum=continuum_phi))
        self.logger.info("convergence_report_built", s=s, d=d, rows=len(report.rows), monotone=report.monotone)
        return report

    def dgff_precision(self, domain: LatticeDomain) -> np.ndarray:
        """Nearest-neighbour lattice GFF precision δ^{d-2}(2d·I - adjacency) on the interior sites."""
        index = {tuple(site): row for row, site in enumerate(domain.indices.tolist())}
        entries = 2.0 * domain.d * np.eye(domain.size)
        for row, site in enumerate(domain.indices.tolist()):
            for offset in lattice_sums.neighbour_offsets(domain.d):
                neighbour = index.get(tuple(a + b for a, b in zip(site, offset)))
                if neighbour is not None:
                    entries[row, neighbour] = -1.0
        return domain.spacing ** (domain.d - 2) * entries

    @measure_service_operation_time(service="DiscreteFieldService", operation="composed_discrete_green")
    def composed_discrete_green(self, domain: LatticeDomain, s: float) -> CovMatrix:
        """Lattice Green's function of order 1 + σ, σ ∈ (0, 1): G¹_δ G^σ_δ δ^d, symmetrized."""
        sigma = s - 1.0
        _check_order(sigma)
        first = linalg.inv(self.dgff_precision(domain))
        fractional = self.dfgf_green(self.assemble_precision(domain, sigma, DensityNormalization.CONTINUUM)).entries
        product = first @ fractional * domain.spacing ** domain.d
        return CovMatrix(points=domain.points, entries=0.5 * (product + product.T))

    def conditional_precision_gap(self, precision: PrecisionMatrix, subset: np.ndarray) -> float:
        """
        Max relative gap between the conditional covariance of a subset and the inverse of its principal block.

        Conditioning the field on the remaining sites leaves the covariance
        Σ_UU - Σ_UE Σ_EE⁻¹ Σ_EU, which equals (Q_UU)⁻¹.
        """
        mask = np.zeros(precision.size, dtype=bool)
        mask[np.asarray(subset)] = True
        if mask.all() or not mask.any():
            raise ValidationError(field="subset", message="subset must be a proper nonempty set of sites")
        covariance = self.dfgf_green(precision).entries
        inside, outside = np.where(mask)[0], np.where(~mask)[0]
        schur = (covariance[np.ix_(inside, inside)]
                 - covariance[np.ix_(inside, outside)]
                 @ linalg.solve(covariance[np.ix_(outside, outside)], covariance[np.ix_(outside, inside)], assume_a="pos"))
        block = linalg.inv(precision.entries[np.ix_(inside, inside)])
        return float(np.max(np.abs(schur - block)) / np.max(np.abs(block)))
