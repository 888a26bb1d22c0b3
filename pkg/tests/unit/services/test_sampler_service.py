import math

import numpy as np
import pytest

from fgfield.domain.entities.field_spec import FieldSpec
from fgfield.domain.entities.grids import TestFunctionGrid
from fgfield.domain.entities.results import SampleEnsemble
from fgfield.domain.exceptions import DomainError, InsufficientData, TailError, ValidationError
from fgfield.domain.services.sampler_service import ExactMode, SamplerService
from fgfield.infrastructure.random_streams import Stream, substream


@pytest.fixture
def service():
    return SamplerService()


class TestSpectralSampling:
    def test_white_noise_scaling(self, service, run_config):
        noise = service.sample_white_noise(run_config)
        expected = substream(run_config.seed, Stream.WHITE_NOISE, 0).standard_normal(64) * 8.0
        np.testing.assert_allclose(noise.values, expected)
        assert noise.spacing == pytest.approx(1.0 / 64)

    def test_white_noise_needs_seed(self, service, make_config):
        with pytest.raises(ValidationError):
            service.sample_white_noise(make_config(seed=None))

    def test_spectral_field_has_zero_mean(self, service, make_config):
        field = service.sample_fgf_spectral(make_config(d=2, n=32), 1.0)
        assert field.values.shape == (32, 32)
        assert abs(field.values.mean()) < 1e-12

    def test_coupled_family_shares_noise(self, service, run_config):
        family = service.sample_coupled_family(run_config, [0, 0.5, 1])
        assert sorted(family) == [0.0, 0.5, 1.0]
        noise = service.sample_white_noise(run_config).values
        np.testing.assert_allclose(family[0.0].values, noise - noise.mean(), atol=1e-12)
        np.testing.assert_array_equal(family[1.0].values, service.sample_fgf_spectral(run_config, 1.0).values)

    def test_coupled_family_needs_orders(self, service, run_config):
        with pytest.raises(ValidationError):
            service.sample_coupled_family(run_config, [])

    def test_pairing_variance_matches_torus_covariance(self, service, run_config):
        """(h, φ) over the spectral ensemble has variance L^{-d} δ^{2d} Σ |ξ|^{-2s} |Φ|²."""
        spec = FieldSpec.of(1, 1)
        phi = TestFunctionGrid.from_function(lambda x: np.exp(-(x - 0.5) ** 2 / (2 * 0.05 ** 2)), 64, 1.0 / 64, 1,
                                             center=[0.5])
        ensemble = service.spectral_ensemble(run_config, 1.0, count=400)
        pairings = service.pairings(ensemble, phi)
        expected = service.kernel_service.covariance_bilinear_torus(spec, phi, phi)
        assert np.var(pairings) == pytest.approx(expected, rel=0.3)

    def test_pairing_shape_mismatch(self, service, run_config):
        ensemble = service.spectral_ensemble(run_config, 1.0, count=2)
        phi = TestFunctionGrid.from_function(lambda x: np.exp(-x ** 2 / 0.005), 32, 1.0 / 32, 1)
        with pytest.raises(ValidationError):
            service.pairings(ensemble, phi)


class TestExactSampling:
    def test_pinned_draws_vanish_at_origin(self, service, run_config, brownian_points):
        points = np.vstack([[[0.0]], brownian_points])
        draws = service.sample_fgf_exact(FieldSpec.of(1, 1), points, ExactMode.PINNED_AT_ZERO, run_config, count=3)
        assert draws.shape == (3, 11)
        assert np.all(draws[:, 0] == 0.0)
        assert np.all(draws[:, 1:] != 0.0)

    def test_ball_draws_use_cholesky_factor(self, service, run_config):
        points = np.array([[-0.5], [0.0], [0.5]])
        draws = service.sample_fgf_exact(FieldSpec.of(1, 1), points, "ZeroBoundaryBall", run_config, count=2)
        covariance = service.green_service.ball_covariance_matrix(1, 1, points)
        z = substream(run_config.seed, Stream.EXACT, 1).standard_normal(3)
        np.testing.assert_allclose(draws[1], covariance.cholesky() @ z, atol=1e-14)

    def test_default_count_is_ensemble_size(self, service, make_config, brownian_points):
        draws = service.sample_fgf_exact(FieldSpec.of(1, 1), brownian_points, ExactMode.PINNED_AT_ZERO,
                                         make_config(ensemble_size=4))
        assert draws.shape == (4, 10)

    def test_pinned_needs_unit_hurst_range(self, service, run_config, brownian_points):
        with pytest.raises(DomainError):
            service.sample_fgf_exact(FieldSpec.of(0.5, 1), brownian_points, ExactMode.PINNED_AT_ZERO, run_config)

    def test_brownian_covariance_is_exact(self, service):
        points = np.array([[0.25], [0.5], [1.0]])
        cov = service.kernel_service.fbm_covariance_matrix(FieldSpec.of(1, 1), points)
        np.testing.assert_allclose(cov.entries, np.minimum.outer(points[:, 0], points[:, 0]), atol=1e-12)

    @pytest.mark.slow
    def test_empirical_covariance(self, service, run_config):
        """Var h(1) = 1 for Brownian motion, within 3σ at 10⁵ draws."""
        count = 100_000
        points = np.array([[0.25], [0.5], [1.0]])
        draws = service.sample_fgf_exact(FieldSpec.of(1, 1), points, ExactMode.PINNED_AT_ZERO, run_config, count=count)
        assert abs(np.var(draws[:, 2], ddof=1) - 1.0) <= 3.0 * math.sqrt(2.0 / (count - 1))
        expected = np.minimum.outer(points[:, 0], points[:, 0])
        np.testing.assert_allclose(np.cov(draws, rowvar=False), expected, atol=0.02)


class TestEigenfunctionField:
    def test_tail_bound_on_the_interval(self, service):
        assert service.efgf_tail_bound(1.0, 1, 100) == pytest.approx(2.0 / math.pi / 100)

    @pytest.mark.parametrize("s, d", [(0.5, 1), (1.0, 2), (0.75, 3)])
    def test_divergent_series(self, service, s, d):
        with pytest.raises(TailError):
            service.efgf_tail_bound(s, d, 10)

    def test_dirichlet_green_function(self, service):
        """s = 1 on (0, π): G(x, y) = x(π - y)/π for x ≤ y."""
        value, tail = service.efgf_covariance(1.0, 1, 10000, [1.0], [2.0])
        assert value == pytest.approx(1.0 - 2.0 / math.pi, abs=1e-4)
        assert tail < 1e-4

    def test_points_must_lie_in_the_box(self, service):
        with pytest.raises(ValidationError):
            service.efgf_covariance(1.0, 1, 10, [1.0], [4.0])

    def test_sample(self, service, run_config):
        points = [[0.5, 0.5], [1.0, 2.0]]
        first = service.sample_efgf(1.5, 2, 16, points, run_config)
        second = service.sample_efgf(1.5, 2, 16, points, run_config)
        assert first.values.shape == (2,)
        assert first.n_modes == 16
        assert first.tail_bound == service.efgf_tail_bound(1.5, 2, 16)
        np.testing.assert_array_equal(first.values, second.values)

    def test_sample_vanishes_on_the_boundary(self, service, run_config):
        sample = service.sample_efgf(1.0, 1, 32, [[0.0], [math.pi]], run_config)
        np.testing.assert_allclose(sample.values, 0.0, atol=1e-12)


class TestDiagnostics:
    @pytest.fixture
    def ramp(self):
        spacing = 1.0 / 64
        samples = np.tile(np.arange(64) * spacing, (4, 1))
        return SampleEnsemble(samples=samples, spec=FieldSpec.of(1.5, 1), spacing=spacing)

    def test_structure_function_of_a_ramp(self, service, ramp):
        result = service.structure_function(ramp, [2 / 64, 4 / 64, 8 / 64])
        assert result.slope == pytest.approx(2.0)
        assert result.hurst_estimate == pytest.approx(1.0)
        assert result.pair_counts.tolist() == [4 * 62, 4 * 60, 4 * 56]

    def test_too_few_pairs(self, service):
        ensemble = SampleEnsemble(samples=np.zeros((2, 20)), spec=FieldSpec.of(1, 1), spacing=0.05)
        with pytest.raises(InsufficientData):
            service.structure_function(ensemble, [0.5])

    def test_lag_below_one_step(self, service, ramp):
        with pytest.raises(ValidationError):
            service.structure_function(ramp, [0.001])

    @pytest.mark.slow
    @pytest.mark.parametrize("H", [0.25, 0.5, 0.75])
    def test_structure_function_of_exact_draws(self, service, run_config, H):
        """10⁴ exact fBm draws on 64 points: half the log-log slope recovers H."""
        spec = FieldSpec.of(H + 0.5, 1)
        points = (np.arange(1, 65) / 64.0)[:, None]
        draws = service.sample_fgf_exact(spec, points, ExactMode.PINNED_AT_ZERO, run_config, count=10_000)
        ensemble = SampleEnsemble(samples=draws, spec=spec, spacing=1.0 / 64)
        result = service.structure_function(ensemble, [1 / 64, 2 / 64, 4 / 64, 8 / 64])
        assert abs(result.slope / 2.0 - H) <= 0.05
        assert result.hurst_estimate == pytest.approx(result.slope / 2.0)
        gaussian = service.gaussianity(draws[:, -1])
        assert abs(gaussian["skewness"]) < 0.1
        assert abs(gaussian["excess_kurtosis"]) < 0.2

    def test_gaussianity_of_field_pairings(self, service, run_config):
        phi = TestFunctionGrid.from_function(lambda x: np.exp(-(x - 0.5) ** 2 / (2 * 0.05 ** 2)), 64, 1.0 / 64, 1,
                                             center=[0.5])
        pairings = service.pairings(service.spectral_ensemble(run_config, 1.0, count=2000), phi)
        result = service.gaussianity(pairings)
        assert abs(result["skewness"]) < 0.2
        assert abs(result["excess_kurtosis"]) < 0.4
        assert result["draws"] == 2000

    def test_gaussianity_needs_draws(self, service):
        with pytest.raises(InsufficientData):
            service.gaussianity(np.zeros(50))
