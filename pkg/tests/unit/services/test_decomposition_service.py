import math

import numpy as np
import pytest

from fgfield.domain.entities.field_spec import FieldSpec
from fgfield.domain.entities.lattice import LatticeDomain
from fgfield.domain.entities.results import SphericalKernelQuery
from fgfield.domain.exceptions import GeometryError, ValidationError
from fgfield.domain.services import bumps
from fgfield.domain.services.decomposition_service import DecompositionService
from fgfield.domain.services.discrete_field_service import DiscreteFieldService
from fgfield.domain.services.green_service import GreenService
from fgfield.infrastructure.random_streams import Stream, substream


@pytest.fixture
def service():
    return DecompositionService()


@pytest.fixture
def brownian_cov(service, brownian_points):
    return service.kernel_service.fbm_covariance_matrix(FieldSpec.of(1, 1), brownian_points)


@pytest.fixture
def middle_mask(brownian_points):
    """D = {0.4, ..., 0.8}."""
    x = brownian_points[:, 0]
    return (x > 0.35) & (x < 0.85)


class TestConditioning:
    def test_harmonic_part_of_brownian_motion_interpolates(self, service, brownian_cov, middle_mask, run_config):
        exterior = np.array([1.0, 2.0, 3.0, 5.0, 7.0])
        split = service.condition_on_complement(brownian_cov, middle_mask, exterior, run_config)
        x = brownian_cov.points[:, 0]
        expected = 3.0 + (x[middle_mask] - 0.3) / 0.6 * 2.0
        np.testing.assert_allclose(split.harmonic_part[middle_mask], expected, atol=1e-10)
        np.testing.assert_array_equal(split.harmonic_part[~middle_mask], exterior)
        assert np.all(split.zero_part[~middle_mask] == 0.0)
        assert np.any(split.zero_part[middle_mask] != 0.0)

    def test_harmonic_part_is_harmonic(self, service, brownian_cov, middle_mask, run_config):
        split = service.condition_on_complement(brownian_cov, middle_mask, [1.0, 2.0, 3.0, 5.0, 7.0], run_config)
        assert service.s_harmonicity_residual(split, 1, 0.1) < 1e-9

    def test_zero_part_is_not_harmonic(self, service, brownian_cov, middle_mask, run_config):
        split = service.condition_on_complement(brownian_cov, middle_mask, np.zeros(5), run_config)
        assert service.s_harmonicity_residual(split, 1, 0.1, part="zero") > 1.0

    def test_split_field_reassembles(self, service, brownian_cov, middle_mask):
        values = np.sin(np.arange(10.0))
        split = service.split_field(brownian_cov, middle_mask, values)
        np.testing.assert_allclose(split.field, values, atol=1e-12)
        assert np.all(split.zero_part[~middle_mask] == 0.0)

    def test_resample_split(self, service, brownian_cov, middle_mask, run_config):
        splits = service.resample_split(brownian_cov, middle_mask, run_config, count=3)
        assert len(splits) == 3
        again = service.resample_split(brownian_cov, middle_mask, run_config, count=3)
        np.testing.assert_array_equal(splits[2].field, again[2].field)
        assert not np.array_equal(splits[0].field, splits[1].field)

    @pytest.mark.slow
    def test_resampled_fields_have_the_original_law(self, service, brownian_cov, middle_mask, run_config):
        splits = service.resample_split(brownian_cov, middle_mask, run_config, count=4000)
        fields = np.stack([split.field for split in splits])
        np.testing.assert_allclose(np.cov(fields, rowvar=False), brownian_cov.entries, atol=0.15)

    def test_needs_seed(self, service, brownian_cov, middle_mask, make_config):
        with pytest.raises(ValidationError):
            service.condition_on_complement(brownian_cov, middle_mask, np.zeros(5), make_config(seed=None))

    @pytest.mark.parametrize("mask", [np.ones(10, dtype=bool), np.zeros(10, dtype=bool), np.ones(3, dtype=bool)])
    def test_bad_masks(self, service, brownian_cov, run_config, mask):
        with pytest.raises(ValidationError):
            service.condition_on_complement(brownian_cov, mask, np.zeros(5), run_config)

    def test_exterior_size(self, service, brownian_cov, middle_mask, run_config):
        with pytest.raises(ValidationError):
            service.condition_on_complement(brownian_cov, middle_mask, np.zeros(4), run_config)


class TestSHarmonicity:
    def test_discrete_field_conditional_mean_is_fractionally_harmonic(self, service, run_config):
        """The conditional mean of the lattice field solves the truncated equation exactly on D."""
        domain = LatticeDomain.ball(1, 0.125)
        discrete = DiscreteFieldService(operators=service.operators)
        cov = discrete.dfgf_green(discrete.assemble_precision(domain, 0.75))
        mask = np.abs(domain.points[:, 0]) < 0.5
        exterior = np.cos(domain.points[~mask, 0])
        split = service.condition_on_complement(cov, mask, exterior, run_config)
        residual = service.s_harmonicity_residual(split, 0.75, 0.125, truncation_radius=domain.truncation_radius)
        assert residual < 1e-8

    @pytest.mark.slow
    def test_continuum_conditional_mean_residual_shrinks_with_spacing(self, service, run_config):
        """Conditioning the continuum ball field leaves a lattice residual that vanishes as the mesh is refined."""
        residuals = []
        for spacing in (1.0 / 8, 1.0 / 16, 1.0 / 32):
            domain = LatticeDomain.ball(1, spacing)
            cov = GreenService().ball_covariance_matrix(0.75, 1, domain.points)
            mask = np.abs(domain.points[:, 0]) < 0.5
            split = service.condition_on_complement(cov, mask, np.cos(domain.points[~mask, 0]), run_config)
            residuals.append(service.s_harmonicity_residual(split, 0.75, spacing, margin=0.2,
                                                            truncation_radius=domain.truncation_radius))
        assert residuals[0] > residuals[1] > residuals[2]

    def test_off_lattice_points(self, service, brownian_cov, middle_mask):
        split = service.split_field(brownian_cov, middle_mask, np.ones(10))
        with pytest.raises(GeometryError):
            service.s_harmonicity_residual(split, 1, 0.3)

    @pytest.mark.parametrize("s, part, margin", [(1.25, "harmonic", 0.0), (1, "both", 0.0), (1, "harmonic", 5.0)])
    def test_invalid_arguments(self, service, brownian_cov, middle_mask, s, part, margin):
        split = service.split_field(brownian_cov, middle_mask, np.ones(10))
        with pytest.raises(ValidationError):
            service.s_harmonicity_residual(split, s, 0.1, margin=margin, part=part)


class TestLaplacianIntertwining:
    @pytest.mark.parametrize("d, spacing, s", [(1, 1.0 / 16, 0.75), (1, 1.0 / 16, 1.5), (1, 1.0 / 16, 2.0),
                                               (2, 0.25, 1.5)])
    def test_laplacian_lowers_the_order_by_two(self, service, run_config, d, spacing, s):
        points = LatticeDomain.ball(d, spacing).points
        assert service.laplacian_intertwining_residual(points, spacing, s, run_config) < 1e-10

    def test_white_noise_at_order_zero(self, service, run_config):
        points = LatticeDomain.ball(1, 0.125).points
        noise = substream(run_config.seed, Stream.CONDITION, 0).standard_normal(len(points)) * 0.125 ** -0.5
        np.testing.assert_allclose(service.zero_boundary_field(points, 0.125, 0.0, run_config), noise, atol=1e-12)

    def test_fields_follow_the_sample_index(self, service, run_config):
        points = LatticeDomain.ball(1, 0.125).points
        first = service.zero_boundary_field(points, 0.125, 1.0, run_config, index=3)
        np.testing.assert_array_equal(first, service.zero_boundary_field(points, 0.125, 1.0, run_config, index=3))
        assert not np.array_equal(first, service.zero_boundary_field(points, 0.125, 1.0, run_config, index=4))

    def test_needs_seed(self, service, make_config):
        with pytest.raises(ValidationError):
            service.laplacian_intertwining_residual(LatticeDomain.ball(1, 0.25).points, 0.25, 1.0,
                                                    make_config(seed=None))

    def test_off_lattice_points(self, service, run_config):
        with pytest.raises(GeometryError):
            service.laplacian_intertwining_residual(np.array([[0.1], [0.2], [0.35]]), 0.1, 1.0, run_config)


class TestRestriction:
    def test_constant(self, service):
        assert service.restriction_constant(1.0) == pytest.approx(0.5)
        assert service.restriction_constant(1.5) == pytest.approx(1.0 / math.pi)

    def test_ratio_is_the_analytic_constant(self, service, odd_phi):
        result = service.restrict_variance_check(2, 1.25, odd_phi, widths=())
        assert result.ratio == pytest.approx(result.analytic_constant, rel=1e-10)
        assert result.var_fourier == pytest.approx(result.var_lower, rel=1e-3)
        assert result.lift_values == []

    def test_ratio_does_not_depend_on_the_test_function(self, service, odd_phi):
        other = bumps.gaussian_test_function(1, j=1, sigma=0.7)
        first = service.restrict_variance_check(2, 1.25, odd_phi, widths=())
        second = service.restrict_variance_check(2, 1.25, other, widths=())
        assert first.var_lower != pytest.approx(second.var_lower, rel=1e-2)
        assert second.ratio == pytest.approx(first.ratio, rel=1e-8)

    @pytest.mark.slow
    def test_monte_carlo_variance_on_the_hyperplane(self, service, odd_phi, run_config):
        result = service.restrict_variance_check(2, 1.25, odd_phi, config=run_config, widths=(), mc_draws=20000)
        assert result.discrete_variance == pytest.approx(result.var_d, rel=1e-2)
        assert abs(result.mc_variance - result.discrete_variance) <= 3.0 * result.mc_stderr

    def test_monte_carlo_needs_a_config(self, service, odd_phi):
        with pytest.raises(ValidationError):
            service.restrict_variance_check(2, 1.25, odd_phi, widths=(), mc_draws=10)

    def test_summary(self, service, odd_phi):
        summary = service.summary(service.restrict_variance_check(2, 1.25, odd_phi, widths=()))
        assert set(summary) == {"var_d", "var_lower", "ratio", "analytic_constant", "var_fourier"}

    @pytest.mark.slow
    def test_lift_drift_shrinks_with_width(self, service, odd_phi):
        result = service.restrict_variance_check(2, 1.25, odd_phi)
        drift = result.lift_drift
        assert len(drift) == 3
        assert drift[0] > drift[1] > drift[2]

    @pytest.mark.parametrize("d, s", [(2, 0.5), (4, 2.25), (1, 1.25)])
    def test_invalid_arguments(self, service, odd_phi, d, s):
        with pytest.raises(ValidationError):
            service.restrict_variance_check(d, s, odd_phi)

    def test_phi_dimension(self, service):
        with pytest.raises(ValidationError):
            service.restrict_variance_check(2, 1.25, bumps.odd_test_function(2, n=33))


class TestSphericalAverages:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("H", [-0.25, 0.25, 0.75])
    @pytest.mark.parametrize("r1, r2", [(0.5, 0.8), (0.6, 0.6)])
    def test_closed_form_agrees_with_angle_integral(self, service, d, H, r1, r2):
        result = service.spherical_average_kernel(SphericalKernelQuery(d=d, H=H, k=0, r1=r1, r2=r2))
        assert result.closed_form is not None
        assert result.relative_gap <= 1e-8
        assert result.value == result.closed_form
        assert result.form == "closed"
        assert result.fallback is None

    def test_integer_hurst_uses_angle_integral(self, service):
        result = service.spherical_average_kernel(SphericalKernelQuery(d=2, H=0.0, k=0, r1=0.5, r2=0.8))
        assert result.closed_form is None
        assert result.relative_gap is None
        assert result.form == "theta"
        assert result.fallback == "integer Hurst parameter"
        assert math.isfinite(result.value)

    def test_logarithmic_connection_falls_back_to_angle_integral(self, service):
        """d = 3, H = -1 gives ₂F₁(1, 1; 2; z) = -log(1 - z)/z, outside the transformation toward 1 - z."""
        result = service.spherical_average_kernel(SphericalKernelQuery(d=3, H=-1.0, k=0, r1=0.5, r2=0.8))
        assert result.closed_form is None
        assert result.form == "theta"
        assert "integer" in result.fallback
        assert result.value == result.theta_form
        assert math.isfinite(result.value)

    def test_distant_sphere_sees_a_point(self, service):
        """For r1 ≪ r2 the average kernel tends to C·r2^{2H}."""
        constant = service.kernel_service.normalization_constant(1.75, 3)
        for r1 in (1e-2, 1e-3):
            result = service.spherical_average_kernel(SphericalKernelQuery(d=3, H=0.25, k=0, r1=r1, r2=1.0))
            assert result.value == pytest.approx(constant, rel=10 * r1 ** 2)

    def test_brownian_average_on_the_circle(self, service):
        """For H = 1/2 in the plane the average of C·|x - y| over the circle pair is symmetric in the radii."""
        forward = service.spherical_average_kernel(SphericalKernelQuery(d=2, H=0.5, k=0, r1=0.3, r2=0.7))
        backward = service.spherical_average_kernel(SphericalKernelQuery(d=2, H=0.5, k=0, r1=0.7, r2=0.3))
        assert forward.value == pytest.approx(backward.value, rel=1e-12)

    def test_coefficients_shift_the_dimension(self, service):
        query = SphericalKernelQuery(d=2, H=0.25, k=1, r1=0.5, r2=0.8)
        shifted = service.spherical_average_kernel(SphericalKernelQuery(d=4, H=-0.75, k=0, r1=0.5, r2=0.8))
        assert service.spherical_coefficient_cov(query).value == pytest.approx(shifted.value)

    def test_average_needs_degree_zero(self, service):
        with pytest.raises(ValidationError):
            service.spherical_average_kernel(SphericalKernelQuery(d=2, H=0.25, k=1, r1=0.5, r2=0.8))

    def test_query_validation(self):
        with pytest.raises(ValidationError):
            SphericalKernelQuery(d=1, H=0.25, k=0, r1=0.5, r2=0.8)

    @pytest.mark.slow
    def test_projection_study(self, service, make_config):
        study = service.spherical_projection_study(make_config(d=2, n=64), count=20)
        assert study.empirical.shape == (6,)
        assert study.radii.shape == (6, 2)
        assert np.all(np.isfinite(study.kernel))
        assert np.all(study.standard_errors > 0)
        assert math.isfinite(study.fitted_constant)

    def test_projection_study_needs_planar_samples(self, service, run_config):
        with pytest.raises(ValidationError):
            service.spherical_projection_study(run_config, count=2)
