import math

import numpy as np
import pytest

from fgfield.domain.entities.field_spec import FieldSpec
from fgfield.domain.entities.results import BallPointPair
from fgfield.domain.exceptions import DomainError, SingularityError, ValidationError
from fgfield.domain.services import bumps
from fgfield.domain.services.green_service import GreenConstant, GreenService


def pair(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return BallPointPair(x=x, y=y, d=len(x))


class TestIntegerOrder:
    @pytest.fixture
    def service(self):
        return GreenService()

    def test_polyharmonic_constant(self, service):
        assert service.polyharmonic_constant(1, 3) == pytest.approx(1.0 / (4.0 * math.pi))
        assert service.polyharmonic_constant(1, 1) == pytest.approx(0.5)
        assert service.polyharmonic_constant(1, 3, GreenConstant.DIMENSION_POWER) == pytest.approx(1.0 / (64.0 * math.pi))

    def test_constant_variants_agree_when_s_equals_d(self, service):
        assert service.polyharmonic_constant(2, 2, GreenConstant.DIMENSION_POWER) == service.polyharmonic_constant(2, 2)

    def test_brownian_bridge_on_the_interval(self, service):
        """d = 1, s = 1: G = (Q - r)/2 = (1 - max)(1 + min)/2."""
        assert service.integer_ball_green(1, 1, pair(0.0, [0.0])) == pytest.approx(0.5)
        assert service.integer_ball_green(1, 1, pair(0.5, [-0.5])) == pytest.approx(0.125)

    def test_newtonian_ball(self, service):
        """d = 3, s = 1 from the centre: (1/r - 1)/(4π)."""
        value = service.integer_ball_green(1, 3, pair([0.0, 0.0, 0.0], [0.5, 0.0, 0.0]))
        assert value == pytest.approx(1.0 / (4.0 * math.pi))

    def test_diagonal_singularity(self, service):
        with pytest.raises(SingularityError):
            service.integer_ball_green(1, 3, pair([0.2, 0.0, 0.0], [0.2, 0.0, 0.0]))

    def test_finite_diagonal_for_positive_hurst(self, service):
        """s = 2 in d = 3 has H = 1/2 and a finite diagonal."""
        value = service.integer_ball_green(2, 3, pair([0.2, 0.1, 0.0], [0.2, 0.1, 0.0]))
        assert np.isfinite(value)
        assert value > 0

    @pytest.mark.parametrize("s, d, x, y", [
        (1, 1, [0.2], [-0.3]),
        (1, 3, [0.1, 0.2, 0.0], [-0.3, 0.4, 0.1]),
        (2, 2, [0.1, 0.2], [-0.3, 0.4]),
        (2, 3, [0.5, 0.0, 0.0], [0.0, -0.4, 0.2]),
        (3, 1, [0.6], [-0.1]),
    ])
    def test_closed_form_matches_quadrature(self, service, s, d, x, y):
        points = pair(x, y)
        closed = service.integer_ball_green(s, d, points, method="closed")
        numeric = service.integer_ball_green(s, d, points)
        assert closed == pytest.approx(numeric, rel=1e-9)

    def test_quadrature_is_the_default(self, service):
        points = pair([0.1, 0.2, 0.0], [-0.3, 0.4, 0.1])
        assert service.integer_ball_green(1, 3, points) == service.integer_ball_green(1, 3, points, method="quadrature")
        diagonal = pair([0.2, 0.1, 0.0], [0.2, 0.1, 0.0])
        assert service.integer_ball_green(2, 3, diagonal) == service.integer_ball_green(2, 3, diagonal, method="closed")

    @pytest.mark.parametrize("x, y", [([-0.3, 0.0], [0.1, 0.0]), ([-0.3, 0.0, 0.0], [0.1, 0.0, 0.0])])
    def test_discrete_laplacian_vanishes_to_second_order(self, service, x, y):
        """The 2d+1-point Laplacian of x ↦ G¹(x, y) away from y and the sphere is O(h²)."""
        x = np.asarray(x)
        d = len(x)

        def stencil_residual(h):
            offsets = np.vstack([np.zeros(d), h * np.eye(d), -h * np.eye(d)])
            values = service.integer_ball_green_values(1, d, x + offsets, y)
            return abs(2.0 * d * values[0] - values[1:].sum()) / h ** 2

        coarse, fine = stencil_residual(1.0 / 32), stencil_residual(1.0 / 64)
        assert fine < 100.0 * (1.0 / 64) ** 2
        assert coarse / fine == pytest.approx(4.0, rel=0.1)

    def test_symmetry(self, service):
        points = pair([0.3, -0.2], [-0.1, 0.5])
        assert service.integer_ball_green(2, 2, points) == pytest.approx(service.integer_ball_green(2, 2, points.swapped()))

    def test_unknown_method(self, service):
        with pytest.raises(ValidationError):
            service.integer_ball_green(1, 1, pair(0.1, [0.2]), method="series")

    @pytest.mark.parametrize("s", [0, 1.5, -1])
    def test_needs_positive_integer_order(self, service, s):
        with pytest.raises(DomainError):
            service.integer_ball_green(s, 1, pair(0.1, [0.2]))

    def test_normalization_residual(self, service):
        """The 4^{s-1} constant reproduces ψ(y); the 4^{d-1} one is off by 4^{d-s}."""
        assert service.green_normalization_residual(1, 3) < 1e-6
        dimension_power = service.green_normalization_residual(1, 3, GreenConstant.DIMENSION_POWER)
        assert dimension_power == pytest.approx(15.0 / 16.0, rel=1e-5)

    def test_normalization_residual_for_the_biharmonic_in_three_dimensions(self, service):
        assert service.green_normalization_residual(2, 3) < 1e-6
        dimension_power = service.green_normalization_residual(2, 3, GreenConstant.DIMENSION_POWER)
        assert dimension_power == pytest.approx(0.75, rel=1e-5)


class TestFractionalOrder:
    @pytest.fixture
    def service(self):
        return GreenService()

    def test_riesz_constant(self, service):
        assert service.riesz_constant(0.5, 1) == pytest.approx(1.0 / (2.0 * math.pi))

    def test_half_laplacian_on_the_interval(self, service):
        """d = 1, s = 1/2: (1/π) ln((√A + 1 - xy)/r)."""
        x, y = 0.0, 0.5
        area = (1 - x ** 2) * (1 - y ** 2)
        expected = math.log((math.sqrt(area) + 1 - x * y) / abs(x - y)) / math.pi
        assert service.fractional_ball_green(0.5, 1, pair(x, [y])) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("s, d, x, y", [
        (0.5, 1, [0.3], [-0.6]),
        (0.75, 1, [0.1], [0.4]),
        (0.75, 2, [0.1, 0.2], [-0.3, 0.4]),
        (0.25, 3, [0.5, 0.0, 0.0], [0.0, -0.4, 0.2]),
    ])
    def test_closed_form_matches_quadrature(self, service, s, d, x, y):
        points = pair(x, y)
        closed = service.fractional_ball_green(s, d, points)
        numeric = service.fractional_ball_green(s, d, points, method="quadrature")
        assert closed == pytest.approx(numeric, rel=1e-9)

    def test_finite_diagonal_on_the_line(self, service):
        """d = 1, s > 1/2: k̃ A^{s-1/2}/(s - 1/2)."""
        value = service.fractional_ball_green(0.75, 1, pair(0.0, [0.0]))
        assert value == pytest.approx(service.riesz_constant(0.75, 1) / 0.25)

    @pytest.mark.parametrize("s, d", [(0.5, 1), (0.75, 2)])
    def test_diagonal_singularity(self, service, s, d):
        point = np.full(d, 0.1)
        with pytest.raises(SingularityError):
            service.fractional_ball_green(s, d, BallPointPair(x=point, y=point, d=d))

    @pytest.mark.parametrize("s", [0.0, 1.0, 1.5])
    def test_order_range(self, service, s):
        with pytest.raises(DomainError):
            service.fractional_ball_green(s, 1, pair(0.1, [0.2]))


class TestComposedOrder:
    @pytest.fixture
    def service(self):
        return GreenService()

    def test_symmetric_on_the_interval(self, service):
        points = pair(0.3, [-0.4])
        forward = service.composed_ball_green(1.5, 1, points)
        backward = service.composed_ball_green(1.5, 1, points.swapped())
        assert forward > 0
        assert forward == pytest.approx(backward, rel=1e-6)

    def test_finite_diagonal(self, service):
        assert np.isfinite(service.composed_ball_green(1.5, 1, pair(0.2, [0.2])))

    def test_continuous_in_the_order(self, service):
        points = np.array([[-0.4], [0.0], [0.3]])
        below, middle, above = service.gram_matrices([1.49, 1.5, 1.51], 1, points)
        scale = np.linalg.norm(middle.entries, 2)
        assert np.linalg.norm(below.entries - middle.entries, 2) < 0.05 * scale
        assert np.linalg.norm(above.entries - middle.entries, 2) < 0.05 * scale

    @pytest.mark.parametrize("s", [1, 2, 0.5])
    def test_needs_non_integer_order_above_one(self, service, s):
        with pytest.raises(DomainError):
            service.composed_ball_green(s, 1, pair(0.1, [0.2]))

    def test_dispatch(self, service):
        points = pair(0.3, [-0.4])
        assert service.green_value(1, 1, points) == service.integer_ball_green(1, 1, points)
        assert service.green_value(0.75, 1, points) == service.fractional_ball_green(0.75, 1, points)
        with pytest.raises(DomainError):
            service.green_value(0, 1, points)


class TestCovarianceMatrices:
    @pytest.fixture
    def service(self):
        return GreenService()

    def test_brownian_bridge_matrix(self, service):
        x = np.array([-0.5, 0.0, 0.5])
        matrix = service.ball_covariance_matrix(1, 1, x[:, None])
        expected = (1 - np.maximum.outer(x, x)) * (1 + np.minimum.outer(x, x)) / 2
        np.testing.assert_allclose(matrix.entries, expected, atol=1e-14)
        assert matrix.is_psd()

    @pytest.mark.parametrize("s, d", [(0.5, 1), (1, 2), (1, 3)])
    def test_infinite_diagonal(self, service, s, d):
        with pytest.raises(SingularityError):
            service.ball_covariance_matrix(s, d, np.zeros((1, d)))

    def test_cross_covariance(self, service):
        rows = np.array([[-0.5], [0.5]])
        cols = np.array([[0.0]])
        np.testing.assert_allclose(service.ball_cross_covariance(1, 1, rows, cols), [[0.25], [0.25]])

    def test_gram_matrices(self, service):
        points = np.array([[-0.3], [0.2]])
        matrices = service.gram_matrices([0.75, 1.0], 1, points)
        assert [m.entries.shape for m in matrices] == [(2, 2), (2, 2)]

    def test_ball_bilinear_equals_whole_space_without_low_moments(self, service):
        """The bridge remainder Q/2 is linear in each point, so it pairs to zero with Δ of a Gaussian."""
        phi = bumps.gaussian_test_function(1, j=1, sigma=0.1)
        whole = service.kernel_service.real_space_bilinear(FieldSpec.of(1, 1), phi, phi)
        assert service.ball_bilinear(1, 1, phi) == pytest.approx(whole, rel=1e-8)

    def test_ball_bilinear_needs_compact_support(self, service, gaussian_phi):
        with pytest.raises(ValidationError):
            service.ball_bilinear(1, 1, gaussian_phi)
