from enum import Enum
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special
import structlog

from fgfield.infrastructure.monitoring import measure_service_operation_time
from ..entities.field_spec import FieldSpec, Regime
from ..entities.grids import TestFunctionGrid
from ..entities.matrices import CovMatrix
from ..entities.results import BallPointPair
from ..exceptions import DomainError, PSDError, SingularityError, ValidationError
from . import bumps, quadrature
from .kernel_service import KernelService

COMPOSED_TOL = 1e-6
COMPOSED_LEVELS = 5
RADIAL_MAP_POWER = 2
NORMALIZATION_SIGMA = 0.08
NORMALIZATION_RADIAL_NODES = 64


class GreenConstant(str, Enum):
    """
    Power of 4 in the polyharmonic ball constant k_{s,d}.

    ORDER_POWER uses 4^{s-1} (the value for which the Green representation
    reproduces test functions); DIMENSION_POWER uses 4^{d-1}.
    """
    ORDER_POWER = "order_power"
    DIMENSION_POWER = "dimension_power"

    def exponent(self, s: int, d: int) -> int:
        return s - 1 if self is GreenConstant.ORDER_POWER else d - 1


def _as_points(points: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, d)


def ball_geometry(points: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """r = |x - y|, Q = (1 - 2x·y + |x|²|y|²)^{1/2} and A = (1 - |x|²)(1 - |y|²) for each row x."""
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(points - y, axis=1)
    x_sq = np.sum(points ** 2, axis=1)
    y_sq = float(y @ y)
    q = np.sqrt(np.maximum(1.0 - 2.0 * points @ y + x_sq * y_sq, 0.0))
    return r, q, (1.0 - x_sq) * (1.0 - y_sq)


class _PolyharmonicTerms:
    """
    Closed form of the integer-order ball Green's function, split into pieces.

    G = Σ_j regular_j + P·r^{2H} + L·r^{2H} ln r, where the regular pieces are
    k c_j Q^{2j+2-d} r^{2(s-1-j)}/(2j+2-d) (or k c_j r^{2H} ln Q when
    2j + 2 = d) and c_j = binom(s-1, j)(-1)^{s-1-j}.
    """

    def __init__(self, s: int, d: int, constant: GreenConstant):
        self.s, self.d = s, d
        self.H = s - d / 2.0
        self.k = (math.gamma(1.0 + d / 2.0)
                  / (d * math.pi ** (d / 2.0) * 4.0 ** constant.exponent(s, d) * math.factorial(s - 1) ** 2))
        self.coefficients = [math.comb(s - 1, j) * (-1.0) ** (s - 1 - j) for j in range(s)]
        self.power = -self.k * sum(c / (2 * j + 2 - d) for j, c in enumerate(self.coefficients) if 2 * j + 2 != d)
        self.log = -self.k * sum(c for j, c in enumerate(self.coefficients) if 2 * j + 2 == d)

    def regular(self, r: np.ndarray, q: np.ndarray) -> np.ndarray:
        total = np.zeros_like(r)
        for j, c in enumerate(self.coefficients):
            exponent = 2 * j + 2 - self.d
            if exponent == 0:
                total += self.k * c * np.power(r, 2.0 * self.H) * np.log(q)
            else:
                total += self.k * c * np.power(q, float(exponent)) * np.power(r, 2.0 * (self.s - 1 - j)) / exponent
        return total

    def evaluate(self, r: np.ndarray, q: np.ndarray, power: float = 0.0, log: float = 0.0) -> np.ndarray:
        """Regular part plus (P - power)·r^{2H} + (L - log)·r^{2H} ln r, continued to r = 0 for H >= 0."""
        value = self.regular(r, q)
        scale = abs(self.power) + abs(power) + abs(self.log) + abs(log)
        p_coef = self.power - power
        l_coef = self.log - log
        if abs(p_coef) <= 1e-12 * scale:
            p_coef = 0.0
        if abs(l_coef) <= 1e-12 * scale:
            l_coef = 0.0
        positive = r > 0
        safe = np.where(positive, r, 1.0)
        if p_coef:
            at_zero = p_coef if self.H == 0 else 0.0
            value = value + np.where(positive, p_coef * np.power(safe, 2.0 * self.H), at_zero)
        if l_coef:
            value = value + np.where(positive, l_coef * np.power(safe, 2.0 * self.H) * np.log(safe), 0.0)
        return value


class GreenService:
    """Zero-boundary Green's functions of (-Δ)^s on the unit ball and the covariance matrices they define."""

    def __init__(self, kernel_service: Optional[KernelService] = None,
                 constant: GreenConstant = GreenConstant.ORDER_POWER):
        self.kernel_service = kernel_service or KernelService()
        self.constant = constant
        self.logger = structlog.get_logger(__name__)

    # integer order

    @staticmethod
    def _integer_order(s) -> int:
        spec = FieldSpec.of(s, 1)
        order = spec.integer_order
        if order is None or order < 1:
            raise DomainError(field="s", message=f"polyharmonic Green's function needs a positive integer s, got {s}")
        return order

    def polyharmonic_constant(self, s: int, d: int, constant: Optional[GreenConstant] = None) -> float:
        """k_{s,d} = Γ(1 + d/2) / (d π^{d/2} 4^e ((s-1)!)²)."""
        return _PolyharmonicTerms(self._integer_order(s), d, constant or self.constant).k

    def integer_ball_green_values(self, s: int, d: int, points: np.ndarray, y: Sequence[float],
                                  constant: Optional[GreenConstant] = None) -> np.ndarray:
        """
        G^s_B(x, y) for every row x of ``points``.

        Raises:
            SingularityError: if some x equals y and H <= 0
        """
        order = self._integer_order(s)
        pts = _as_points(points, d)
        r, q, _ = ball_geometry(pts, np.asarray(y, dtype=float).reshape(d))
        if np.any(r == 0) and order - d / 2.0 <= 0:
            raise SingularityError(field="x", message=f"G^{order} diverges on the diagonal in d = {d}")
        return _PolyharmonicTerms(order, d, constant or self.constant).evaluate(r, q)

    @measure_service_operation_time(service="GreenService", operation="integer_ball_green")
    def integer_ball_green(self, s: int, d: int, pair: BallPointPair, method: str = "quadrature",
                           constant: Optional[GreenConstant] = None) -> float:
        """
        Polyharmonic Green's function k_{s,d} r^{2H} ∫_1^U (v² - 1)^{s-1} v^{1-d} dv on the unit ball.

        U = Q/r with Q = ||x|y - x/|x||| (Q = 1 at x = 0). The default integrates
        in v adaptively; ``method="closed"`` expands (v² - 1)^{s-1} binomially
        and serves as the cross-check. On the diagonal U is infinite and both
        methods return the closed-form limit, finite when H > 0.

        Args:
            s: positive integer order
            d: dimension
            pair: the two points
            method: "quadrature" or "closed"
            constant: k_{s,d} variant, defaults to the service setting

        Raises:
            SingularityError: on the diagonal when H <= 0
        """
        try:
            order = self._integer_order(s)
            if method not in ("quadrature", "closed"):
                raise ValidationError(field="method", message=f"unknown method {method!r}")
            r, q, _ = ball_geometry(pair.x[None, :], pair.y)
            if method == "closed" or r[0] == 0:
                return float(self.integer_ball_green_values(order, d, pair.x[None, :], pair.y, constant)[0])
            terms = _PolyharmonicTerms(order, d, constant or self.constant)
            upper = float(q[0] / r[0])
            value, _ = integrate.quad(lambda v: (v * v - 1.0) ** (order - 1) * v ** (1.0 - d), 1.0, upper,
                                      epsabs=0.0, epsrel=1e-12, limit=200)
            return terms.k * r[0] ** (2.0 * terms.H) * value
        except Exception as e:
            self.logger.error("integer_ball_green_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    # fractional order in (0, 1)

    @staticmethod
    def _check_fractional(s: float) -> None:
        if not 0.0 < s < 1.0:
            raise DomainError(field="s", message=f"fractional ball Green's function needs 0 < s < 1, got {s}")

    @staticmethod
    def riesz_constant(s: float, d: int) -> float:
        """k̃_{s,d} = Γ(d/2) / (4^s π^{d/2} Γ(s)²)."""
        return math.gamma(d / 2.0) / (4.0 ** s * math.pi ** (d / 2.0) * math.gamma(s) ** 2)

    @staticmethod
    def _riesz_integral(s: float, d: int, v: np.ndarray) -> np.ndarray:
        """∫_0^V (w + 1)^{-d/2} w^{s-1} dw through the incomplete beta function at t = V/(1+V)."""
        t = v / (1.0 + v)
        b = d / 2.0 - s
        if b > 0:
            return special.beta(s, b) * special.betainc(s, b, t)
        return t ** s / s * special.hyp2f1(s, 1.0 - b, s + 1.0, t)

    def _fractional_diagonal(self, s: float, d: int, area: np.ndarray) -> np.ndarray:
        if d == 1 and s > 0.5:
            return self.riesz_constant(s, d) * area ** (s - 0.5) / (s - 0.5)
        raise SingularityError(field="x", message=f"G^{s}_B diverges on the diagonal in d = {d}")

    def fractional_ball_green_values(self, s: float, d: int, points: np.ndarray, y: Sequence[float]) -> np.ndarray:
        """G^s_B(x, y), 0 < s < 1, for every row x of ``points``."""
        self._check_fractional(s)
        pts = _as_points(points, d)
        r, _, area = ball_geometry(pts, np.asarray(y, dtype=float).reshape(d))
        out = np.empty_like(r)
        diagonal = r == 0
        if np.any(diagonal):
            out[diagonal] = self._fractional_diagonal(s, d, area[diagonal])
        off = ~diagonal
        v = area[off] / r[off] ** 2
        out[off] = self.riesz_constant(s, d) * r[off] ** (2.0 * s - d) * self._riesz_integral(s, d, v)
        return out

    @measure_service_operation_time(service="GreenService", operation="fractional_ball_green")
    def fractional_ball_green(self, s: float, d: int, pair: BallPointPair, method: str = "closed") -> float:
        """
        Riesz's Green's function k̃_{s,d} r^{2H} ∫_0^V (v + 1)^{-d/2} v^{s-1} dv for 0 < s < 1.

        V = (1 - |x|²)(1 - |y|²)/|x - y|². The closed form is an incomplete
        beta function; ``method="quadrature"`` substitutes v = u^{1/s} and
        integrates the resulting smooth integrand.

        Raises:
            SingularityError: on the diagonal unless d = 1 and s > 1/2
        """
        try:
            self._check_fractional(s)
            if method == "closed":
                return float(self.fractional_ball_green_values(s, d, pair.x[None, :], pair.y)[0])
            if method != "quadrature":
                raise ValidationError(field="method", message=f"unknown method {method!r}")
            r, _, area = ball_geometry(pair.x[None, :], pair.y)
            if r[0] == 0:
                raise SingularityError(field="x", message="quadrature form needs x != y")
            upper = (area[0] / r[0] ** 2) ** s
            value, _ = integrate.quad(lambda u: (u ** (1.0 / s) + 1.0) ** (-d / 2.0) / s, 0.0, upper,
                                      epsabs=0.0, epsrel=1e-12, limit=200)
            return self.riesz_constant(s, d) * r[0] ** (2.0 * s - d) * value
        except Exception as e:
            self.logger.error("fractional_ball_green_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    # composed order s > 1

    def _polar_rule(self, centre: np.ndarray, d: int, n_radial: int, n_angular: int,
                    gamma: float, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights over the unit ball in polar coordinates about ``centre``."""
        directions, w_dir = quadrature.sphere_rule(d, n_angular)
        along = directions @ centre
        rho_max = -along + np.sqrt(along ** 2 + 1.0 - float(centre @ centre))
        p = RADIAL_MAP_POWER
        beta = p * (gamma + 1.0) - 1.0
        t, w_t = quadrature.jacobi_rule(n_radial, alpha, beta)
        rho = rho_max[None, :] * t[:, None] ** p
        nodes = centre[None, None, :] + rho[..., None] * directions[None, :, :]
        jacobian = rho ** (d - 1) * rho_max[None, :] * p * t[:, None] ** (p - 1)
        weights = (w_t / ((1.0 - t) ** alpha * t ** beta))[:, None] * w_dir[None, :] * jacobian
        return nodes.reshape(-1, d), weights.reshape(-1)

    def _composed_1d(self, m: int, sigma: float, x: float, y: float) -> float:
        def integrand(u: float) -> float:
            point = np.array([[u]])
            return float(self.integer_ball_green_values(m, 1, point, [x])[0]
                         * self.fractional_ball_green_values(sigma, 1, point, [y])[0])
        breaks = sorted({x, y})
        value, _ = integrate.quad(integrand, -1.0, 1.0, points=breaks, epsabs=0.0, epsrel=1e-10, limit=400)
        return value

    @measure_service_operation_time(service="GreenService", operation="composed_ball_green")
    def composed_ball_green(self, s: float, d: int, pair: BallPointPair, quad_points: int = 16) -> float:
        """
        G^s_B(x, y) = ∫_B G^m_B(x, u) G^σ_B(u, y) du with m = ⌊s⌋, σ = s - m.

        In d = 1 adaptive quadrature with breakpoints at x and y is used. In
        d = 2, 3 a smooth partition of unity ψ_x = |u-y|⁴/(|u-x|⁴ + |u-y|⁴)
        splits the ball integral into two pieces, each integrated in polar
        coordinates about its singular point with a Gauss–Jacobi radial rule
        (boundary exponent s, origin exponent matching the local singularity)
        and doubled until the relative change is below 1e-6.

        Args:
            s: non-integer order above 1
            d: dimension (1, 2 or 3)
            pair: the two points
            quad_points: radial nodes at the coarsest level

        Raises:
            SingularityError: on the diagonal when H <= 0
            QuadratureError: if the refinement does not settle
        """
        spec = FieldSpec.of(s, d)
        if spec.s <= 1.0 or spec.integer_order is not None:
            raise DomainError(field="s", message=f"composed Green's function needs non-integer s > 1, got {s}")
        m = int(math.floor(spec.s))
        sigma = spec.s - m
        try:
            same = pair.distance == 0.0
            if same and spec.H <= 0:
                raise SingularityError(field="x", message=f"G^{s}_B diverges on the diagonal in d = {d}")
            if d == 1:
                return self._composed_1d(m, sigma, float(pair.x[0]), float(pair.y[0]))
            base_angular = 16 if d == 2 else 6

            def product(nodes: np.ndarray) -> np.ndarray:
                return (self.integer_ball_green_values(m, d, nodes, pair.x)
                        * self.fractional_ball_green_values(sigma, d, nodes, pair.y))

            def evaluate(level: int) -> float:
                n_radial = quad_points * 2 ** level
                n_angular = base_angular * 2 ** level
                if same:
                    gamma = 2.0 * sigma - 1.0 + min(0, 2 * m - d)
                    nodes, weights = self._polar_rule(pair.x, d, n_radial, n_angular, gamma, spec.s)
                    return float(np.sum(weights * product(nodes)))
                total = 0.0
                for centre, gamma, own in ((pair.x, 0.0, True), (pair.y, 2.0 * sigma - 1.0, False)):
                    nodes, weights = self._polar_rule(centre, d, n_radial, n_angular, gamma, spec.s)
                    to_x = np.sum((nodes - pair.x) ** 2, axis=1) ** 2
                    to_y = np.sum((nodes - pair.y) ** 2, axis=1) ** 2
                    share = (to_y if own else to_x) / (to_x + to_y)
                    total += float(np.sum(weights * share * product(nodes)))
                return total

            value, level, change = quadrature.refine_until_stable(
                evaluate, COMPOSED_TOL, COMPOSED_LEVELS, "composed_ball_green",
            )
            self.logger.debug("composed_ball_green_evaluated", s=s, d=d, level=level, change=change)
            return value
        except Exception as e:
            self.logger.error("composed_ball_green_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    # assembly

    def green_value(self, s: float, d: int, pair: BallPointPair) -> float:
        """Dispatch on the order: integer, fractional in (0, 1) or composed."""
        spec = FieldSpec.of(s, d)
        if spec.s <= 0:
            raise DomainError(field="s", message=f"ball Green's function needs s > 0, got {s}")
        if spec.integer_order is not None:
            return self.integer_ball_green(spec.integer_order, d, pair)
        if spec.s < 1.0:
            return self.fractional_ball_green(spec.s, d, pair)
        return self.composed_ball_green(spec.s, d, pair)

    @measure_service_operation_time(service="GreenService", operation="ball_covariance_matrix")
    def ball_covariance_matrix(self, s: float, d: int, points: Sequence[Sequence[float]]) -> CovMatrix:
        """
        Zero-boundary covariance G^s_B over interior points.

        Raises:
            SingularityError: when H <= 0 (the diagonal is infinite)
            PSDError: if the assembled matrix violates the eigenvalue floor
        """
        pts = _as_points(points, d)
        spec = FieldSpec.of(s, d)
        try:
            if spec.H <= 0:
                raise SingularityError(field="s", message=f"H = {spec.H} <= 0: pointwise variances are infinite")
            size = len(pts)
            entries = np.empty((size, size))
            for i in range(size):
                for j in range(i, size):
                    pair = BallPointPair(x=pts[i], y=pts[j], d=d)
                    entries[i, j] = entries[j, i] = self.green_value(spec.s, d, pair)
            matrix = CovMatrix(points=pts, entries=entries)
            if not matrix.is_psd():
                raise PSDError(field="entries", message=f"minimum eigenvalue {matrix.min_eigenvalue():.3e} below floor")
            self.logger.info("ball_covariance_assembled", s=s, d=d, size=size)
            return matrix
        except Exception as e:
            self.logger.error("ball_covariance_matrix_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    def ball_cross_covariance(self, s: float, d: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """G^s_B(x_i, y_j) between two point sets with no common point."""
        x_pts, y_pts = _as_points(rows, d), _as_points(cols, d)
        out = np.empty((len(x_pts), len(y_pts)))
        for i, x in enumerate(x_pts):
            for j, y in enumerate(y_pts):
                out[i, j] = self.green_value(s, d, BallPointPair(x=x, y=y, d=d))
        return out

    # continuum variance of a test function

    def _remainder_values(self, spec: FieldSpec, points: np.ndarray, y: np.ndarray) -> np.ndarray:
        """G_B(x, y) minus the whole-space kernel, a bounded function on the ball."""
        d, s = spec.d, spec.s
        r, q, area = ball_geometry(points, y)
        if spec.integer_order is not None:
            terms = _PolyharmonicTerms(spec.integer_order, d, self.constant)
            if spec.regime is Regime.NONNEG_INTEGER_H:
                log = 2.0 * self.kernel_service.log_residue(spec.integer_hurst, d)
                return terms.evaluate(r, q, log=log)
            return terms.evaluate(r, q, power=self.kernel_service.normalization_constant(s, d))
        if not 0.0 < s < 1.0:
            raise DomainError(field="s", message="continuum ball variance needs integer s or 0 < s < 1")
        k_tilde = self.riesz_constant(s, d)
        out = np.empty_like(r)
        diagonal = r == 0
        off = ~diagonal
        b = d / 2.0 - s
        if spec.regime is Regime.NONNEG_INTEGER_H:
            # d = 1, s = 1/2
            out[diagonal] = k_tilde * np.log(4.0 * area[diagonal])
            green = self.fractional_ball_green_values(s, d, points[off], y)
            out[off] = green - 2.0 * self.kernel_service.log_residue(0, d) * np.log(r[off])
        elif b > 0:
            out[diagonal] = -k_tilde * area[diagonal] ** spec.H / b
            v = area[off] / r[off] ** 2
            out[off] = -k_tilde * r[off] ** (2.0 * spec.H) * special.beta(s, b) * special.betainc(b, s, 1.0 / (1.0 + v))
        else:
            constant = self.kernel_service.normalization_constant(s, d)
            out[diagonal] = self._fractional_diagonal(s, d, area[diagonal])
            out[off] = (self.fractional_ball_green_values(s, d, points[off], y)
                        - constant * r[off] ** (2.0 * spec.H))
        return out

    @measure_service_operation_time(service="GreenService", operation="ball_bilinear")
    def ball_bilinear(self, s: float, d: int, phi: TestFunctionGrid) -> float:
        """
        ∬_{B×B} G^s_B(x, y) φ(x) φ(y) dx dy for integer s or 0 < s < 1.

        The singular whole-space part is summed in real space; the bounded
        remainder G_B minus the whole-space kernel is summed on the lattice.

        Raises:
            ValidationError: if φ does not vanish outside the ball
        """
        spec = FieldSpec.of(s, d)
        if phi.d != d:
            raise ValidationError(field="phi", message=f"test function has d = {phi.d}, expected {d}")
        mesh = np.meshgrid(*phi.coordinates(), indexing="ij")
        points = np.stack([axis.reshape(-1) for axis in mesh], axis=1)
        values = phi.values.reshape(-1)
        inside = np.linalg.norm(points, axis=1) < 1.0
        peak = float(np.max(np.abs(values)))
        if np.any(np.abs(values[~inside]) > 1e-12 * peak):
            raise ValidationError(field="phi", message="test function must vanish outside the unit ball")
        try:
            whole = self.kernel_service.real_space_bilinear(spec, phi, phi)
            support = inside & (np.abs(values) > 1e-14 * peak)
            pts, vals = points[support], values[support]
            correction = 0.0
            for i in range(len(pts)):
                correction += vals[i] * float(vals @ self._remainder_values(spec, pts, pts[i]))
            cell = phi.spacing ** d
            return whole + correction * cell ** 2
        except Exception as e:
            self.logger.error("ball_bilinear_failed", s=s, d=d, error=str(e), error_type=type(e).__name__)
            raise

    # normalization check of the integer-order constant

    @measure_service_operation_time(service="GreenService", operation="green_normalization_residual")
    def green_normalization_residual(self, s: int, d: int, constant: Optional[GreenConstant] = None,
                                     sigma: float = NORMALIZATION_SIGMA) -> float:
        """
        |∫_B G^s_B(x, y) (-Δ)^s ψ(x) dx - ψ(y)| for a narrow Gaussian ψ centred at y.

        ψ = exp(-|x - y|²/(2σ²)) with y = 0.1·e₁; the integral uses a polar
        rule about y (Gauss–Legendre in the radius up to 8σ).
        """
        order = self._integer_order(s)
        variant = constant or self.constant
        centre = np.zeros(d)
        centre[0] = 0.1
        operator = bumps.laplacian_power_of_gaussian(order, d, sigma)
        directions, w_dir = quadrature.sphere_rule(d, 16)
        rho, w_rho = quadrature.gauss_legendre(NORMALIZATION_RADIAL_NODES, 0.0, bumps.EXTENT_SIGMAS * sigma)
        offsets = rho[:, None, None] * directions[None, :, :]
        nodes = (centre + offsets).reshape(-1, d)
        green = self.integer_ball_green_values(order, d, nodes, centre, variant).reshape(len(rho), len(w_dir))
        source = (-1.0) ** order * operator(*[offsets[..., axis] for axis in range(d)])
        weights = (w_rho * rho ** (d - 1))[:, None] * w_dir[None, :]
        residual = abs(float(np.sum(weights * green * source)) - 1.0)
        self.logger.info("green_normalization_checked", s=order, d=d, constant=variant.value, residual=residual)
        return residual

    def gram_matrices(self, orders: List[float], d: int, points: np.ndarray) -> List[CovMatrix]:
        """Covariance matrices over one point set for several orders."""
        return [self.ball_covariance_matrix(s, d, points) for s in orders]
