"""
Gauss hypergeometric function ₂F₁(a, b; c; z) for real arguments z ≤ 1.

The power series is used for |z| ≤ 1/2, the linear transformation toward
1 - z for 1/2 < z < 1, Gauss's theorem at z = 1 and the Pfaff transformation
for z < -1/2. The transformation toward 1 - z has a logarithmic case when
c - a - b is an integer; that case is rejected with HypergeometricError.
"""
import math

from scipy import special

from ..exceptions import HypergeometricError, ValidationError

SERIES_TOL = 1e-17
MAX_TERMS = 5000
DEGENERATE_TOL = 1e-9


def _is_nonpositive_integer(value: float) -> bool:
    return value <= 0 and abs(value - round(value)) < 1e-14


def _series(a: float, b: float, c: float, z: float) -> float:
    term = 1.0
    total = 1.0
    small_in_a_row = 0
    for k in range(MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= SERIES_TOL * abs(total):
            small_in_a_row += 1
            if small_in_a_row == 2:
                return total
        else:
            small_in_a_row = 0
    raise HypergeometricError(
        field="z",
        message=f"series for 2F1({a}, {b}; {c}; {z}) did not converge in {MAX_TERMS} terms",
    )


def _gauss_at_one(a: float, b: float, c: float) -> float:
    excess = c - a - b
    if excess <= 0:
        raise HypergeometricError(field="z", message=f"2F1 diverges at z = 1 when c - a - b = {excess} <= 0")
    return float(
        special.gamma(c) * special.gamma(excess) * special.rgamma(c - a) * special.rgamma(c - b)
    )


def _toward_one(a: float, b: float, c: float, z: float) -> float:
    excess = c - a - b
    if abs(excess - round(excess)) <= DEGENERATE_TOL:
        raise HypergeometricError(
            field="c",
            message=f"c - a - b = {excess} is an integer; the logarithmic connection case is not supported",
        )
    w = 1.0 - z
    first = special.gamma(c) * special.gamma(excess) * special.rgamma(c - a) * special.rgamma(c - b)
    second = special.gamma(c) * special.gamma(-excess) * special.rgamma(a) * special.rgamma(b)
    value = first * hyp2f1(a, b, 1.0 - excess, w)
    if second != 0.0:
        value += second * w ** excess * hyp2f1(c - a, c - b, 1.0 + excess, w)
    return float(value)


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """
    ₂F₁(a, b; c; z) for real z ≤ 1 with absolute accuracy about 1e-10.

    Raises:
        ValidationError: if c is a nonpositive integer or z > 1
        HypergeometricError: on the integer c - a - b connection case or divergence at z = 1
    """
    if _is_nonpositive_integer(c):
        raise ValidationError(field="c", message=f"c = {c} is a nonpositive integer")
    if not math.isfinite(z) or z > 1.0:
        raise ValidationError(field="z", message=f"z must be a real number <= 1, got {z}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _series(a, b, c, z)
    if abs(z) <= 0.5:
        return _series(a, b, c, z)
    if z == 1.0:
        return _gauss_at_one(a, b, c)
    if z > 0.5:
        return _toward_one(a, b, c, z)
    # Pfaff: maps z < -1/2 into (1/3, 1)
    return float((1.0 - z) ** (-a) * hyp2f1(a, c - b, c, z / (z - 1.0)))
