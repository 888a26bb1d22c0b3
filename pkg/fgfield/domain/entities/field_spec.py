from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math
from typing import Optional, Union

from fgfield.config import Config
from ..exceptions import ValidationError

Real = Union[int, float, Fraction, str]


class Regime(str, Enum):
    """Kernel regime of FGF_s(R^d), a pure function of (s, d)."""
    POS_NON_INTEGER_H = "PosNonIntegerH"
    NONNEG_INTEGER_H = "NonnegIntegerH"
    NEG_NON_INTEGER_S = "NegNonIntegerS"
    NONPOS_INTEGER_S = "NonposIntegerS"


def exact_value(value: Real, tol: float = Config.SNAP_TOL) -> Optional[Fraction]:
    """
    Exact rational form of ``value`` when it is known or snaps to a half-integer.

    Integers, Fractions and decimal strings ("3/2", "0.75") are exact. A float
    within ``tol`` of a multiple of 1/2 snaps to it; other floats stay inexact.
    """
    if isinstance(value, bool):
        raise ValidationError(field="s", message="boolean is not a valid order")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(field="s", message=f"cannot parse {value!r} as a rational") from exc
    number = float(value)
    if not math.isfinite(number):
        raise ValidationError(field="s", message=f"order must be finite, got {value}")
    twice = round(2.0 * number)
    if abs(2.0 * number - twice) <= 2.0 * tol:
        return Fraction(twice, 2)
    return None


@dataclass(frozen=True)
class FieldSpec:
    """The parameter triple (d, s, H = s - d/2) and its kernel regime."""
    d: int
    s: float
    s_exact: Optional[Fraction] = None
    H: float = field(init=False)
    regime: Regime = field(init=False)

    def __post_init__(self):
        if not isinstance(self.d, int) or isinstance(self.d, bool) or self.d < 1:
            raise ValidationError(field="d", message=f"dimension must be a positive integer, got {self.d!r}")
        if self.s_exact is None:
            object.__setattr__(self, "s_exact", exact_value(self.s))
        object.__setattr__(self, "s", float(self.s_exact) if self.s_exact is not None else float(self.s))
        object.__setattr__(self, "H", self.s - self.d / 2.0)
        object.__setattr__(self, "regime", self._classify())

    @classmethod
    def of(cls, s: Real, d: int) -> "FieldSpec":
        """Build a spec from any real-like ``s``, snapping near classification boundaries."""
        return cls(d=d, s=s)

    def _classify(self) -> Regime:
        if self.s_exact is not None:
            hurst = self.s_exact - Fraction(self.d, 2)
            if self.s_exact <= 0:
                if self.s_exact.denominator == 1:
                    return Regime.NONPOS_INTEGER_S
                return Regime.NEG_NON_INTEGER_S
            if hurst >= 0 and hurst.denominator == 1:
                return Regime.NONNEG_INTEGER_H
            return Regime.POS_NON_INTEGER_H
        # inexact values are never on a boundary (they would have snapped)
        return Regime.POS_NON_INTEGER_H if self.s > 0 else Regime.NEG_NON_INTEGER_S

    @property
    def has_pointwise_kernel(self) -> bool:
        return self.regime in (Regime.POS_NON_INTEGER_H, Regime.NONNEG_INTEGER_H)

    @property
    def hurst_floor(self) -> int:
        """⌊H⌋, the polynomial degree the field is defined modulo (−1 when H < 0)."""
        return math.floor(self.H + 1e-12) if self.H >= 0 else -1

    @property
    def integer_hurst(self) -> Optional[int]:
        if self.regime is Regime.NONNEG_INTEGER_H:
            return int(round(self.H))
        return None

    @property
    def integer_order(self) -> Optional[int]:
        """s as an int when s is an exact integer."""
        if self.s_exact is not None and self.s_exact.denominator == 1:
            return int(self.s_exact)
        return None

    def with_order(self, s: Real) -> "FieldSpec":
        return FieldSpec.of(s, self.d)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "s": str(self.s_exact) if self.s_exact is not None else self.s,
            "H": self.H,
            "regime": self.regime.value,
        }
