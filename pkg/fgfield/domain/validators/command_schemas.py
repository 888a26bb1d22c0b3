from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator, model_validator

from ..entities.matrices import DensityNormalization
from ..exceptions import ValidationError

SchemaT = TypeVar("SchemaT", bound=BaseModel)

GRID_SUFFIX = ".csv"


def _real(value: Any) -> Any:
    return float(value) if isinstance(value, Fraction) else value


# orders, Hurst parameters and spacings arrive from the command line as exact ratios
Real = Annotated[float, BeforeValidator(_real)]


class _Command(BaseModel):
    model_config = ConfigDict(extra="ignore", frozen=True)


class SampleCommand(_Command):
    d: int = Field(..., ge=1, le=3, description="Dimension of the torus")
    s: Optional[Real] = Field(None, description="Order of the field")
    s_list: Optional[List[Real]] = Field(None, description="Orders of a coupled family drawn from one noise")
    n: int = Field(..., ge=2, description="Grid points per axis")
    box: float = Field(1.0, gt=0, description="Side length of the torus")
    out: Optional[str] = Field(None, description="Grid file (.csv) of a single order, or an output directory")
    png: Optional[str] = Field(None, description="Grayscale PNG rendering")
    pgm: Optional[str] = Field(None, description="Binary PGM rendering")
    bits: Literal[8, 16] = Field(8, description="Bit depth of PGM images")
    mode: Literal["spectral", "white"] = Field("spectral", description="Fractional field or raw white noise")

    @model_validator(mode="after")
    def validate_orders(self):
        if self.mode == "spectral" and (self.s is None) == (self.s_list is None):
            raise ValueError("give exactly one of --s and --s-list")
        if self.s_list is not None and not self.s_list:
            raise ValueError("--s-list needs at least one order")
        if (self.png or self.pgm) and self.d != 2:
            raise ValueError("images are written for d = 2 only")
        if self.grid_file is not None and len(self.orders) > 1:
            raise ValueError("--out names one grid file; give a directory for --s-list")
        return self

    @property
    def grid_file(self) -> Optional[Path]:
        if self.out is not None and Path(self.out).suffix == GRID_SUFFIX:
            return Path(self.out)
        return None

    @property
    def orders(self) -> List[float]:
        if self.mode == "white":
            return [0.0]
        return list(self.s_list) if self.s_list is not None else [self.s]


class KernelCommand(_Command):
    d: int = Field(..., ge=1, description="Dimension")
    s: Real = Field(..., description="Order of the field")
    r: float = Field(..., gt=0, description="Distance |x - y|")


class GreenCommand(_Command):
    mode: Literal["int", "frac", "composed"] = Field(..., description="Which ball Green's function to evaluate")
    d: int = Field(..., ge=1, description="Dimension")
    s: Real = Field(..., gt=0, description="Order of the field")
    x: List[float] = Field(..., description="First point inside the unit ball")
    y: List[float] = Field(..., description="Second point inside the unit ball")

    @model_validator(mode="after")
    def validate_points(self):
        if len(self.x) != self.d or len(self.y) != self.d:
            raise ValueError(f"points need {self.d} coordinates")
        return self


class DfgfCommand(_Command):
    d: int = Field(..., ge=1, le=3, description="Dimension")
    s: Real = Field(..., gt=0, lt=1, description="Order in (0, 1)")
    delta: Real = Field(..., gt=0, description="Lattice spacing")
    radius: float = Field(1.0, gt=0, description="Radius of the ball domain")
    walks: int = Field(0, ge=0, description="Number of long-range walks (0 skips the estimator)")
    start: int = Field(0, ge=0, description="Interior site index where walks start")
    samples: int = Field(0, ge=0, description="Number of exact DFGF draws to write")
    normalization: DensityNormalization = Field(DensityNormalization.CONTINUUM, description="Precision scaling")


def _parse_pair(text: str, d: int) -> Tuple[List[float], List[float]]:
    try:
        x_text, y_text = text.split(":")
        x = [float(v) for v in x_text.split(",")]
        y = [float(v) for v in y_text.split(",")]
    except ValueError as exc:
        raise ValueError(f"point pair {text!r} must read x1,..,xd:y1,..,yd") from exc
    if len(x) != d or len(y) != d:
        raise ValueError(f"point pair {text!r} needs {d} coordinates per point")
    return x, y


class ConvergeCommand(_Command):
    d: int = Field(1, ge=1, le=2, description="Dimension")
    s: Real = Field(..., gt=0, lt=1, description="Order in (0, 1)")
    deltas: List[Real] = Field(..., min_length=1, description="Lattice spacings")
    pairs: List[str] = Field(default_factory=list, description="Point pairs written x1,..,xd:y1,..,yd")
    bump: bool = Field(False, description="Add the variance of a smooth bump supported in the ball")

    @field_validator('deltas')
    @classmethod
    def validate_deltas(cls, v):
        if any(delta <= 0 for delta in v):
            raise ValueError("spacings must be positive")
        return v

    @model_validator(mode="after")
    def validate_pairs(self):
        if not self.pairs and not self.bump:
            raise ValueError("give --pairs or --bump")
        for text in self.pairs:
            _parse_pair(text, self.d)
        return self

    def parsed_pairs(self) -> List[Tuple[List[float], List[float]]]:
        return [_parse_pair(text, self.d) for text in self.pairs]


class DecomposeCommand(_Command):
    s: Real = Field(..., gt=0, description="Order of the field")
    delta: Real = Field(..., gt=0, lt=0.5, description="Lattice spacing on (-1, 1)")
    inner: float = Field(0.5, gt=0, lt=1, description="Half-width of the inner interval D")
    margin: float = Field(0.1, ge=0, description="Distance from the exterior excluded from the residual")


class SphericalCommand(_Command):
    d: int = Field(..., ge=2, description="Dimension")
    H: Real = Field(..., description="Hurst parameter s - d/2")
    k: int = Field(0, ge=0, description="Spherical harmonic degree")
    r1: float = Field(..., gt=0, description="First radius")
    r2: float = Field(..., gt=0, description="Second radius")


class DiagnoseCommand(_Command):
    H: Real = Field(..., gt=0, lt=1, description="Hurst parameter of the one-dimensional field")
    n: int = Field(..., ge=8, description="Points of the exact sample on (0, 1]")
    samples: int = Field(..., ge=1, description="Number of exact draws")
    lags: List[float] = Field(..., min_length=1, description="Lags of the structure function")

    @field_validator('lags')
    @classmethod
    def validate_lags(cls, v):
        if any(lag <= 0 for lag in v):
            raise ValueError("lags must be positive")
        return v


COMMAND_SCHEMAS: Dict[str, Type[BaseModel]] = {
    "sample": SampleCommand,
    "kernel": KernelCommand,
    "green": GreenCommand,
    "dfgf": DfgfCommand,
    "converge": ConvergeCommand,
    "decompose": DecomposeCommand,
    "spherical": SphericalCommand,
    "diagnose": DiagnoseCommand,
}


def parse_command(schema: Type[SchemaT], flags: Dict[str, Any]) -> SchemaT:
    """Validate parsed flags against a subcommand schema; unset flags fall back to the schema defaults."""
    data = {key: value for key, value in flags.items() if value is not None}
    try:
        return schema(**data)
    except PydanticValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or schema.__name__
        message = first.get("msg", str(exc))
        raise ValidationError(field=location, message=message) from exc
