import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, field_validator

from fgfield.config import Config
from ..exceptions import ValidationError

MAX_SEED = 2 ** 64


class RunConfig(BaseModel):
    """Everything a stochastic output depends on. Identical configs give identical streams."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: Optional[int] = Field(None, description="64-bit unsigned master seed")
    n: int = Field(64, ge=2, description="Grid points per axis")
    d: int = Field(1, ge=1, description="Dimension")
    box_length: float = Field(1.0, gt=0, description="Side length L of the periodic box")
    ensemble_size: int = Field(1, ge=1, description="Number of independent draws")
    quad_tol: float = Field(Config.QUAD_TOL, gt=0, description="Relative tolerance of adaptive quadratures")
    tail_tol: float = Field(Config.TAIL_TOL, gt=0, description="Largest acceptable truncation tail bound")
    truncation_radius: Optional[float] = Field(None, gt=0, description="Interaction truncation radius R")
    pad_factor: int = Field(Config.PAD_FACTOR, ge=1, description="Zero padding factor of the Fourier oracle")
    max_walk_steps: int = Field(Config.MAX_WALK_STEPS, ge=1, description="Step cap per long-range walk")
    output_dir: str = Field(Config.OUTPUT_DIR, description="Directory receiving artifacts")

    @field_validator('seed')
    @classmethod
    def validate_seed(cls, v):
        if v is not None and not 0 <= v < MAX_SEED:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return v

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    def require_seed(self) -> int:
        """The seed, or a ValidationError: stochastic runs never fall back to a clock seed."""
        if self.seed is None:
            raise ValidationError(field="seed", message="a seed is required for stochastic commands")
        return self.seed

    def merged(self, **overrides: Any) -> "RunConfig":
        """A copy with the non-None overrides applied (flags win over file values)."""
        data = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return build_run_config(data)

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["spacing"] = self.spacing
        return data


def build_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a mapping into a RunConfig, translating pydantic failures to ValidationError."""
    try:
        return RunConfig(**data)
    except PydanticValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise ValidationError(field=location, message=first.get("msg", str(exc))) from exc


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Read a JSON run configuration (if given) and apply flag overrides on top."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError as exc:
            raise ValidationError(field="config", message=f"config file {path} does not exist") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(field="config", message=f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError(field="config", message="config file must hold a JSON object")
    data.update({key: value for key, value in overrides.items() if value is not None})
    return build_run_config(data)
