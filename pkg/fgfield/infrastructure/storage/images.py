"""Grayscale renderings of planar grids with a min-max normalization sidecar."""

import io
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
from matplotlib import image as mpimg
import structlog

from fgfield.domain.entities.grids import FieldGrid
from fgfield.domain.exceptions import ValidationError
from fgfield.infrastructure.monitoring import measure_artifact_write_time
from fgfield.infrastructure.serialization import json_dumps
from .atomic import PathLike, atomic_write_bytes, atomic_write_text

logger = structlog.get_logger(__name__)


def normalize(values: np.ndarray) -> Tuple[np.ndarray, Dict[str, float]]:
    """Map values onto [0, 1]; a constant field maps to 0."""
    low, high = float(np.min(values)), float(np.max(values))
    span = high - low
    scaled = np.zeros_like(values, dtype=float) if span == 0.0 else (values - low) / span
    return scaled, {"min": low, "max": high}


def _planar(grid: FieldGrid) -> np.ndarray:
    if grid.d != 2:
        raise ValidationError(field="grid", message=f"images need a planar grid, got d = {grid.d}")
    return grid.values


def _sidecar(path: Path, metadata: Dict[str, Any]) -> Path:
    return atomic_write_text(path.with_name(path.name + ".json"), json_dumps(metadata, indent=2) + "\n")


def encode_pgm(values: np.ndarray, bits: int = 8) -> Tuple[bytes, Dict[str, float]]:
    """Binary P5 bytes of the min-max normalized values (16-bit samples are big-endian)."""
    if bits not in (8, 16):
        raise ValidationError(field="bits", message=f"bit depth must be 8 or 16, got {bits}")
    scaled, bounds = normalize(values)
    maxval = (1 << bits) - 1
    levels = np.rint(scaled * maxval)
    body = levels.astype(np.uint8 if bits == 8 else ">u2").tobytes()
    height, width = values.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    return header + body, bounds


@measure_artifact_write_time("pgm")
def write_pgm(path: PathLike, grid: FieldGrid, bits: int = 8) -> Path:
    target = Path(path)
    payload, bounds = encode_pgm(_planar(grid), bits)
    atomic_write_bytes(target, payload)
    _sidecar(target, {"format": "pgm", "bits": bits, "shape": list(grid.values.shape), **bounds})
    logger.info("image_written", path=str(target), format="pgm", bits=bits)
    return target


@measure_artifact_write_time("png")
def write_png(path: PathLike, grid: FieldGrid) -> Path:
    target = Path(path)
    scaled, bounds = normalize(_planar(grid))
    buffer = io.BytesIO()
    mpimg.imsave(buffer, scaled, cmap="gray", vmin=0.0, vmax=1.0, format="png")
    atomic_write_bytes(target, buffer.getvalue())
    _sidecar(target, {"format": "png", "bits": 8, "shape": list(grid.values.shape), **bounds})
    logger.info("image_written", path=str(target), format="png")
    return target
