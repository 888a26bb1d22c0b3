"""
Plain-text grid format.

The first line is ``# fgf-grid d=<d> n=<n> box=<L> s=<s> seed=<seed>``. Every
following line holds n comma-separated values with x₁ varying fastest, so the
file lists the grid in column-major order of the value array. Values use
``%.17g``, which round-trips float64 exactly.
"""

import re
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import structlog

from fgfield.domain.entities.grids import BoundaryMode, FieldGrid
from fgfield.domain.exceptions import ValidationError
from fgfield.infrastructure.monitoring import measure_artifact_write_time
from .atomic import PathLike, atomic_write_text

HEADER_PREFIX = "# fgf-grid"
_HEADER = re.compile(
    r"^# fgf-grid d=(?P<d>\d+) n=(?P<n>\d+) box=(?P<box>\S+) s=(?P<s>\S+) seed=(?P<seed>\S+)$"
)

logger = structlog.get_logger(__name__)


def format_header(grid: FieldGrid, s: Optional[float], seed: Optional[int]) -> str:
    s_text = "none" if s is None else "%.17g" % s
    seed_text = "none" if seed is None else str(seed)
    return f"{HEADER_PREFIX} d={grid.d} n={grid.n} box={'%.17g' % grid.box_length} s={s_text} seed={seed_text}"


def encode_grid(grid: FieldGrid, s: Optional[float] = None, seed: Optional[int] = None) -> str:
    rows = grid.values.flatten(order="F").reshape(-1, grid.n)
    lines = [format_header(grid, s, seed)]
    lines.extend(",".join("%.17g" % value for value in row) for row in rows)
    return "\n".join(lines) + "\n"


@measure_artifact_write_time("csv")
def write_grid(path: PathLike, grid: FieldGrid, s: Optional[float] = None, seed: Optional[int] = None) -> Path:
    """Atomically write ``grid`` in the plain-text grid format."""
    target = atomic_write_text(path, encode_grid(grid, s, seed))
    logger.info("grid_written", path=str(target), d=grid.d, n=grid.n)
    return target


def parse_header(line: str) -> Dict[str, Any]:
    match = _HEADER.match(line.strip())
    if match is None:
        raise ValidationError(field="header", message=f"not a grid header: {line.strip()!r}")
    fields = match.groupdict()
    return {
        "d": int(fields["d"]),
        "n": int(fields["n"]),
        "box": float(fields["box"]),
        "s": None if fields["s"] == "none" else float(fields["s"]),
        "seed": None if fields["seed"] == "none" else int(fields["seed"]),
    }


def read_header(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as stream:
        return parse_header(stream.readline())


def read_grid(path: PathLike) -> FieldGrid:
    """Read a grid file back into a torus FieldGrid with spacing box/n."""
    with open(path, "r", encoding="utf-8") as stream:
        header = parse_header(stream.readline())
        rows = [line for line in stream.read().splitlines() if line.strip()]
    d, n = header["d"], header["n"]
    try:
        flat = np.array([float(value) for row in rows for value in row.split(",")])
    except ValueError as exc:
        raise ValidationError(field="values", message=f"unreadable value in {path}: {exc}") from exc
    if flat.size != n ** d:
        raise ValidationError(field="values", message=f"expected {n ** d} values, found {flat.size}")
    values = flat.reshape((n,) * d, order="F")
    return FieldGrid(values=values, spacing=header["box"] / n, boundary_mode=BoundaryMode.TORUS)
