from pathlib import Path
from typing import Optional

import numpy as np

from fgfield.domain.entities.field_spec import FieldSpec
from fgfield.domain.entities.results import SampleEnsemble
from fgfield.domain.services.sampler_service import MIN_PAIRS, ExactMode, SamplerService
from fgfield.domain.validators.command_schemas import DiagnoseCommand, SampleCommand
from fgfield.infrastructure.storage import write_grid, write_pgm, write_png
from ..context import CommandContext, summary_line


def _stem(s: Optional[float]) -> str:
    return "white" if s is None else f"field_s{s:g}"


def _image_path(target: str, s: Optional[float], family: bool) -> Path:
    """The image path as given, or one file per order beside it for a coupled family."""
    path = Path(target)
    if not family:
        return path
    suffix = "white" if s is None else f"s{s:g}"
    return path.with_name(f"{path.stem}_{suffix}{path.suffix}")


def run_sample(command: SampleCommand, ctx: CommandContext) -> None:
    """
    Spectral torus samples (or raw white noise), all orders from one noise draw.

    A single order goes to the ``--out`` grid file when one is named; otherwise
    each order gets ``field_s<s>.csv`` in the output directory. Image paths are
    taken as given for one order and suffixed per order for ``--s-list``.
    """
    config = ctx.config.merged(d=command.d, n=command.n, box_length=command.box)
    seed = config.require_seed()
    sampler = SamplerService()
    if command.mode == "white":
        fields = {None: sampler.sample_white_noise(config)}
    else:
        fields = sampler.sample_coupled_family(config, command.orders)
    family = len(fields) > 1

    for s, grid in fields.items():
        grid_path = command.grid_file if command.grid_file is not None else ctx.path(f"{_stem(s)}.csv")
        ctx.record(write_grid(grid_path, grid, s=s, seed=seed))
        if command.png:
            path = ctx.record(write_png(_image_path(command.png, s, family), grid))
            ctx.record(path.with_name(path.name + ".json"))
        if command.pgm:
            path = ctx.record(write_pgm(_image_path(command.pgm, s, family), grid, bits=command.bits))
            ctx.record(path.with_name(path.name + ".json"))
    ctx.manifest.config = config.to_dict()
    ctx.derive(spacing=config.spacing, orders=[s for s in fields])
    ctx.emit(summary_line({"fields": len(fields), "n": config.n, "d": config.d, "spacing": config.spacing}))


def run_diagnose(command: DiagnoseCommand, ctx: CommandContext) -> None:
    """Structure function and Gaussianity of exact one-dimensional draws pinned at 0."""
    config = ctx.config.merged(d=1, n=command.n)
    sampler = SamplerService()
    spec = FieldSpec.of(command.H + 0.5, 1)
    points = (np.arange(1, command.n + 1) / command.n)[:, None]
    draws = sampler.sample_fgf_exact(spec, points, ExactMode.PINNED_AT_ZERO, config, count=command.samples)
    ensemble = SampleEnsemble(samples=draws, spec=spec, spacing=1.0 / command.n, config=config)
    structure = sampler.structure_function(ensemble, command.lags)
    report = {
        "H": command.H,
        "lags": structure.lags,
        "values": structure.values,
        "pair_counts": structure.pair_counts,
        "slope": structure.slope,
        "hurst_estimate": structure.hurst_estimate,
    }
    if command.samples >= MIN_PAIRS:
        report["gaussianity"] = sampler.gaussianity(draws[:, -1])
    ctx.manifest.config = config.to_dict()
    ctx.derive(hurst_estimate=structure.hurst_estimate)
    ctx.write_json("diagnose.json", report)
    ctx.emit(summary_line({"hurst_estimate": structure.hurst_estimate, "slope": structure.slope}))
