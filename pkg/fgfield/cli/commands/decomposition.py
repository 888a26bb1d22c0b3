import numpy as np

from fgfield.domain.entities.lattice import LatticeDomain
from fgfield.domain.entities.results import SphericalKernelQuery
from fgfield.domain.services.decomposition_service import DecompositionService
from fgfield.domain.services.green_service import GreenService
from fgfield.domain.validators.command_schemas import DecomposeCommand, SphericalCommand
from ..context import CommandContext, summary_line


def run_decompose(command: DecomposeCommand, ctx: CommandContext) -> None:
    """Split a zero-boundary field on (-1, 1) at |x| = inner and measure the s-harmonic residual of both parts."""
    config = ctx.config.merged(d=1)
    domain = LatticeDomain.ball(1, command.delta)
    covariance = GreenService().ball_covariance_matrix(command.s, 1, domain.points)
    inside = np.abs(domain.points[:, 0]) < command.inner
    service = DecompositionService()
    split = service.resample_split(covariance, inside, config, count=1)[0]
    residuals = {
        part: service.s_harmonicity_residual(split, command.s, command.delta, margin=command.margin, part=part)
        for part in ("harmonic", "zero")
    }
    ctx.manifest.config = config.to_dict()
    ctx.derive(harmonic_residual=residuals["harmonic"], zero_residual=residuals["zero"])
    ctx.write_json("split.json", {
        "points": split.points[:, 0],
        "in_d": split.d_mask,
        "harmonic_part": split.harmonic_part,
        "zero_part": split.zero_part,
        "residuals": residuals,
    })
    ctx.emit(summary_line({"harmonic_residual": residuals["harmonic"], "zero_residual": residuals["zero"]}))


def run_spherical(command: SphericalCommand, ctx: CommandContext) -> None:
    query = SphericalKernelQuery(d=command.d, H=command.H, k=command.k, r1=command.r1, r2=command.r2)
    result = DecompositionService().spherical_coefficient_cov(query)
    ctx.derive(theta_form=result.theta_form, closed_form=result.closed_form, relative_gap=result.relative_gap,
               form=result.form, fallback=result.fallback)
    ctx.emit(summary_line({
        "value": result.value,
        "theta_form": result.theta_form,
        "closed_form": "none" if result.closed_form is None else result.closed_form,
    }))
