import numpy as np

from fgfield.domain.entities.lattice import LatticeDomain
from fgfield.domain.services.discrete_field_service import DiscreteFieldService
from fgfield.domain.validators.command_schemas import ConvergeCommand, DfgfCommand
from ..context import CommandContext, summary_line

BUMP_RADIUS = 0.8


def odd_bump(*coords: np.ndarray) -> np.ndarray:
    """x₁(1 - |x|²/ρ²)³ inside |x| < ρ: supported in the ball, zero mass."""
    r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords) / BUMP_RADIUS ** 2
    return np.where(r2 < 1.0, coords[0] * np.clip(1.0 - r2, 0.0, None) ** 3, 0.0)


def run_dfgf(command: DfgfCommand, ctx: CommandContext) -> None:
    """Assemble the ball precision, then optionally draw samples and run the walk estimator."""
    config = ctx.config.merged(d=command.d)
    domain = LatticeDomain.ball(command.d, command.delta, command.radius, truncation_radius=config.truncation_radius)
    service = DiscreteFieldService(normalization=command.normalization, max_walk_steps=config.max_walk_steps)
    precision = service.assemble_precision(domain, command.s, command.normalization)
    ctx.manifest.config = config.to_dict()
    ctx.derive(sites=domain.size, margin=precision.margin, tail_bound=precision.tail_bound,
               truncation_radius=domain.truncation_radius, normalization=command.normalization)

    if command.samples:
        draws = service.sample_dfgf_ensemble(precision, config, count=command.samples)
        ctx.write_json("dfgf_samples.json", {"points": domain.points, "samples": draws, "s": command.s})
    if command.walks:
        estimate = service.walk_green_estimator(domain, command.s, command.start, command.walks, config,
                                                normalization=command.normalization)
        exact = service.dfgf_green(precision).entries[estimate.start]
        z = (estimate.values - exact) / np.where(estimate.stderr > 0, estimate.stderr, np.inf)
        ctx.write_json("walk_estimate.json", {
            "start": estimate.start,
            "estimate": estimate.values,
            "stderr": estimate.stderr,
            "exact": exact,
            "max_abs_z": float(np.max(np.abs(z))),
            "censored": estimate.censored,
            "mean_jumps": estimate.mean_jumps,
            "exit_jump_probability": estimate.exit_jump_probability,
            "time_scale": estimate.time_scale,
        })
        ctx.derive(time_scale=estimate.time_scale, censored=estimate.censored)
    ctx.emit(summary_line({"sites": domain.size, "margin": precision.margin, "tail_bound": precision.tail_bound}))


def run_converge(command: ConvergeCommand, ctx: CommandContext) -> None:
    """Discrete-to-continuum table written as convergence.csv."""
    report = DiscreteFieldService().convergence_report(
        command.s, command.deltas, d=command.d, pairs=command.parsed_pairs() or None,
        test_function=odd_bump if command.bump else None,
    )
    ctx.write_table(
        "convergence.csv",
        ["delta", "label", "discrete", "continuum", "relative_error"],
        [[row.delta, row.label, row.discrete, row.continuum, row.relative_error] for row in report.rows],
    )
    ctx.derive(final_error=report.final_error, monotone=report.monotone)
    ctx.emit(summary_line({"rows": len(report.rows), "final_error": report.final_error, "monotone": report.monotone}))
