from fgfield.domain.entities.field_spec import FieldSpec
from fgfield.domain.entities.results import BallPointPair
from fgfield.domain.services.green_service import GreenService
from fgfield.domain.services.kernel_service import KernelService
from fgfield.domain.validators.command_schemas import GreenCommand, KernelCommand
from ..context import CommandContext


def run_kernel(command: KernelCommand, ctx: CommandContext) -> None:
    """Print the pointwise whole-space kernel, or fail with the regime error."""
    spec = FieldSpec.of(command.s, command.d)
    ctx.derive(regime=spec.regime, H=spec.H)
    value = KernelService(quad_tol=ctx.config.quad_tol).whole_space_kernel(spec, command.r)
    ctx.derive(kernel=value)
    ctx.emit("%.12g" % value)


def run_green(command: GreenCommand, ctx: CommandContext) -> None:
    pair = BallPointPair(x=command.x, y=command.y, d=command.d)
    service = GreenService()
    if command.mode == "int":
        value = service.integer_ball_green(command.s, command.d, pair)
    elif command.mode == "frac":
        value = service.fractional_ball_green(command.s, command.d, pair)
    else:
        value = service.composed_ball_green(command.s, command.d, pair)
    ctx.derive(green=value, constant=service.constant)
    ctx.emit("%.12g" % value)
