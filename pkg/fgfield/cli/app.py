"""
Command-line front end.

Every invocation resolves a RunConfig (JSON file, then flags), validates the
subcommand flags, runs one handler and writes ``manifest.json`` into the
output directory, whether the run succeeded or not. Exit codes: 0 success,
1 validation failure, 2 numerical failure.
"""

import argparse
from fractions import Fraction
from pathlib import Path
import sys
from typing import Any, Dict, List, NoReturn, Optional

import structlog

from fgfield import __version__
from fgfield.config import Config
from fgfield.domain.exceptions import FieldError, ValidationError
from fgfield.domain.validators.command_schemas import COMMAND_SCHEMAS, GRID_SUFFIX, parse_command
from fgfield.domain.validators.run_config import RunConfig, load_run_config
from fgfield.infrastructure.logging import configure_logging
from fgfield.infrastructure.monitoring import PerformanceMetrics
from fgfield.infrastructure.storage import RunManifest, write_manifest
from .commands import HANDLERS
from .context import CommandContext

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

COMMON_FLAGS = ("command", "config", "verbose")
# flags that also set RunConfig fields
CONFIG_FLAGS = {"seed": "seed", "n": "n", "d": "d", "box": "box_length"}

logger = structlog.get_logger(__name__)


class FieldArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports bad flags as a ValidationError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise ValidationError(field="arguments", message=message, usage=self.format_usage().strip())


def rational(text: str) -> Fraction:
    """Parse a decimal or a ratio such as ``2/3`` exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid rational value: {text!r}") from exc


def output_dir(out: Optional[str]) -> Path:
    """Directory receiving the manifest: ``--out`` itself, or the parent of a grid file."""
    if not out:
        return Path(Config.OUTPUT_DIR)
    path = Path(out)
    return path.parent if path.suffix == GRID_SUFFIX else path


def _out_flag(argv: List[str]) -> Optional[str]:
    for position, token in enumerate(argv):
        if token == "--out" and position + 1 < len(argv):
            return argv[position + 1]
        if token.startswith("--out="):
            return token.split("=", 1)[1]
    return None


def _command_name(argv: List[str]) -> Optional[str]:
    return next((token for token in argv if token in COMMAND_SCHEMAS), None)


def _common_parser() -> argparse.ArgumentParser:
    common = FieldArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--out", help="Output directory, or a .csv grid file for a single sampled order "
                                      "(default: FGF_OUTPUT_DIR)")
    common.add_argument("--verbose", action="store_true", help="Log at INFO level to stderr")
    common.add_argument("--seed", type=int, help="64-bit unsigned seed")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = FieldArgumentParser(prog="fgfield", description="Fractional Gaussian field toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    sample = sub.add_parser("sample", parents=[common], help="Spectral samples on the torus")
    sample.add_argument("--d", type=int, required=True)
    sample.add_argument("--s", type=rational)
    sample.add_argument("--s-list", dest="s_list", type=rational, nargs="+",
                        help="Orders drawn from one white-noise sample")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--box", type=float)
    sample.add_argument("--png", metavar="PATH", help="Grayscale PNG of a planar field")
    sample.add_argument("--pgm", metavar="PATH", help="Binary PGM of a planar field")
    sample.add_argument("--bits", type=int, choices=(8, 16))
    sample.add_argument("--mode", choices=("spectral", "white"))

    kernel = sub.add_parser("kernel", parents=[common], help="Pointwise whole-space kernel")
    kernel.add_argument("--d", type=int, required=True)
    kernel.add_argument("--s", type=rational, required=True)
    kernel.add_argument("--r", type=float, required=True)

    green = sub.add_parser("green", parents=[common], help="Ball Green's functions")
    green.add_argument("--mode", choices=("int", "frac", "composed"), required=True)
    green.add_argument("--d", type=int, required=True)
    green.add_argument("--s", type=rational, required=True)
    green.add_argument("--x", type=float, nargs="+", required=True)
    green.add_argument("--y", type=float, nargs="+", required=True)

    dfgf = sub.add_parser("dfgf", parents=[common], help="Discrete field on a ball")
    dfgf.add_argument("--d", type=int, required=True)
    dfgf.add_argument("--s", type=rational, required=True)
    dfgf.add_argument("--delta", type=rational, required=True)
    dfgf.add_argument("--radius", type=float)
    dfgf.add_argument("--walks", type=int)
    dfgf.add_argument("--start", type=int)
    dfgf.add_argument("--samples", type=int)
    dfgf.add_argument("--normalization", choices=("continuum", "ordered_pairs"))

    converge = sub.add_parser("converge", parents=[common], help="Discrete-to-continuum table")
    converge.add_argument("--d", type=int)
    converge.add_argument("--s", type=rational, required=True)
    converge.add_argument("--deltas", type=rational, nargs="+", required=True)
    converge.add_argument("--pairs", nargs="+", help="Point pairs x1,..,xd:y1,..,yd")
    converge.add_argument("--bump", action="store_true", help="Include the variance of a smooth odd bump")

    decompose = sub.add_parser("decompose", parents=[common], help="Harmonic split on (-1, 1)")
    decompose.add_argument("--s", type=rational, required=True)
    decompose.add_argument("--delta", type=rational, required=True)
    decompose.add_argument("--inner", type=float)
    decompose.add_argument("--margin", type=float)

    spherical = sub.add_parser("spherical", parents=[common], help="Spherical average kernels")
    spherical.add_argument("--d", type=int, required=True)
    spherical.add_argument("--H", dest="H", type=rational, required=True)
    spherical.add_argument("--k", type=int)
    spherical.add_argument("--r1", type=float, required=True)
    spherical.add_argument("--r2", type=float, required=True)

    diagnose = sub.add_parser("diagnose", parents=[common], help="Structure function and Gaussianity")
    diagnose.add_argument("--H", dest="H", type=rational, required=True)
    diagnose.add_argument("--n", type=int, required=True)
    diagnose.add_argument("--samples", type=int, required=True)
    diagnose.add_argument("--lags", type=float, nargs="+", required=True)
    return parser


def _resolve_config(args: argparse.Namespace, flags: Dict[str, Any]) -> RunConfig:
    overrides = {field: flags.get(flag) for flag, field in CONFIG_FLAGS.items()}
    if args.out:
        overrides["output_dir"] = str(output_dir(args.out))
    return load_run_config(args.config, **overrides)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    configure_logging("INFO" if "--verbose" in argv else None)
    PerformanceMetrics().reset()
    manifest = RunManifest(command=_command_name(argv), flags={})
    out_dir = output_dir(_out_flag(argv))
    code = EXIT_OK
    finished = True
    try:
        args = build_parser().parse_args(argv)
        manifest.flags = {key: value for key, value in vars(args).items() if key not in COMMON_FLAGS}
        config = _resolve_config(args, manifest.flags)
        out_dir = Path(config.output_dir)
        manifest.config = config.to_dict()
        command = parse_command(COMMAND_SCHEMAS[args.command], manifest.flags)
        HANDLERS[args.command](command, CommandContext(config=config, out_dir=out_dir, manifest=manifest))
    except SystemExit:
        # --help and --version
        finished = False
        raise
    except ValidationError as e:
        code = EXIT_VALIDATION
        manifest.fail(e)
        print(f"error: {e}", file=sys.stderr)
    except FieldError as e:
        code = EXIT_NUMERICAL
        manifest.fail(e)
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
    finally:
        if finished:
            try:
                write_manifest(out_dir, manifest)
            except OSError as e:
                logger.error("manifest_write_failed", path=str(out_dir), error=str(e), error_type=type(e).__name__)
    logger.info("command_finished", command=manifest.command, status=manifest.status, exit_code=code)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
