from .run_config import RunConfig, build_run_config, load_run_config
from .command_schemas import (
    COMMAND_SCHEMAS,
    ConvergeCommand,
    DecomposeCommand,
    DfgfCommand,
    DiagnoseCommand,
    GreenCommand,
    KernelCommand,
    SampleCommand,
    SphericalCommand,
    parse_command,
)

__all__ = [
    'RunConfig',
    'build_run_config',
    'load_run_config',
    'COMMAND_SCHEMAS',
    'ConvergeCommand',
    'DecomposeCommand',
    'DfgfCommand',
    'DiagnoseCommand',
    'GreenCommand',
    'KernelCommand',
    'SampleCommand',
    'SphericalCommand',
    'parse_command',
]
