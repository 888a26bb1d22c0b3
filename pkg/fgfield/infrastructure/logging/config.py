"""
Configuration settings for the logging system.
"""

from typing import Any, Dict, List

import structlog

from fgfield import __version__
from fgfield.config import Config

# Log levels
LOG_LEVEL = Config.LOG_LEVEL

# "json" for machine-readable output, "console" for humans
LOG_FORMAT = Config.LOG_FORMAT

# Default context that will be included in all log messages
DEFAULT_CONTEXT: Dict[str, Any] = {
    "app": "fgfield",
    "version": __version__,
}


def add_default_context(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Processor adding DEFAULT_CONTEXT keys without overriding explicit ones."""
    for key, value in DEFAULT_CONTEXT.items():
        event_dict.setdefault(key, value)
    return event_dict


def build_processors(fmt: str) -> List[Any]:
    """Return the structlog processor chain for the requested output format."""
    renderer = (
        structlog.dev.ConsoleRenderer(colors=False)
        if fmt == "console"
        else structlog.processors.JSONRenderer(sort_keys=True)
    )
    return [
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        add_default_context,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        renderer,
    ]
