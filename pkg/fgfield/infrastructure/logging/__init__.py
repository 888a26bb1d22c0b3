"""
Centralized logging configuration for fgfield.
Provides consistent structlog setup across the library and the CLI.
"""

import logging
import sys
from typing import Optional

import structlog

from .config import LOG_FORMAT, LOG_LEVEL, build_processors


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """
    Configure stdlib logging and structlog.

    Safe to call more than once; the last call wins. Log records go to stderr
    so that CLI results printed on stdout stay machine readable.

    Args:
        level: Log level name (defaults to FGF_LOG_LEVEL)
        fmt: "json" or "console" (defaults to FGF_LOG_FORMAT)
    """
    level_name = (level or LOG_LEVEL).upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name, logging.WARNING),
    )

    structlog.configure(
        processors=build_processors(fmt or LOG_FORMAT),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def get_logger(name: Optional[str] = None) -> structlog.stdlib.BoundLogger:
    """
    Get a logger instance with optional name.

    Args:
        name: Optional name for the logger (typically __name__)

    Returns:
        A configured structlog logger instance
    """
    return structlog.get_logger(name)


configure_logging()

# Default logger instance
logger = get_logger(__name__)
