"""Logging setup for the simulator.

The CLI prints its reports on stdout, so every handler here writes to stderr
or a file.
"""

import logging
import sys
from typing import Optional, Union

from .errors import ConfigError

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def resolve_level(level: Union[str, int]) -> int:
    """
    Map a level name (any case) or number to a logging level.

    Raises:
        ConfigError: Unknown level name
    """
    if isinstance(level, int):
        return level
    name = level.strip().upper()
    if name not in LEVELS:
        raise ConfigError("log_level", f"unknown level {level!r}, expected one of {', '.join(LEVELS)}")
    return getattr(logging, name)


def setup_logging(level: Union[str, int] = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """
    Configure the root logger for a simulator process.

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ERROR, CRITICAL) or number
        log_file: Optional file path to write logs to

    Returns:
        Configured root logger
    """
    log_level = resolve_level(level)
    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    return root_logger


def configure_worker(level: int) -> None:
    """Process-pool initializer: replication workers log like the parent, to stderr only."""
    setup_logging(level)


def get_logger(name: str) -> logging.Logger:
    """Get a logger with the given name."""
    return logging.getLogger(name)
