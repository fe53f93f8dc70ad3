"""Configuration, errors, seeding, logging and file helpers."""

from .config import ConfigManager, ExperimentConfig, MapMode, Mode, StrategyName
from .errors import ConfigError, SimulationError
from .logging import setup_logging
from .seeding import replication_seed, stream

__all__ = [
    "ConfigError",
    "ConfigManager",
    "ExperimentConfig",
    "MapMode",
    "Mode",
    "SimulationError",
    "StrategyName",
    "replication_seed",
    "setup_logging",
    "stream",
]
