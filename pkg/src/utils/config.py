"""Configuration management.

Experiment configs are flat ``key = value`` text files. Lines starting with
``#`` and ``[section]`` headers are ignored, so files can be grouped and
commented freely.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError
from .files import atomic_write_text


class StrategyName(str, Enum):
    """Channel-selection strategy used by CR devices."""
    SURF = "surf"
    RD = "rd"


class Mode(str, Enum):
    """How CR devices reach the mesh routers."""
    MULTI_HOP = "multi_hop"
    SINGLE_HOP = "single_hop"


class MapMode(str, Enum):
    """How a CMR builds its spectrum opportunity map."""
    STANDALONE = "standalone"
    COORDINATED = "coordinated"


class ExperimentConfig(BaseModel):
    """Full parameterization of one experiment."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # Network
    channels: int = Field(default=5, ge=1)
    cr_count: int = Field(default=100, ge=0)
    pr_count: int = Field(default=60, ge=0)
    cmr_count: int = Field(default=5, ge=0)
    portal_count: int = Field(default=1, ge=1)
    area_width: float = Field(default=1000.0, gt=0)
    area_height: float = Field(default=1000.0, gt=0)
    cr_range: float = Field(default=150.0, gt=0)
    pr_range: float = Field(default=150.0, gt=0)
    cmr_range: float = Field(default=250.0, gt=0)
    portal_range: float = Field(default=250.0, gt=0)
    cr_radios: int = Field(default=1, ge=1)
    cmr_radios: int = Field(default=2, ge=2)
    cr_mobile: bool = False
    cr_speed: float = Field(default=1.0, ge=0)
    max_placement_attempts: int = Field(default=1000, ge=1)

    # Spectrum
    occupancy_prob: Union[float, List[float]] = 0.6
    base_frequency_mhz: float = Field(default=470.0, gt=0)
    channel_bandwidth_mhz: float = Field(default=6.0, gt=0)
    sensing_dwell: int = Field(default=10, ge=1)
    busy_threshold: float = Field(default=0.5, ge=0, le=1)

    # Protocol
    strategy: StrategyName = StrategyName.SURF
    mode: Mode = Mode.MULTI_HOP
    cmr_map_mode: MapMode = MapMode.STANDALONE
    cmr_share_observations: bool = True
    ttl_init: int = Field(default=8, ge=1)
    beacon_period: int = Field(default=4, ge=1)
    pr_data_rate: float = Field(default=0.1, ge=0, le=1)
    queue_cap: int = Field(default=0, ge=0)
    reselect_prob: float = Field(default=0.5, ge=0, le=1)
    discovery_slots: int = Field(default=0, ge=0)
    selection_slots: int = Field(default=20, ge=0)
    assignment_epoch: int = Field(default=50, ge=1)

    # Run
    slots: int = Field(default=2000, ge=1)
    messages: int = Field(default=20, ge=0)
    injection_interval: int = Field(default=0, ge=0)
    seed: int = Field(default=1, ge=0)
    replications: int = Field(default=30, ge=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("occupancy_prob", mode="before")
    @classmethod
    def _split_occupancy(cls, value: Any) -> Any:
        if isinstance(value, str) and "," in value:
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("occupancy_prob")
    @classmethod
    def _check_occupancy(cls, value: Union[float, List[float]]) -> Union[float, List[float]]:
        values = value if isinstance(value, list) else [value]
        for p in values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        return value

    @model_validator(mode="after")
    def _check_channel_list(self) -> "ExperimentConfig":
        if isinstance(self.occupancy_prob, list) and len(self.occupancy_prob) != self.channels:
            raise ValueError(
                f"occupancy_prob lists {len(self.occupancy_prob)} values "
                f"but channels = {self.channels}"
            )
        return self

    def occupancy_vector(self) -> List[float]:
        """Per-channel occupancy probabilities."""
        if isinstance(self.occupancy_prob, list):
            return list(self.occupancy_prob)
        return [float(self.occupancy_prob)] * self.channels

    @property
    def discovery_window(self) -> int:
        """Slots spent on infrastructure discovery (one full scan by default)."""
        return self.discovery_slots or self.channels * self.beacon_period

    @property
    def warmup_slots(self) -> int:
        """Slots before the first injection."""
        return self.discovery_window + self.selection_slots


# Section comments for the canonical file layout
CONFIG_SECTIONS: Dict[str, List[str]] = {
    "network": [
        "channels", "cr_count", "pr_count", "cmr_count", "portal_count",
        "area_width", "area_height", "cr_range", "pr_range", "cmr_range",
        "portal_range", "cr_radios", "cmr_radios", "cr_mobile", "cr_speed",
        "max_placement_attempts",
    ],
    "spectrum": [
        "occupancy_prob", "base_frequency_mhz", "channel_bandwidth_mhz",
        "sensing_dwell", "busy_threshold",
    ],
    "protocol": [
        "strategy", "mode", "cmr_map_mode", "cmr_share_observations", "ttl_init",
        "beacon_period", "pr_data_rate", "queue_cap", "reselect_prob",
        "discovery_slots", "selection_slots", "assignment_epoch",
    ],
    "run": [
        "slots", "messages", "injection_interval", "seed", "replications", "workers",
    ],
}


class EnvironmentSettings(BaseSettings):
    """Environment overrides (``CRDRN_*`` variables or a ``.env`` file)."""
    model_config = SettingsConfigDict(env_prefix="CRDRN_", env_file=".env", extra="ignore")

    seed: Optional[int] = None
    log_level: str = "INFO"


def parse_config_text(text: str) -> Dict[str, str]:
    """
    Parse ``key = value`` lines into a raw dict.

    Args:
        text: Config file contents

    Returns:
        Mapping of key to unparsed value string

    Raises:
        ConfigError: On a line without ``=`` or a repeated key
    """
    data: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in data:
            raise ConfigError(key, f"defined twice (line {number})")
        data[key] = value
    return data


def _format_value(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: ExperimentConfig) -> str:
    """Serialize a config to the canonical ``key = value`` form."""
    values = config.model_dump()
    lines: List[str] = []
    for section, keys in CONFIG_SECTIONS.items():
        if lines:
            lines.append("")
        lines.append(f"# [{section}]")
        for key in keys:
            lines.append(f"{key} = {_format_value(values[key])}")
    return "\n".join(lines) + "\n"


def config_error_from_validation(exc: ValidationError) -> ConfigError:
    """Turn the first pydantic error into a ConfigError naming its field."""
    error = exc.errors()[0]
    if error.get("loc"):
        field = ".".join(str(part) for part in error["loc"])
    else:
        # model-level validators put the field name first in the message
        field = str(error.get("msg", "")).removeprefix("Value error, ").split(" ", 1)[0]
    message = str(error.get("msg", "invalid value")).removeprefix("Value error, ")
    return ConfigError(field, message)


def build_config(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a raw dict into an ExperimentConfig, raising ConfigError."""
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        raise config_error_from_validation(exc) from exc


class ConfigManager:
    """Loads experiment configs from files, flags and the environment."""

    def __init__(self, config_path: Optional[str] = None, env: Optional[EnvironmentSettings] = None):
        """
        Initialize the config manager.

        Args:
            config_path: Path to a key = value config file. None uses defaults.
            env: Environment settings; read from the process environment if omitted
        """
        self.config_path = Path(config_path) if config_path else None
        self.env = env if env is not None else EnvironmentSettings()
        self._config: Optional[ExperimentConfig] = None

    def read_file(self) -> Dict[str, str]:
        """Read the raw key/value pairs of the config file (empty without a file)."""
        if self.config_path is None:
            return {}
        return parse_config_text(self.config_path.read_text())

    def load(self, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Load the config: file values, then flag overrides, then the env seed.

        Args:
            overrides: Values from command-line flags; these win over the file

        Returns:
            Validated ExperimentConfig
        """
        data: Dict[str, Any] = dict(self.read_file())
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value

        # CRDRN_SEED only applies when nobody else chose a seed
        if "seed" not in data and self.env.seed is not None:
            data["seed"] = self.env.seed

        self._config = build_config(data)
        return self._config

    def get_config(self) -> ExperimentConfig:
        """Get the cached config or load it."""
        if self._config is None:
            self._config = self.load()
        return self._config

    def save(self, config: ExperimentConfig, path: Optional[str] = None) -> Path:
        """Write a config in canonical form (atomically)."""
        target = Path(path) if path else self.config_path
        if target is None:
            raise ConfigError("config_path", "no path to save to")
        atomic_write_text(target, dump_config(config))
        self._config = config
        return target

    @staticmethod
    def with_updates(config: ExperimentConfig, updates: Dict[str, Any]) -> ExperimentConfig:
        """Return a copy of config with fields replaced and re-validated."""
        data = config.model_dump()
        data.update(updates)
        return build_config(data)

