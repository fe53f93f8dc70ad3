"""Parameter sweeps and their CSV / gnuplot outputs."""

import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

from ..utils.config import ConfigManager, ExperimentConfig
from ..utils.errors import ConfigError
from ..utils.files import atomic_write_text
from .metrics import METRIC_NAMES, RunMetrics
from .simulation import run_many

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["axis", "value", "strategy", "channels", "mode", "replications"] + [
    f"{stat}_{name}" for name in METRIC_NAMES for stat in ("mean", "sd")
]

# Axes that would break the seed policy or the run itself
FIXED_FIELDS = {"seed", "replications", "workers"}


@dataclass(frozen=True)
class SweepRow:
    """One sweep point."""
    axis: str
    value: Any
    config: ExperimentConfig
    metrics: RunMetrics

    @property
    def series(self) -> str:
        """Series label: strategy and channel count, e.g. ``surf-15``."""
        return f"{self.config.strategy.value}-{self.config.channels}"


def check_axis(axis: str) -> None:
    """
    Raises:
        ConfigError: axis is not a sweepable config field
    """
    if axis not in ExperimentConfig.model_fields or axis in FIXED_FIELDS:
        raise ConfigError("axis", f"unknown sweep axis {axis!r}")


def parse_values(text: str) -> List[str]:
    """Expand ``1:10`` (inclusive range) or ``a,b,c`` into raw values."""
    text = text.strip()
    if ":" in text:
        low, _, high = text.partition(":")
        try:
            start, stop = int(low), int(high)
        except ValueError:
            raise ConfigError("values", f"range {text!r} needs integer bounds") from None
        if stop < start:
            raise ConfigError("values", f"empty range {text!r}")
        return [str(v) for v in range(start, stop + 1)]
    values = [part.strip() for part in text.split(",") if part.strip()]
    if not values:
        raise ConfigError("values", "no sweep values given")
    return values


def sweep(base: ExperimentConfig, axis: str, values: Sequence[Any]) -> List[SweepRow]:
    """
    Run one experiment per axis value; every other field, the seed included, stays at base.

    Raises:
        ConfigError: Unknown axis or a value the field rejects
    """
    check_axis(axis)
    return _run_points(axis, [ConfigManager.with_updates(base, {axis: value}) for value in values])


def figure_sweep(base: ExperimentConfig, axis: str, values: Sequence[Any],
                 strategies: Sequence[str] = ("surf", "rd"),
                 channel_counts: Sequence[int] = (5, 15)) -> List[SweepRow]:
    """Sweep the axis once per strategy x channel-count series."""
    check_axis(axis)
    configs: List[ExperimentConfig] = []
    for strategy in strategies:
        for channels in channel_counts:
            series = ConfigManager.with_updates(base, {"strategy": strategy, "channels": channels})
            configs.extend(ConfigManager.with_updates(series, {axis: value}) for value in values)
    return _run_points(axis, configs)


def _run_points(axis: str, configs: List[ExperimentConfig]) -> List[SweepRow]:
    for config in configs:
        logger.info(f"sweep {axis}={getattr(config, axis)} ({config.strategy.value}, {config.channels} channels)")
    return [SweepRow(axis, getattr(config, axis), config, metrics)
            for config, metrics in zip(configs, run_many(configs))]


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6f}"
    return str(getattr(value, "value", value))


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        line = [row.axis, row.value, row.config.strategy, row.config.channels, row.config.mode,
                row.config.replications]
        for name in METRIC_NAMES:
            line.extend([row.metrics.mean[name], row.metrics.sd[name]])
        writer.writerow([_format(v) for v in line])
    return buffer.getvalue()


def write_csv(rows: Sequence[SweepRow], path: Union[str, Path]) -> Path:
    """Write sweep rows as CSV (atomic)."""
    target = atomic_write_text(path, rows_to_csv(rows))
    logger.info(f"Wrote {len(rows)} rows to {target}")
    return target


def rows_to_gnuplot(rows: Sequence[SweepRow], metric: str = "delivery_ratio_cmr_neighbor") -> str:
    """
    Whitespace-separated table: the axis value, then one (mean, sd) column pair per series.
    """
    if metric not in METRIC_NAMES:
        raise ConfigError("metric", f"unknown metric {metric!r}")
    series: List[str] = []
    table = {}
    values: List[Any] = []
    for row in rows:
        if row.series not in series:
            series.append(row.series)
        if row.value not in values:
            values.append(row.value)
        table[(row.series, row.value)] = row.metrics
    axis = rows[0].axis if rows else "value"
    header = [axis] + [f"{s}_mean {s}_sd" for s in series]
    lines = [f"# {metric}", "# " + " ".join(header)]
    for value in values:
        cells = [_format(value)]
        for s in series:
            metrics: Optional[RunMetrics] = table.get((s, value))
            if metrics is None:
                cells.extend(["nan", "nan"])
            else:
                cells.extend([_format(metrics.mean[metric]), _format(metrics.sd[metric])])
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def write_gnuplot(rows: Sequence[SweepRow], path: Union[str, Path],
                  metric: str = "delivery_ratio_cmr_neighbor") -> Path:
    """Write the figure data file (atomic)."""
    return atomic_write_text(path, rows_to_gnuplot(rows, metric))
