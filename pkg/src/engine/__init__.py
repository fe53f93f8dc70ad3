"""Simulation loop, metrics and sweeps."""

from .metrics import METRIC_NAMES, ReplicationMetrics, RunMetrics, delivery_ratio_cmr_neighbor
from .simulation import ReplicationResult, Simulation, run, run_replication
from .sweep import SweepRow, figure_sweep, parse_values, sweep, write_csv, write_gnuplot

__all__ = [
    "METRIC_NAMES",
    "ReplicationMetrics",
    "ReplicationResult",
    "RunMetrics",
    "Simulation",
    "SweepRow",
    "delivery_ratio_cmr_neighbor",
    "figure_sweep",
    "parse_values",
    "run",
    "run_replication",
    "sweep",
    "write_csv",
    "write_gnuplot",
]
