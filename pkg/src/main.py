"""Command-line entry point: ``python -m src.main {run,sweep,validate,replay}``."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

from pydantic import ValidationError

from .engine.metrics import RunMetrics
from .engine.simulation import run, run_replication
from .engine.sweep import SweepRow, figure_sweep, parse_values, sweep, write_csv, write_gnuplot
from .topology.deploy import dump_deployment
from .tracking.replay import replay_files
from .utils.config import ConfigManager, EnvironmentSettings, ExperimentConfig, config_error_from_validation, dump_config
from .utils.errors import ConfigError, LogParseError, SimulationError
from .utils.files import atomic_write_text
from .utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VIOLATIONS = 3

# flag dest -> config field
OVERRIDES = {
    "channels": "channels",
    "strategy": "strategy",
    "cmr_count": "cmr_count",
    "seed": "seed",
    "replications": "replications",
    "ttl": "ttl_init",
    "mode": "mode",
    "workers": "workers",
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors raise ConfigError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError("arguments", message)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value experiment file")
    parser.add_argument("--channels", help="number of channels")
    parser.add_argument("--strategy", help="surf or rd")
    parser.add_argument("--cmr-count", dest="cmr_count", help="number of CMRs")
    parser.add_argument("--seed", help="master seed")
    parser.add_argument("--replications", help="replications per experiment")
    parser.add_argument("--ttl", help="initial TTL of injected messages")
    parser.add_argument("--mode", help="multi_hop or single_hop")
    parser.add_argument("--workers", help="parallel replication processes")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="crdrn",
        description="Cognitive radio disaster-response network simulator",
    )
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: CRDRN_LOG_LEVEL or INFO)")
    parser.add_argument("--log-file", help="also write logs to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="run one experiment and write a CSV row")
    _add_experiment_flags(run_cmd)
    run_cmd.add_argument("--out", default="results/run.csv", help="CSV output path")
    run_cmd.add_argument("--events", help="directory for replication 0's deployment and event log")

    sweep_cmd = commands.add_parser("sweep", help="sweep one config field")
    _add_experiment_flags(sweep_cmd)
    sweep_cmd.add_argument("--axis", default="cmr_count", help="config field to vary")
    sweep_cmd.add_argument("--values", default="1:10", help="inclusive range a:b or comma list")
    sweep_cmd.add_argument("--figure", action="store_true",
                           help="one series per strategy x channel count (surf/rd x 5/15)")
    sweep_cmd.add_argument("--out", default="results/sweep.csv", help="CSV output path (.dat written alongside)")

    validate_cmd = commands.add_parser("validate", help="check a config and print its canonical form")
    _add_experiment_flags(validate_cmd)

    replay_cmd = commands.add_parser("replay", help="verify an event log against its deployment")
    replay_cmd.add_argument("--deployment", required=True, help="deployment file written by run --events")
    replay_cmd.add_argument("--log", required=True, help="event log written by run --events")
    return parser


def load_config(args: argparse.Namespace, env: Optional[EnvironmentSettings] = None) -> ExperimentConfig:
    """File values, then flag overrides, then CRDRN_SEED."""
    overrides: Dict[str, Any] = {
        field: getattr(args, dest) for dest, field in OVERRIDES.items() if getattr(args, dest, None) is not None
    }
    return ConfigManager(args.config, env=env).load(overrides)


def _run(args: argparse.Namespace, config: ExperimentConfig) -> int:
    metrics: RunMetrics = run(config)
    row = SweepRow(axis="none", value="-", config=config, metrics=metrics)
    write_csv([row], args.out)
    if args.events:
        result = run_replication(config, 0, with_log=True)
        folder = Path(args.events)
        atomic_write_text(folder / "deployment.txt", dump_deployment(result.deployment))
        result.log.save(folder / "events.tsv")
    print(
        f"delivery_ratio_cmr_neighbor {metrics.delivery_ratio_cmr_neighbor:.6f} "
        f"delivery_ratio_cmr {metrics.delivery_ratio_cmr:.6f} "
        f"delivery_ratio_portal {metrics.delivery_ratio_portal:.6f}"
    )
    return EXIT_OK


def _sweep(args: argparse.Namespace, config: ExperimentConfig) -> int:
    values = parse_values(args.values)
    if args.figure:
        rows = figure_sweep(config, args.axis, values)
    else:
        rows = sweep(config, args.axis, values)
    out = Path(args.out)
    write_csv(rows, out)
    write_gnuplot(rows, out.with_suffix(".dat"))
    print(f"{len(rows)} rows written to {out}")
    return EXIT_OK


def _replay(args: argparse.Namespace) -> int:
    report = replay_files(args.deployment, args.log)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        0 on success, 1 on a config error, 2 on an I/O or parse error,
        3 when replay finds violations
    """
    try:
        args = build_parser().parse_args(argv)
        env = EnvironmentSettings()
        setup_logging(level=args.log_level or env.log_level, log_file=args.log_file)
        if args.command == "replay":
            return _replay(args)
        config = load_config(args, env)
        if args.command == "validate":
            sys.stdout.write(dump_config(config))
            return EXIT_OK
        if args.command == "run":
            return _run(args, config)
        return _sweep(args, config)
    except ValidationError as e:
        error = config_error_from_validation(e)
        logger.error(f"config error: {error}")
        print(f"error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        logger.error(f"config error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except LogParseError as e:
        logger.error(f"parse error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as e:
        logger.error(f"simulation error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
