#!/usr/bin/env python3
#
# This file is part of Dyson Lab.
#
# Dyson Lab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# Dyson Lab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with Dyson Lab.  If not, see <https://www.gnu.org/licenses/>.
#
"""
Main entry point for Dyson Lab.

This module provides the command line interface: one subcommand per
experiment, an optional JSON experiment file, result files in CSV or JSON,
and a single machine-readable summary line on stdout.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dysonlab.__version__ import __version__
from dysonlab.cli.commands import COMMANDS, CommandResult, ExperimentConfig, load_document
from dysonlab.cli.commands.schema import BOOL, FLOAT, FLOATS, FORMATS, INT, Parameter
from dysonlab.core.config import config, load_config
from dysonlab.core.constants import (
    DEFAULT_LOG_LEVEL,
    EXIT_CHECK_FAILURE,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
)
from dysonlab.core.exceptions import CheckFailure, ConfigError, DysonLabException, SizeMismatch, ValidationError
from dysonlab.utils.helpers import get_run_stats, write_csv, write_json

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def setup_logging(log_level: str) -> None:
    """Setup logging configuration."""
    level = getattr(logging, log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT, force=True)


def _add_parameter(parser: argparse.ArgumentParser, name: str, parameter: Parameter) -> None:
    if parameter.positional:
        parser.add_argument(
            name, nargs="?", default=argparse.SUPPRESS, metavar=parameter.metavar or name, help=parameter.help
        )
        return
    flag = "--" + name.replace("_", "-")
    options: Dict[str, Any] = {"dest": name, "default": argparse.SUPPRESS, "help": parameter.help}
    if parameter.kind == BOOL:
        options["action"] = argparse.BooleanOptionalAction
    elif parameter.kind == FLOATS:
        options.update(nargs="+", type=float)
    elif parameter.kind == INT:
        options["type"] = int
    elif parameter.kind == FLOAT:
        options["type"] = float
    elif parameter.choices is not None:
        options["choices"] = parameter.choices
    parser.add_argument(flag, **options)


def build_parser() -> argparse.ArgumentParser:
    """The top-level parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="dyson-lab",
        description="Dyson Lab - matching distances, Dyson dynamics and gradient-flow checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s verify --suite closed-form --seed 7      # Deterministic inequality suite
  %(prog)s verify --suite monte-carlo --seed 7      # Simulated ensembles (minutes)
  %(prog)s sample --model bulk --k 8 --n 100 --seed 1 --out bulk.csv
  %(prog)s dist --ground partial --radius 2 a.json b.json
  %(prog)s fredholm --kernel sine --radius 2 --t 1.4142135623730951
  %(prog)s --config config/experiment.verify.json   # Experiment file
  %(prog)s --log-level DEBUG jko --tau 0.05         # Solver diagnostics

Environment Variables:
  DYSON_LAB_ENV              - Environment name (development/testing/production)
  DYSON_LAB_THREADS          - Worker thread cap
  DYSON_LAB_LOG_LEVEL        - Default log level
  DYSON_LAB_ENCODING         - Encoding of result files
  DYSON_LAB_QUADRATURE_NODES - Nyström nodes for Fredholm determinants
  DYSON_LAB_DT               - Base step of the SDE integrator
  DYSON_LAB_JKO_GRID         - Quantile grid size of the JKO solver

Exit status: 0 when every embedded check passes, 1 on a failed check,
2 on a configuration or input error.
        """,
    )
    parser.add_argument("--version", action="version", version=f"Dyson Lab {__version__}")
    parser.add_argument("--config", help="Path to a JSON experiment file")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Logging level (default: INFO)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Random seed")
    common.add_argument(
        "--output", "--out", dest="output", default=argparse.SUPPRESS, help="Result file (default: <command>.<format>)"
    )
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="Result format")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for spec in COMMANDS.values():
        sub = subparsers.add_parser(spec.name, parents=[common], help=spec.help, description=spec.help)
        for name, parameter in spec.parameters.items():
            _add_parameter(sub, name, parameter)
    return parser


def write_result(experiment: ExperimentConfig, result: CommandResult) -> Path:
    """Write the result file in the experiment's format."""
    path = experiment.output_path
    path.parent.mkdir(parents=True, exist_ok=True)
    if experiment.format == "csv":
        return write_csv(path, result.header, result.rows, experiment.seed)
    payload = result.payload
    if payload is None:
        payload = [dict(zip(result.header, row)) for row in result.rows]
    return write_json(path, payload)


def emit_summary(command: Optional[str], status: str, exit_code: int, **extra: Any) -> None:
    """Print the one-line JSON summary on stdout."""
    stats = get_run_stats().get_stats()
    line = {
        "command": command,
        "status": status,
        "exit_code": exit_code,
        "version": __version__,
        "checks_run": stats["checks_run"],
        "checks_passed": stats["checks_passed"],
        "checks_failed": stats["checks_failed"],
        "artifacts": stats["artifacts"],
        "elapsed_seconds": round(stats["elapsed_seconds"], 3),
        **extra,
    }
    print(json.dumps(line, sort_keys=True, default=str), flush=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one experiment and return its exit status."""
    get_run_stats().reset()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            return EXIT_OK
        emit_summary(None, "config_error", EXIT_CONFIG_ERROR, error="invalid command line")
        return EXIT_CONFIG_ERROR

    setup_logging(args.log_level or str(config.get("log_level", DEFAULT_LOG_LEVEL)))
    command: Optional[str] = args.command
    seed: Optional[int] = None
    try:
        load_config()
        if args.log_level is None:
            setup_logging(str(config.get("log_level", DEFAULT_LOG_LEVEL)))
        document = load_document(Path(args.config)) if args.config else {}
        command = command or document.get("command")
        if command is None:
            raise ConfigError("No command given on the command line or in the experiment file")
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command '{command}'")
        spec = COMMANDS[command]
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "log_level")}
        experiment = spec.build(document, overrides)
        seed = experiment.seed

        logger.info(f"🚀 Dyson Lab {__version__}: {command} (seed {seed})")
        result = spec.handler(experiment)
        path = write_result(experiment, result)
        logger.info(f"💾 Wrote {path}")
    except (ConfigError, ValidationError, SizeMismatch) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        emit_summary(command, "config_error", EXIT_CONFIG_ERROR, seed=seed, error=str(e))
        return EXIT_CONFIG_ERROR
    except CheckFailure as e:
        logger.error(f"❌ Check failed: {e}")
        emit_summary(command, "check_failure", EXIT_CHECK_FAILURE, seed=seed, error=str(e))
        return EXIT_CHECK_FAILURE
    except DysonLabException as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        emit_summary(command, "error", EXIT_CHECK_FAILURE, seed=seed, error=str(e))
        return EXIT_CHECK_FAILURE

    exit_code = EXIT_OK if result.passed else EXIT_CHECK_FAILURE
    status = "ok" if result.passed else "check_failure"
    emit_summary(command, status, exit_code, seed=seed, **result.summary)
    return exit_code


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point."""
    try:
        code = run(argv)
    except KeyboardInterrupt:
        logger.info("🛑 Interrupted")
        code = EXIT_CHECK_FAILURE
    sys.exit(code)


if __name__ == "__main__":
    main()
