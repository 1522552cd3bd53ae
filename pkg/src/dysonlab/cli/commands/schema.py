"""
Experiment configuration for the command line.

An experiment is one subcommand with a typed parameter table, a seed, an
output path and a format. It can be given as flags, as a JSON file passed
with --config, or both; flags override file values. A file looks like

    {
      "command": "verify",
      "seed": 7,
      "format": "json",
      "output": "verify.json",
      "parameters": {"suite": "closed-form"}
    }
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from dysonlab.core.exceptions import ConfigError
from dysonlab.services.reports import CheckReport

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
TOP_LEVEL_KEYS = ("command", "seed", "output", "format", "parameters")

INT = "int"
FLOAT = "float"
STR = "str"
BOOL = "bool"
FLOATS = "floats"
PATH = "path"


@dataclass(frozen=True)
class Parameter:
    """One typed entry of a subcommand's parameter table."""

    kind: str
    default: Any = None
    help: str = ""
    choices: Optional[Tuple[str, ...]] = None
    required: bool = False
    positional: bool = False
    metavar: Optional[str] = None

    def coerce(self, name: str, value: Any) -> Any:
        """Validate a raw value from a file or a flag.

        Raises:
            ConfigError: If the value has the wrong type or is not an allowed choice
        """
        if value is None:
            if self.required:
                raise ConfigError(f"Parameter '{name}' is required")
            return None
        if self.kind == INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"Parameter '{name}' must be an integer, got {value!r}")
            return value
        if self.kind == FLOAT:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"Parameter '{name}' must be a number, got {value!r}")
            if math.isnan(value):
                raise ConfigError(f"Parameter '{name}' is NaN")
            return float(value)
        if self.kind == BOOL:
            if not isinstance(value, bool):
                raise ConfigError(f"Parameter '{name}' must be true or false, got {value!r}")
            return value
        if self.kind == FLOATS:
            if not isinstance(value, (list, tuple)) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                raise ConfigError(f"Parameter '{name}' must be a list of numbers, got {value!r}")
            return [float(v) for v in value]
        if not isinstance(value, str):
            raise ConfigError(f"Parameter '{name}' must be a string, got {value!r}")
        if self.choices is not None and value not in self.choices:
            raise ConfigError(f"Parameter '{name}' must be one of {', '.join(self.choices)}, got '{value}'")
        return Path(value) if self.kind == PATH else value


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: command, parameters, seed and output."""

    command: str
    parameters: Dict[str, Any]
    seed: Optional[int] = None
    output: Optional[Path] = None
    format: str = "csv"

    @property
    def output_path(self) -> Path:
        return self.output if self.output is not None else Path(f"{self.command}.{self.format}")

    def __getitem__(self, key: str) -> Any:
        return self.parameters[key]


@dataclass
class CommandResult:
    """What a subcommand hands back to the runner.

    rows/header feed the CSV writer; payload, when set, is the JSON
    document (otherwise rows are written as JSON records).
    """

    header: Sequence[str] = ()
    rows: List[Sequence[Any]] = field(default_factory=list)
    payload: Any = None
    checks: List[CheckReport] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


Handler = Callable[[ExperimentConfig], CommandResult]


@dataclass(frozen=True)
class CommandSpec:
    """A subcommand: its parameter schema and its handler."""

    name: str
    help: str
    parameters: Dict[str, Parameter]
    handler: Handler
    stochastic: bool = True
    default_format: str = "csv"

    def build(self, document: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
        """Merge a config document with flag overrides and validate the result.

        Raises:
            ConfigError: On unknown keys, ill-typed values, a missing seed
                for a stochastic command or a mismatched command name
        """
        document = dict(document or {})
        overrides = dict(overrides or {})
        unknown = sorted(set(document) - set(TOP_LEVEL_KEYS))
        if unknown:
            raise ConfigError(f"Unknown experiment keys: {', '.join(unknown)}")
        named = document.get("command", self.name)
        if named != self.name:
            raise ConfigError(f"Config file is for '{named}', not '{self.name}'")

        file_parameters = document.get("parameters", {})
        if not isinstance(file_parameters, dict):
            raise ConfigError("'parameters' must be a JSON object")
        raw = {**file_parameters, **{k: v for k, v in overrides.items() if k in self.parameters}}
        unknown = sorted(set(raw) - set(self.parameters))
        if unknown:
            raise ConfigError(f"Unknown parameters for '{self.name}': {', '.join(unknown)}")
        parameters = {
            name: parameter.coerce(name, raw.get(name, parameter.default))
            for name, parameter in self.parameters.items()
        }

        seed = overrides.get("seed", document.get("seed"))
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
            raise ConfigError(f"Seed must be a nonnegative integer, got {seed!r}")
        if seed is None and self.stochastic:
            raise ConfigError(f"'{self.name}' is stochastic and needs a seed (--seed)")

        fmt = overrides.get("format", document.get("format", self.default_format))
        if fmt not in FORMATS:
            raise ConfigError(f"Format must be csv or json, got {fmt!r}")
        output = overrides.get("output", document.get("output"))
        if output is not None and not isinstance(output, (str, Path)):
            raise ConfigError(f"Output must be a path, got {output!r}")

        return ExperimentConfig(self.name, parameters, seed, Path(output) if output else None, fmt)


def load_document(path: Path) -> Dict[str, Any]:
    """Read an experiment file.

    Raises:
        ConfigError: If the file cannot be read or does not hold a JSON object
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read experiment file {path}: {e}")
    if not isinstance(document, dict):
        raise ConfigError(f"Experiment file {path} must hold a JSON object")
    logger.debug(f"Loaded experiment file {path}")
    return document
