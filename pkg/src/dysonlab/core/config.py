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
Configuration management for Dyson Lab.

This module loads the numerical defaults used across the laboratory:
quadrature sizes, integrator step controls, MCMC settings, JKO solver
limits and harness tolerances. Settings come from JSON files per
environment (development, testing, production), an optional local
override file, and DYSON_LAB_* environment variables.
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from .constants import (
    DEFAULT_CONFIG_DIR,
    ENV_DEVELOPMENT,
    ENV_PRODUCTION,
    ENV_TESTING,
    ENV_VAR_ENVIRONMENT,
    ENV_VAR_THREADS,
)
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

# Default configuration structure
DEFAULT_CONFIG: Dict[str, Any] = {
    "numerics": {
        "quadrature_nodes": 80,
        "eigenvalue_slack": 1e-8,
    },
    "dynamics": {
        "dt": 1e-3,
        "max_substeps": 40,
        "gap_factor": 10.0,
        "speed": "full",
        "literal_drift": False,
    },
    "sampling": {
        "mcmc_steps": 2000,
        "mcmc_step_size": 0.05,
        "min_acceptance": 0.05,
    },
    "jko": {
        "grid": 512,
        "max_newton": 200,
        "gradient_tol": 1e-10,
    },
    "harness": {
        "standard_errors": 3.0,
        "closed_form_tolerance": 1e-8,
        "quadrature_order": 80,
        "bias_floor": 0.05,
    },
    "threads": None,
    "encoding": "utf-8",
    "log_level": "INFO",
}


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value <= 0:
        raise ValueError(f"expected a positive integer, got {raw}")
    return value


def _positive_float(raw: str) -> float:
    value = float(raw)
    if not value > 0:
        raise ValueError(f"expected a positive number, got {raw}")
    return value


# Environment variable -> (config key path, parser)
ENVIRONMENT_OVERRIDES: Dict[str, tuple[str, Callable[[str], Any]]] = {
    ENV_VAR_THREADS: ("threads", _positive_int),
    "DYSON_LAB_LOG_LEVEL": ("log_level", str.upper),
    "DYSON_LAB_ENCODING": ("encoding", str),
    "DYSON_LAB_QUADRATURE_NODES": ("numerics.quadrature_nodes", _positive_int),
    "DYSON_LAB_DT": ("dynamics.dt", _positive_float),
    "DYSON_LAB_JKO_GRID": ("jko.grid", _positive_int),
}


class Config:
    """Configuration manager for Dyson Lab.

    Loads configuration from JSON files and environment variables.

    Environment files, searched in the working directory and in config/:
    - config.development.json: Development settings
    - config.testing.json: Testing settings
    - config.production.json: Production settings
    - config.local.json: Local overrides (not in version control)

    Environment variables take precedence over file settings.
    """

    def __init__(self) -> None:
        self._config: Dict[str, Any] = copy.deepcopy(DEFAULT_CONFIG)
        self._loaded_env: Optional[str] = None

    def load(self, environment: Optional[str] = None) -> None:
        """Load configuration for the specified environment.

        Args:
            environment: Environment name (development/testing/production).
                        If None, uses DYSON_LAB_ENV or defaults to 'development'

        Raises:
            ConfigError: If a file is not valid JSON or an override is malformed
        """
        env = environment or os.environ.get(ENV_VAR_ENVIRONMENT, ENV_DEVELOPMENT)
        self._config = copy.deepcopy(DEFAULT_CONFIG)
        self._loaded_env = env

        for file_name in (f"config.{env}.json", "config.local.json"):
            for candidate in (Path(file_name), Path(DEFAULT_CONFIG_DIR) / file_name):
                if candidate.is_file():
                    self.merge_file(candidate)
                    break

        self._load_from_environment()

    def merge_file(self, path: Path) -> None:
        """Merge a JSON settings file into the current configuration."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                file_config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read configuration file {path}: {e}")
        if not isinstance(file_config, dict):
            raise ConfigError(f"Configuration file {path} must hold a JSON object")
        self._merge_config(file_config)

    def _merge_config(self, new_config: Dict[str, Any]) -> None:
        """Merge new configuration into existing config."""
        def merge_dict(base: Dict[str, Any], new: Dict[str, Any]) -> Dict[str, Any]:
            result = base.copy()
            for key, value in new.items():
                if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                    result[key] = merge_dict(result[key], value)
                else:
                    result[key] = value
            return result

        self._config = merge_dict(self._config, new_config)

    def _load_from_environment(self) -> None:
        """Load configuration overrides from environment variables."""
        for variable, (key, parse) in ENVIRONMENT_OVERRIDES.items():
            if variable not in os.environ:
                continue
            raw = os.environ[variable]
            try:
                self.set(key, parse(raw))
            except ValueError as e:
                raise ConfigError(f"Invalid value for {variable}: {raw} ({e})")

    def set(self, key: str, value: Any) -> None:
        """Set a configuration value by dot-notation key path."""
        keys = key.split(".")
        node = self._config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key path.

        Args:
            key: Configuration key (supports dot notation like 'dynamics.dt')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        try:
            value = self._config
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration as a dictionary."""
        return copy.deepcopy(self._config)

    def get_environment(self) -> Optional[str]:
        """Get the currently loaded environment name."""
        return self._loaded_env

    def is_testing(self) -> bool:
        """Check if running in testing mode."""
        return self._loaded_env == ENV_TESTING

    def is_production(self) -> bool:
        """Check if running in production mode."""
        return self._loaded_env == ENV_PRODUCTION


# Global configuration instance
config = Config()


# Convenience functions
def get_config(key: Optional[str] = None, default: Any = None) -> Any:
    """Get configuration value. If key is None, returns all config."""
    if key is None:
        return config.get_all()
    return config.get(key, default)


def load_config(environment: Optional[str] = None) -> None:
    """Load configuration for specified environment."""
    config.load(environment)


def get_environment() -> Optional[str]:
    """Get current environment."""
    return config.get_environment()


# Auto-load configuration on import
if not config.get_environment():
    try:
        config.load()
    except ConfigError as e:
        # The CLI reloads and reports malformed overrides with exit status 2.
        logger.warning(f"Ignoring configuration overrides: {e}")
