"""
Core functionality for Dyson Lab.

This package contains the components every other part of the laboratory
depends on: configuration, exceptions and constants.
"""

from .config import Config, config, get_config, load_config
from .exceptions import (
    CheckFailure,
    ConfigError,
    DysonLabException,
    ValidationError,
)

__all__ = [
    "Config",
    "config",
    "get_config",
    "load_config",
    "CheckFailure",
    "ConfigError",
    "DysonLabException",
    "ValidationError",
]
