"""
Dyson Lab - configuration-space optimal transport at desk scale.

Matching distances on finite configurations, finite-k bulk and edge Dyson
dynamics, sine and Airy determinantal point processes, and numerical
verification of the gradient-flow inequalities those systems satisfy.
"""

from .__version__ import __version__

__author__ = "Dyson Lab Team"
__license__ = "GPL-3.0-or-later"

# Core exports
from .core.config import Config, get_config
from .core.exceptions import DysonLabException

__all__ = [
    "__version__",
    "__author__",
    "__license__",
    "Config",
    "get_config",
    "DysonLabException",
]
