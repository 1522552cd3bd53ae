"""Version information for Dyson Lab."""

__version__ = "1.0.0"
