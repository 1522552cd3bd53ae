"""
Subcommand registry.
"""

from typing import Dict

from . import ensembles, flows, geometry, verification
from .schema import CommandResult, CommandSpec, ExperimentConfig, Parameter, load_document

COMMANDS: Dict[str, CommandSpec] = {
    spec.name: spec
    for spec in (*ensembles.COMMANDS, *geometry.COMMANDS, *flows.COMMANDS, *verification.COMMANDS)
}

__all__ = ["COMMANDS", "CommandResult", "CommandSpec", "ExperimentConfig", "Parameter", "load_document"]
