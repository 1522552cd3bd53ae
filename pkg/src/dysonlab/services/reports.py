"""
Check reports produced by the verification harness.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

from dysonlab.core.config import config
from dysonlab.core.constants import STANDARD_ERRORS
from dysonlab.utils.helpers import get_run_stats

logger = logging.getLogger(__name__)


def standard_errors() -> float:
    return float(config.get("harness.standard_errors", STANDARD_ERRORS))


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one inequality check.

    A check passes when residual >= -(tolerance + n·statistical_error),
    n being the configured number of standard errors (3 by default).
    Closed-form checks carry a statistical error of 0.
    """

    name: str
    residual: float
    tolerance: float
    statistical_error: float = 0.0
    parameters: Dict[str, Any] = field(default_factory=dict)
    label: str = ""

    @property
    def threshold(self) -> float:
        return -(self.tolerance + standard_errors() * self.statistical_error)

    @property
    def passed(self) -> bool:
        return not math.isnan(self.residual) and self.residual >= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "label": self.label,
            "parameters": self.parameters,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "statistical_error": self.statistical_error,
            "pass": self.passed,
        }


def report(
    name: str,
    residual: float,
    tolerance: float,
    statistical_error: float = 0.0,
    parameters: Optional[Dict[str, Any]] = None,
    label: str = "",
) -> CheckReport:
    """Build a CheckReport and log it at DEBUG."""
    result = CheckReport(name, float(residual), float(tolerance), float(statistical_error), dict(parameters or {}), label)
    logger.debug(f"{name}: residual {result.residual:.3e}, pass={result.passed}")
    return result


def margin(result: CheckReport) -> float:
    return result.residual - result.threshold


def sweep(name: str, results: Sequence[CheckReport], parameters: Optional[Dict[str, Any]] = None) -> CheckReport:
    """Aggregate a parameter sweep into the report of its worst case."""
    if not results:
        raise ValueError(f"Sweep '{name}' has no results")
    worst = min(results, key=margin)
    return CheckReport(
        name,
        worst.residual,
        worst.tolerance,
        worst.statistical_error,
        {**(parameters or {}), "cases": len(results), "failures": sum(not r.passed for r in results), "worst": worst.parameters},
        worst.label,
    )


def publish(result: CheckReport) -> CheckReport:
    """Log one INFO line for the check and record it in the run statistics."""
    glyph = "✅" if result.passed else "❌"
    suffix = f" [{result.label}]" if result.label else ""
    logger.info(f"{glyph} {result.name}{suffix}: residual {result.residual:.3e} (threshold {result.threshold:.3e})")
    get_run_stats().record_check(result.name, result.passed)
    return result
