"""
Verification harness: inequality checks, rigidity diagnostics and the
closed-form and Monte Carlo suites.
"""

from .reports import CheckReport, publish, report, sweep
from .suites import ALL, CLOSED_FORM, MONTE_CARLO, SUITES, SuiteSizes, run_suite

__all__ = [
    "CheckReport",
    "publish",
    "report",
    "sweep",
    "ALL",
    "CLOSED_FORM",
    "MONTE_CARLO",
    "SUITES",
    "SuiteSizes",
    "run_suite",
]
