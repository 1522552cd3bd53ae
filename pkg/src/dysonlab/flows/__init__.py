"""
Gradient-flow calculus for the one-particle flow: Gaussian closed forms and
the quantile JKO scheme.
"""

from .functionals import (
    STANDARD,
    GaussianLaw,
    energy_identity_residual,
    entropy_rate,
    gaussian_entropy,
    gaussian_fisher,
    gaussian_fisher_quarter,
    gaussian_w2,
    metric_slope,
    numerical_slope,
    ou_evolve,
    w2_squared_rate,
)
from .jko import QuantileFunction, entropy_q, jko_step, jko_trajectory, quantile_of_gaussian, w2_q

__all__ = [
    "STANDARD",
    "GaussianLaw",
    "energy_identity_residual",
    "entropy_rate",
    "gaussian_entropy",
    "gaussian_fisher",
    "gaussian_fisher_quarter",
    "gaussian_w2",
    "metric_slope",
    "numerical_slope",
    "ou_evolve",
    "w2_squared_rate",
    "QuantileFunction",
    "entropy_q",
    "jko_step",
    "jko_trajectory",
    "quantile_of_gaussian",
    "w2_q",
]
