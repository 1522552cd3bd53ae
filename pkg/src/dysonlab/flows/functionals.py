"""
Entropy, Fisher information and Wasserstein calculus for Gaussian laws.

For a single particle in the bulk model H = x²/2, the invariant law is
N(0, 1) and the dynamics is an Ornstein-Uhlenbeck process, so Gaussian
laws stay Gaussian and every quantity below has a closed form. In the
coordinates (m, s = sqrt(v)) the W2 distance between Gaussians is
Euclidean, which makes slopes and rates elementary.

Fisher information is exposed in two normalizations: the dissipation
F_def = ∫|∇log(dν/dμ)|² dν, with dH/dt = -F_def along the Full-speed flow,
and the quarter normalization F_def/4, under which the HWI inequality
takes the form H(ν0) ≤ H(ν1) + 2 W2 F^(1/2).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from dysonlab.core.config import config
from dysonlab.core.constants import GAUSS_HERMITE_ORDER
from dysonlab.core.exceptions import CheckFailure, ConfigError, ValidationError
from dysonlab.ensembles.dynamics import FULL, HALF

logger = logging.getLogger(__name__)

# Slope identity tolerance.
SLOPE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GaussianLaw:
    """N(mean, variance) on the line."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValidationError(f"Gaussian parameters must be finite, got ({self.mean}, {self.variance})")
        if not self.variance > 0:
            raise ValidationError(f"Gaussian variance must be positive, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @classmethod
    def from_std(cls, mean: float, std: float) -> "GaussianLaw":
        return cls(mean, std * std)

    def density(self, x: np.ndarray) -> np.ndarray:
        values = np.asarray(x, dtype=float)
        return np.exp(-((values - self.mean) ** 2) / (2.0 * self.variance)) / math.sqrt(2.0 * math.pi * self.variance)


STANDARD = GaussianLaw(0.0, 1.0)


def _rate(speed: str) -> float:
    if speed == FULL:
        return 1.0
    if speed == HALF:
        return 0.5
    raise ConfigError(f"Unknown speed '{speed}' (expected full or half)")


def ou_evolve(g: GaussianLaw, t: float, speed: str = FULL) -> GaussianLaw:
    """Law at time t of the k=1 bulk flow started from g.

    Full: (m e^(-t), 1 + (v - 1) e^(-2t)). Half runs the same curve at half
    the speed.
    """
    if t < 0:
        raise ValidationError(f"Time must be nonnegative, got {t}")
    if t == 0:
        return g
    s = _rate(speed) * t
    return GaussianLaw(g.mean * math.exp(-s), 1.0 + (g.variance - 1.0) * math.exp(-2.0 * s))


def gaussian_w2(g1: GaussianLaw, g2: GaussianLaw) -> float:
    return math.hypot(g1.mean - g2.mean, g1.std - g2.std)


def gaussian_entropy(nu: GaussianLaw, mu: GaussianLaw = STANDARD) -> float:
    """Relative entropy H_μ(ν) = ∫ log(dν/dμ) dν."""
    ratio = nu.variance / mu.variance
    return 0.5 * ((nu.mean - mu.mean) ** 2 / mu.variance + ratio - 1.0 - math.log(ratio))


def gaussian_fisher(nu: GaussianLaw, mu: GaussianLaw = STANDARD) -> float:
    """F_def(ν) = ∫ |d/dx log(dν/dμ)|² dν.

    The score is affine, a·x + b with a = 1/v_μ - 1/v_ν, hence
    F_def = a² v_ν + (m_ν - m_μ)² / v_μ².
    """
    a = 1.0 / mu.variance - 1.0 / nu.variance
    return a * a * nu.variance + (nu.mean - mu.mean) ** 2 / mu.variance**2


def gaussian_fisher_quarter(nu: GaussianLaw, mu: GaussianLaw = STANDARD) -> float:
    """Fisher information in the quarter normalization, F_def / 4."""
    return 0.25 * gaussian_fisher(nu, mu)


def gaussian_fisher_quadrature(nu: GaussianLaw, mu: GaussianLaw = STANDARD, order: Optional[int] = None) -> float:
    """F_def by Gauss-Hermite quadrature of the defining integral."""
    n = int(order or config.get("harness.quadrature_order", GAUSS_HERMITE_ORDER))
    nodes, weights = hermegauss(n)
    x = nu.mean + nu.std * nodes
    score = -(x - nu.mean) / nu.variance + (x - mu.mean) / mu.variance
    return float(np.sum(weights * score**2) / math.sqrt(2.0 * math.pi))


def entropy_rate(g: GaussianLaw, speed: str = FULL) -> float:
    """d/dt H(ν_t | N(0,1)) at ν_0 = g."""
    c = _rate(speed)
    dm = -c * g.mean
    dv = -2.0 * c * (g.variance - 1.0)
    return g.mean * dm + 0.5 * (1.0 - 1.0 / g.variance) * dv


def numerical_entropy_rate(g: GaussianLaw, speed: str = FULL, h: float = 1e-4) -> float:
    """Central difference of t ↦ H(ν_t) at t = 0."""
    forward = gaussian_entropy(ou_evolve(g, h, speed))
    backward = gaussian_entropy(_backward(g, h, speed))
    return (forward - backward) / (2.0 * h)


def _backward(g: GaussianLaw, h: float, speed: str) -> GaussianLaw:
    # The OU curve extended to negative time; defined while the variance stays positive.
    s = _rate(speed) * h
    variance = 1.0 + (g.variance - 1.0) * math.exp(2.0 * s)
    return GaussianLaw(g.mean * math.exp(s), variance)


def w2_squared_rate(g: GaussianLaw, nu: GaussianLaw, speed: str = FULL) -> float:
    """d/dt W2²(ν_t, ν) at ν_0 = g, with ν fixed."""
    c = _rate(speed)
    dm = -c * g.mean
    ds = -c * (g.variance - 1.0) / g.std
    return 2.0 * (g.mean - nu.mean) * dm + 2.0 * (g.std - nu.std) * ds


def energy_identity_residual(g0: GaussianLaw, t_end: float, n_steps: int, speed: str = FULL) -> float:
    """max over a uniform grid of |dH/dt + c·F_def(ν_t)|, c = 1 (Full) or ½ (Half)."""
    if n_steps < 1:
        raise ConfigError(f"n_steps must be at least 1, got {n_steps}")
    c = _rate(speed)
    worst = 0.0
    for t in np.linspace(0.0, t_end, n_steps + 1):
        law = ou_evolve(g0, float(t), speed)
        worst = max(worst, abs(entropy_rate(law, speed) + c * gaussian_fisher(law)))
    return worst


def metric_slope(g: GaussianLaw) -> float:
    """|∇H| in (m, s) coordinates: sqrt(m² + (s - 1/s)²)."""
    return math.hypot(g.mean, g.std - 1.0 / g.std)


def numerical_slope(g: GaussianLaw, eps: float = 1e-6, directions: int = 3600) -> float:
    """max over unit directions of (H(g) - H(g + ε·direction)) / ε.

    Perturbations move (m, s); W2 between the endpoints is exactly ε.
    """
    if not 0 < eps < g.std:
        raise ValidationError(f"Perturbation must lie in (0, {g.std}), got {eps}")
    theta = np.linspace(0.0, 2.0 * math.pi, directions, endpoint=False)
    m = g.mean + eps * np.cos(theta)
    s = g.std + eps * np.sin(theta)
    entropy = 0.5 * (m**2 + s**2 - 1.0 - 2.0 * np.log(s))
    return float(np.max(gaussian_entropy(g) - entropy) / eps)


def metric_slope_check(g: GaussianLaw, tolerance: float = SLOPE_TOLERANCE) -> Tuple[float, float]:
    """(slope, sqrt(F_def)); the two coincide for Gaussian laws.

    Raises:
        CheckFailure: If they differ by more than tolerance
    """
    slope = metric_slope(g)
    root_fisher = math.sqrt(gaussian_fisher(g))
    if abs(slope - root_fisher) > tolerance:
        raise CheckFailure(f"Slope {slope} differs from sqrt Fisher {root_fisher} at {g}")
    return slope, root_fisher
