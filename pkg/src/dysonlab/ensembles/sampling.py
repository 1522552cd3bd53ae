"""
Samplers for finite Dyson models and for sine/Airy windows.

The β=2 Hermite ensemble is drawn from its tridiagonal model: diagonal
N(0, 1), off-diagonal chi_(2(k-i)) / sqrt(2). Its eigenvalues have joint
density proportional to Π|λ_i - λ_j|² exp(-Σλ²/2), the GUE with
E|H_ij|² = 1. Rescalings of those eigenvalues give exact bulk (and edge)
draws from e^(-H), unit-intensity sine windows and Airy edge windows. A
vectorized Metropolis-adjusted Langevin sampler targets e^(-H) directly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from dysonlab.core.config import config
from dysonlab.core.constants import (
    DEFAULT_MCMC_STEP_SIZE,
    DEFAULT_MCMC_STEPS,
    MIN_MCMC_ACCEPTANCE,
)
from dysonlab.core.exceptions import ConfigError, InvalidInterval, NoConvergence, ValidationError
from dysonlab.space.configspace import Configuration, Window, WeylPoint
from dysonlab.utils.helpers import RngLike, as_generator

from . import models
from .models import BULK, EDGE, ModelSpec

logger = logging.getLogger(__name__)

# Above this size batched dense eigensolvers lose to per-sample tridiagonal ones.
_DENSE_BATCH_LIMIT = 32

WindowLike = Union[Window, Tuple[float, float], float]


def _tridiagonal_draw(k: int, rng: np.random.Generator, size: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    shape = (k,) if size is None else (size, k)
    diagonal = rng.standard_normal(shape)
    dof = 2.0 * np.arange(k - 1, 0, -1)
    off_shape = (k - 1,) if size is None else (size, k - 1)
    off = np.sqrt(rng.chisquare(np.broadcast_to(dof, off_shape))) / math.sqrt(2.0)
    return diagonal, off


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ConfigError(f"Particle count must be a positive integer, got {k}")
    return int(k)


def sample_gue_spectrum(k: int, rng: RngLike) -> WeylPoint:
    """Eigenvalues of one k×k tridiagonal β=2 Hermite matrix, decreasing."""
    k = _check_k(k)
    generator = as_generator(rng)
    diagonal, off = _tridiagonal_draw(k, generator)
    if k == 1:
        return WeylPoint(diagonal)
    return WeylPoint(eigvalsh_tridiagonal(diagonal, off)[::-1])


def sample_gue_ensemble(k: int, n: int, rng: RngLike) -> np.ndarray:
    """n independent GUE spectra as an (n, k) array, rows decreasing."""
    k = _check_k(k)
    generator = as_generator(rng)
    diagonal, off = _tridiagonal_draw(k, generator, size=n)
    if k == 1:
        return diagonal
    if k <= _DENSE_BATCH_LIMIT:
        matrices = np.zeros((n, k, k))
        idx = np.arange(k)
        matrices[:, idx, idx] = diagonal
        matrices[:, idx[:-1], idx[1:]] = off
        matrices[:, idx[1:], idx[:-1]] = off
        return np.linalg.eigvalsh(matrices)[:, ::-1]
    return np.stack([eigvalsh_tridiagonal(d, e)[::-1] for d, e in zip(diagonal, off)])


def sample_gue_dense(k: int, rng: RngLike) -> WeylPoint:
    """Eigenvalues of a dense GUE matrix (independent oracle for the tridiagonal model).

    Diagonal entries are N(0, 1); real and imaginary parts of the upper
    triangle are independent N(0, 1/2).
    """
    k = _check_k(k)
    generator = as_generator(rng)
    scale = math.sqrt(0.5)
    real = generator.normal(0.0, scale, size=(k, k))
    imag = generator.normal(0.0, scale, size=(k, k))
    upper = np.triu(real + 1j * imag, 1)
    matrix = upper + upper.conj().T + np.diag(generator.standard_normal(k))
    return WeylPoint(np.linalg.eigvalsh(matrix)[::-1])


def log_density_gue(eigenvalues: np.ndarray) -> np.ndarray:
    """Unnormalized log-density 2Σ_{i<j} log|λ_i - λ_j| - Σλ²/2, batched."""
    lam = np.asarray(eigenvalues, dtype=float)
    return -models.interaction(lam) - 0.5 * np.sum(lam**2, axis=-1)


def edge_change_of_variables(k: int) -> Tuple[float, float]:
    """(scale, shift) with x = scale·λ - shift mapping GUE onto the edge density."""
    k = _check_k(k)
    return math.sqrt(2.0) * k ** (1.0 / 6.0), 2.0 * k ** (2.0 / 3.0)


@dataclass(frozen=True)
class McmcResult:
    """Terminal states of a batch of Langevin chains."""

    states: np.ndarray
    acceptance: np.ndarray
    converged: bool

    @property
    def mean_acceptance(self) -> float:
        return float(np.mean(self.acceptance))


def run_mcmc(
    model: ModelSpec,
    steps: Optional[int] = None,
    step_size: Optional[float] = None,
    rng: RngLike = None,
    chains: int = 1,
    initial: Optional[np.ndarray] = None,
) -> McmcResult:
    """Metropolis-adjusted Langevin chains targeting e^(-H).

    Proposal y = x - h∇H(x) + sqrt(2h) ξ with the Metropolis-Hastings
    correction; proposals leaving the Weyl chamber are rejected. Chains
    start from `initial` (broadcast over chains) or from the deterministic
    semicircle spread state.
    """
    steps = int(steps if steps is not None else config.get("sampling.mcmc_steps", DEFAULT_MCMC_STEPS))
    h = float(step_size if step_size is not None else config.get("sampling.mcmc_step_size", DEFAULT_MCMC_STEP_SIZE))
    if steps < 1:
        raise ConfigError(f"MCMC needs at least one step, got {steps}")
    if not h > 0:
        raise ConfigError(f"MCMC step size must be positive, got {h}")
    generator = as_generator(rng)

    start = model.spread_state() if initial is None else np.asarray(initial, dtype=float)
    x = np.array(np.broadcast_to(start, (chains, model.k)), dtype=float)
    if not np.all(models.is_ordered(x)):
        raise ValidationError("MCMC initial state must be strictly decreasing")
    energy_x = models.energy(model, x)
    grad_x = models.gradient(model, x)
    accepted = np.zeros(chains)
    noise_scale = math.sqrt(2.0 * h)

    for _ in range(steps):
        proposal = x - h * grad_x + noise_scale * generator.standard_normal(x.shape)
        uniforms = generator.uniform(size=chains)
        inside = models.is_ordered(proposal)
        energy_y = np.full(chains, np.inf)
        grad_y = np.zeros_like(proposal)
        if np.any(inside):
            energy_y[inside] = models.energy(model, proposal[inside])
            grad_y[inside] = models.gradient(model, proposal[inside])
        forward = np.sum((proposal - x + h * grad_x) ** 2, axis=-1)
        backward = np.sum((x - proposal + h * grad_y) ** 2, axis=-1)
        with np.errstate(invalid="ignore", over="ignore"):
            log_ratio = energy_x - energy_y + (forward - backward) / (4.0 * h)
        accept = inside & (np.log(uniforms) < log_ratio)
        x[accept] = proposal[accept]
        energy_x[accept] = energy_y[accept]
        grad_x[accept] = grad_y[accept]
        accepted += accept

    acceptance = accepted / steps
    minimum = float(config.get("sampling.min_acceptance", MIN_MCMC_ACCEPTANCE))
    converged = bool(np.mean(acceptance) >= minimum)
    if not converged:
        logger.warning(
            f"⚠️ MCMC acceptance {np.mean(acceptance):.3f} below {minimum} "
            f"({model.regime}, k={model.k}, h={h}); samples are unreliable"
        )
    logger.debug(f"MCMC {model.regime} k={model.k}: {chains} chains, acceptance {np.mean(acceptance):.3f}")
    return McmcResult(x, acceptance, converged)


def sample_mcmc(
    model: ModelSpec,
    steps: Optional[int] = None,
    step_size: Optional[float] = None,
    rng: RngLike = None,
    strict: bool = False,
) -> WeylPoint:
    """One approximate draw from e^(-H) by a single Langevin chain.

    Raises:
        NoConvergence: With strict=True, if the acceptance rate falls below
            sampling.min_acceptance
    """
    result = run_mcmc(model, steps, step_size, rng)
    if strict and not result.converged:
        raise NoConvergence(
            f"MCMC acceptance {result.mean_acceptance:.3f} below the minimum ({model.regime}, k={model.k})"
        )
    return WeylPoint(result.states[0])


def sample_mu_k(model: ModelSpec, rng: RngLike, method: str = "auto") -> WeylPoint:
    """One draw from the invariant law (1/Z) e^(-H).

    Bulk draws are the exact rescaling sqrt(k)·λ of a GUE spectrum. Edge
    draws use MCMC unless method="exact" selects the exact change of
    variables.
    """
    return WeylPoint(sample_mu_k_ensemble(model, 1, rng, method)[0])


def sample_mu_k_ensemble(model: ModelSpec, n: int, rng: RngLike, method: str = "auto") -> np.ndarray:
    """n draws from (1/Z) e^(-H) as an (n, k) array."""
    if method not in ("auto", "exact", "mcmc"):
        raise ConfigError(f"Unknown sampling method '{method}' (expected auto, exact or mcmc)")
    use_mcmc = method == "mcmc" or (method == "auto" and model.regime == EDGE)
    if use_mcmc:
        return run_mcmc(model, rng=rng, chains=n).states
    return model.from_gue(sample_gue_ensemble(model.k, n, rng))


def _bounds(window: WindowLike) -> Tuple[float, float]:
    if isinstance(window, Window):
        return -window.radius, window.radius
    if isinstance(window, tuple):
        a, b = float(window[0]), float(window[1])
        if a > b:
            raise InvalidInterval(f"Window endpoints reversed: [{a}, {b})")
        return a, b
    radius = Window(float(window)).radius
    return -radius, radius


def _window_eigenvalues(k: int, rng: np.random.Generator, low: float, high: float) -> np.ndarray:
    # Eigenvalues in (low, high] of one tridiagonal draw.
    diagonal, off = _tridiagonal_draw(k, rng)
    if k == 1:
        return diagonal[(diagonal > low) & (diagonal <= high)]
    spread = np.abs(diagonal).max() + 2.0 * off.max()
    high = min(high, spread + 1.0)
    low = max(low, -spread - 1.0)
    if low >= high:
        return np.empty(0)
    return eigvalsh_tridiagonal(diagonal, off, select="v", select_range=(low, high))


def _window_sample(k: int, window: WindowLike, rng: RngLike, scale: float, shift: float) -> Configuration:
    # Scaled coordinates u = scale·(λ - shift), restricted to [a, b).
    a, b = _bounds(window)
    if a == b:
        return Configuration()
    generator = as_generator(rng)
    margin = 1e-9 * max(1.0, abs(shift))
    low = a / scale + shift - margin
    high = b / scale + shift + margin
    lam = _window_eigenvalues(k, generator, low, high)
    u = scale * (lam - shift)
    return Configuration(u[(u >= a) & (u < b)])


def sample_sine_window(k: int, window: WindowLike, rng: RngLike) -> Configuration:
    """Bulk GUE eigenvalues at unit intensity, u = (sqrt(k)/π) λ, inside the window."""
    k = _check_k(k)
    return _window_sample(k, window, rng, math.sqrt(k) / math.pi, 0.0)


def sample_airy_window(k: int, window: WindowLike, rng: RngLike) -> Configuration:
    """Edge-scaled GUE eigenvalues a = k^(1/6)(λ - 2 sqrt(k)) inside the window."""
    k = _check_k(k)
    return _window_sample(k, window, rng, k ** (1.0 / 6.0), 2.0 * math.sqrt(k))


def sample_window_counts(
    kind: str, k: int, window: WindowLike, n: int, rng: RngLike
) -> np.ndarray:
    """Point counts of n independent sine or Airy window samples."""
    sampler = {"sine": sample_sine_window, "airy": sample_airy_window}.get(kind)
    if sampler is None:
        raise ConfigError(f"Unknown window kind '{kind}' (expected sine or airy)")
    generator = as_generator(rng)
    return np.array([len(sampler(k, window, generator)) for _ in range(n)])
