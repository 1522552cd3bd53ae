"""
Rigidity diagnostics for the sine and Airy processes.

Shells I_j = [-j - 1/j, -j) carry total length Σ 1/j, which diverges,
while moving one point per shell to its midpoint a_j = -j - 1/(2j) costs
at most Σ 1/j² = π²/6 in squared matching distance. The tables here put
numbers on both halves of that argument: per-shell occupancy
probabilities against their determinantal lower bounds, and the count
variance of windows against the kernel prediction.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dysonlab.core.constants import GAP_BOUND_SLACK, MAX_SHELLS, SHELL_COST_BOUND
from dysonlab.core.exceptions import CheckFailure, ConfigError
from dysonlab.ensembles.dpp import KernelSpec, count_moments, gap_probability
from dysonlab.ensembles.sampling import sample_airy_window, sample_sine_window
from dysonlab.space.configspace import Configuration, count
from dysonlab.utils.helpers import RngLike, as_generator

logger = logging.getLogger(__name__)

# Window samples are drawn from GUE matrices of this size.
DEFAULT_WINDOW_K = 400
# Monte Carlo frequencies are tabulated for the first shells only.
MONTE_CARLO_SHELLS = 5


def shell(j: int) -> Tuple[float, float]:
    """[left, right) of the j-th shell."""
    if j < 1:
        raise ConfigError(f"Shells are numbered from 1, got {j}")
    return -j - 1.0 / j, float(-j)


def shell_target(j: int) -> float:
    return -j - 0.5 / j


def shell_transport(gamma: Configuration, n_shells: int = MAX_SHELLS) -> Tuple[Configuration, float]:
    """Move the leftmost point of every occupied shell to the shell midpoint.

    Returns:
        The image configuration and the cost (Σ displacement²)^(1/2)

    Raises:
        CheckFailure: If the squared cost exceeds π²/6
    """
    points = np.array(gamma.points, dtype=float)
    if gamma.dimension != 1:
        raise ConfigError("Shell transport is defined for configurations on the line")
    squared = 0.0
    for j in range(1, n_shells + 1):
        left, right = shell(j)
        inside = np.flatnonzero((points >= left) & (points < right))
        if inside.size == 0:
            continue
        mover = inside[np.argmin(points[inside])]
        target = shell_target(j)
        squared += (points[mover] - target) ** 2
        points[mover] = target
    if squared > SHELL_COST_BOUND + 1e-12:
        raise CheckFailure(f"Shell transport cost² {squared} exceeds π²/6")
    return Configuration(points), math.sqrt(squared)


@dataclass(frozen=True)
class ShellRow:
    """Occupancy of one shell."""

    shell: int
    left: float
    right: float
    probability: float
    bound: float
    partial_sum: float
    frequency: Optional[float] = None
    standard_error: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _window_sampler(kind: str):
    samplers = {"sine": sample_sine_window, "airy": sample_airy_window}
    if kind not in samplers:
        raise ConfigError(f"Unknown kernel '{kind}' (expected sine or airy)")
    return samplers[kind]


def shell_occupancy_stats(
    kind: str,
    k_max: int,
    n_samples: int = 0,
    rng: RngLike = None,
    window_k: int = DEFAULT_WINDOW_K,
    nodes: Optional[int] = None,
) -> List[ShellRow]:
    """Per-shell occupancy probability p_j = 1 - det(I - K_(I_j)) and its bound.

    The bound 1 - exp(-∫_(I_j) K(x, x) dx) holds for every determinantal
    process with a projection kernel. With n_samples > 0 the first shells
    also get Monte Carlo frequencies from window samples.

    Raises:
        CheckFailure: If the partial sums Σ_(i≤j) p_i decrease or some p_j
            falls below its bound
    """
    if not 1 <= k_max <= MAX_SHELLS:
        raise ConfigError(f"Shell count must lie in [1, {MAX_SHELLS}], got {k_max}")
    spec = KernelSpec.from_name(kind)
    frequencies = _shell_frequencies(kind, min(k_max, MONTE_CARLO_SHELLS), n_samples, rng, window_k)

    rows: List[ShellRow] = []
    total = 0.0
    for j in range(1, k_max + 1):
        left, right = shell(j)
        probability = 1.0 - gap_probability(spec, left, right, nodes).value
        previous, total = total, total + probability
        if total < previous - GAP_BOUND_SLACK:
            raise CheckFailure(f"Shell {j}: partial sum decreases from {previous} to {total}")
        mean, _ = count_moments(spec, left, right, nodes)
        bound = 1.0 - math.exp(-mean)
        if probability < bound - GAP_BOUND_SLACK:
            raise CheckFailure(f"Shell {j}: occupancy {probability} below its bound {bound}")
        frequency, error = frequencies[j - 1] if j <= len(frequencies) else (None, None)
        rows.append(ShellRow(j, left, right, probability, bound, total, frequency, error))
    logger.debug(f"Shell table for {kind}: {k_max} shells, partial sum {total:.4f}")
    return rows


def _shell_frequencies(
    kind: str, shells: int, n_samples: int, rng: RngLike, window_k: int
) -> List[Tuple[float, float]]:
    if n_samples <= 0:
        return []
    sampler = _window_sampler(kind)
    generator = as_generator(rng)
    window = (shell(shells)[0], 0.0)
    hits = np.zeros(shells)
    for _ in range(n_samples):
        gamma = sampler(window_k, window, generator)
        for j in range(1, shells + 1):
            left, right = shell(j)
            hits[j - 1] += count(gamma, left, right) > 0
    frequency = hits / n_samples
    error = np.sqrt(frequency * (1.0 - frequency) / n_samples)
    return list(zip(frequency.tolist(), error.tolist()))


@dataclass(frozen=True)
class VarianceRow:
    """Empirical and predicted moments of the count in [-L, L)."""

    half_width: float
    mean: float
    variance: float
    predicted_mean: float
    predicted_variance: float
    mean_error: float
    variance_error: float

    @property
    def sub_poissonian(self) -> bool:
        return self.variance < self.mean

    def to_dict(self) -> dict:
        return {**asdict(self), "sub_poissonian": self.sub_poissonian}


def count_variance_profile(
    samples: Iterable[Configuration],
    half_widths: Sequence[float],
    kind: str = "sine",
    nodes: Optional[int] = None,
) -> List[VarianceRow]:
    """Count mean and variance in [-L, L) against tr K and tr K - tr K²."""
    members = list(samples)
    if len(members) < 2:
        raise ConfigError("Count variance needs at least two samples")
    spec = KernelSpec.from_name(kind)
    rows = []
    for width in half_widths:
        if width < 0:
            raise ConfigError(f"Half-width must be nonnegative, got {width}")
        counts = np.array([count(gamma, -width, width) for gamma in members], dtype=float)
        n = counts.size
        mean = float(counts.mean())
        variance = float(counts.var(ddof=1))
        fourth = float(np.mean((counts - mean) ** 4))
        variance_error = math.sqrt(max(fourth - variance**2, 0.0) / n)
        predicted_mean, predicted_variance = count_moments(spec, -width, width, nodes)
        rows.append(
            VarianceRow(
                float(width),
                mean,
                variance,
                predicted_mean,
                predicted_variance,
                math.sqrt(variance / n),
                variance_error,
            )
        )
    return rows


def sample_windows(kind: str, n: int, radius: float, rng: RngLike, window_k: int = DEFAULT_WINDOW_K) -> List[Configuration]:
    """n independent window samples on [-radius, radius)."""
    sampler = _window_sampler(kind)
    generator = as_generator(rng)
    return [sampler(window_k, (-radius, radius), generator) for _ in range(n)]
