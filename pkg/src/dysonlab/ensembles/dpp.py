"""
Determinantal point processes with the sine and Airy kernels.

Kernels restricted to an interval are discretized by Gauss-Legendre
Nyström quadrature with the weights split symmetrically, so the discrete
operator is a symmetric matrix whose eigenvalues approximate those of the
integral operator. Fredholm determinants, generating functions of the
point count, gap probabilities and counting moments are read off those
eigenvalues.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import airy, roots_legendre

from dysonlab.core.config import config
from dysonlab.core.constants import (
    AIRY_TRUNCATION,
    DEFAULT_QUADRATURE_NODES,
    EIGENVALUE_SLACK,
    GAP_BOUND_SLACK,
    MIN_QUADRATURE_NODES,
)
from dysonlab.core.exceptions import (
    CheckFailure,
    ConfigError,
    DegenerateInterval,
    InvalidInterval,
    ValidationError,
)

logger = logging.getLogger(__name__)

KernelFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

SINE = "sine"
AIRY = "airy"
CUSTOM = "custom"

# Below this separation the Airy kernel uses its diagonal value at the midpoint.
_AIRY_DIAGONAL_BAND = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """Which correlation kernel to use.

    Custom kernels exist as a hook for tests: the callable receives two
    broadcastable arrays and must handle its own diagonal.
    """

    kind: str
    function: Optional[KernelFunction] = field(default=None, compare=False, repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in (SINE, AIRY, CUSTOM):
            raise ConfigError(f"Unknown kernel '{self.kind}' (expected sine or airy)")
        if self.kind == CUSTOM and self.function is None:
            raise ConfigError("A custom kernel needs a callable")

    @classmethod
    def sine(cls) -> "KernelSpec":
        return cls(SINE)

    @classmethod
    def airy(cls) -> "KernelSpec":
        return cls(AIRY)

    @classmethod
    def custom(cls, function: KernelFunction, name: str = "custom") -> "KernelSpec":
        return cls(CUSTOM, function, name)

    @classmethod
    def from_name(cls, name: str) -> "KernelSpec":
        if name == SINE:
            return cls.sine()
        if name == AIRY:
            return cls.airy()
        raise ConfigError(f"Unknown kernel '{name}' (expected sine or airy)")

    @property
    def is_projection(self) -> bool:
        """Whether the kernel is a spectral projection (eigenvalues in [0, 1])."""
        return self.kind in (SINE, AIRY)


def airy_intensity(x: np.ndarray) -> np.ndarray:
    """One-point density Ai'(x)^2 - x Ai(x)^2 of the Airy process."""
    values = np.asarray(x, dtype=float)
    ai, aip, _, _ = airy(values)
    return aip**2 - values * ai**2


def _airy_kernel(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ai_x, aip_x, _, _ = airy(x)
    ai_y, aip_y, _, _ = airy(y)
    difference = x - y
    near = np.abs(difference) < _AIRY_DIAGONAL_BAND
    safe = np.where(near, 1.0, difference)
    off_diagonal = (ai_x * aip_y - aip_x * ai_y) / safe
    return np.where(near, airy_intensity(0.5 * (x + y)), off_diagonal)


def kernel_matrix(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kernel values K(x_i, y_j) on the outer grid of x and y."""
    xs = np.asarray(x, dtype=float)[:, None]
    ys = np.asarray(y, dtype=float)[None, :]
    if spec.kind == SINE:
        return np.sinc(xs - ys)
    if spec.kind == AIRY:
        return _airy_kernel(xs, ys)
    return np.asarray(spec.function(xs, ys), dtype=float)


def kernel_eval(spec: KernelSpec, x: float, y: float) -> float:
    """K(x, y), with the analytic limit on the diagonal."""
    return float(kernel_matrix(spec, np.array([x]), np.array([y]))[0, 0])


def intensity(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    """One-point density K(x, x)."""
    values = np.asarray(x, dtype=float)
    if spec.kind == SINE:
        return np.ones_like(values)
    if spec.kind == AIRY:
        return airy_intensity(values)
    return np.diagonal(kernel_matrix(spec, values.ravel(), values.ravel())).reshape(values.shape)


@dataclass(frozen=True)
class NystromOperator:
    """Symmetrized Nyström discretization sqrt(w_i) K(x_i, x_j) sqrt(w_j)."""

    spec: KernelSpec
    interval: Tuple[float, float]
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def hilbert_schmidt(self) -> float:
        """tr K^2, the squared Frobenius norm of the symmetric matrix."""
        return float(np.sum(self.matrix**2))


def _nodes(n: Optional[int]) -> int:
    count = int(n if n is not None else config.get("numerics.quadrature_nodes", DEFAULT_QUADRATURE_NODES))
    if count < MIN_QUADRATURE_NODES:
        raise ConfigError(f"Nyström needs at least {MIN_QUADRATURE_NODES} nodes, got {count}")
    return count


def _interval(spec: KernelSpec, a: float, b: float) -> Tuple[float, float]:
    if a > b:
        raise InvalidInterval(f"Interval endpoints reversed: [{a}, {b}]")
    if math.isinf(b) and spec.kind == AIRY:
        b = max(AIRY_TRUNCATION, a + 1.0)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError(f"Quadrature needs a bounded interval, got [{a}, {b}]")
    return float(a), float(b)


def discretize(spec: KernelSpec, a: float, b: float, n: Optional[int] = None) -> NystromOperator:
    """Gauss-Legendre Nyström operator of the kernel restricted to [a, b].

    An infinite right endpoint is allowed for the Airy kernel and is
    truncated at AIRY_TRUNCATION, where the intensity is negligible.

    Raises:
        DegenerateInterval: If a == b
        InvalidInterval: If a > b
    """
    a, b = _interval(spec, a, b)
    if b == a:
        raise DegenerateInterval(f"Interval [{a}, {b}] has no length")
    count = _nodes(n)
    reference_nodes, reference_weights = roots_legendre(count)
    half = 0.5 * (b - a)
    nodes = half * reference_nodes + 0.5 * (a + b)
    weights = half * reference_weights
    root = np.sqrt(weights)
    matrix = root[:, None] * kernel_matrix(spec, nodes, nodes) * root[None, :]
    matrix = 0.5 * (matrix + matrix.T)
    logger.debug(f"Discretized {spec.kind} kernel on [{a}, {b}] with {count} nodes")
    return NystromOperator(spec, (a, b), nodes, weights, matrix)


def fredholm_det(op: NystromOperator, z: float) -> float:
    """det(I + z K) as the product of (1 + z λ_i) over the Nyström spectrum."""
    if z == 0:
        return 1.0
    return float(np.prod(1.0 + z * op.eigenvalues))


def generating_function(spec: KernelSpec, r: float, t: float, n: Optional[int] = None) -> float:
    """G_r(t) = E[t^N] for the count N in (-r, r), equal to det(I + (t - 1) K_r)."""
    if not r > 0:
        raise ValidationError(f"Radius must be positive, got {r}")
    if t < 0:
        raise ValidationError(f"Generating function needs t >= 0, got {t}")
    if t == 1:
        return 1.0
    return fredholm_det(discretize(spec, -r, r, n), t - 1.0)


@dataclass(frozen=True)
class GapProbability:
    """P(no point in [a, b)) and its upper bound exp(-∫ intensity)."""

    value: float
    bound: float


def gap_probability(spec: KernelSpec, a: float, b: float, n: Optional[int] = None) -> GapProbability:
    """det(I - K) on [a, b), with the bound exp(-tr K).

    Raises:
        CheckFailure: If the computed gap exceeds its bound
    """
    a, b = _interval(spec, a, b)
    if b == a:
        return GapProbability(1.0, 1.0)
    op = discretize(spec, a, b, n)
    value = fredholm_det(op, -1.0)
    bound = math.exp(-op.trace)
    if value > bound + GAP_BOUND_SLACK:
        raise CheckFailure(f"Gap probability {value} exceeds its bound {bound} on [{a}, {b})")
    return GapProbability(value, bound)


def occupancy_probability(spec: KernelSpec, a: float, b: float, n: Optional[int] = None) -> float:
    """P(at least one point in [a, b))."""
    return 1.0 - gap_probability(spec, a, b, n).value


def count_moments(spec: KernelSpec, a: float, b: float, n: Optional[int] = None) -> Tuple[float, float]:
    """Mean tr K and variance tr K - tr K^2 of the point count on [a, b)."""
    a, b = _interval(spec, a, b)
    if b == a:
        return 0.0, 0.0
    op = discretize(spec, a, b, n)
    return op.trace, op.trace - op.hilbert_schmidt


@dataclass(frozen=True)
class AfdCondition:
    """G_r(sqrt 2) against the bound exp((sqrt 2 - 1) tr K_r)."""

    series_value: float
    bound: float
    trace: float

    @property
    def holds(self) -> bool:
        return self.series_value <= self.bound


def afd_condition(spec: KernelSpec, r: float, n: Optional[int] = None) -> AfdCondition:
    """Series sum_l 2^(l/2) P(N_r = l) = G_r(sqrt 2) and its determinantal bound.

    Raises:
        CheckFailure: If the series exceeds the bound
    """
    if not r > 0:
        raise ValidationError(f"Radius must be positive, got {r}")
    op = discretize(spec, -r, r, n)
    series = fredholm_det(op, math.sqrt(2.0) - 1.0)
    bound = math.exp((math.sqrt(2.0) - 1.0) * op.trace)
    if series > bound:
        raise CheckFailure(f"G_r(sqrt 2) = {series} exceeds exp((sqrt 2 - 1) tr K_r) = {bound}")
    return AfdCondition(series, bound, op.trace)


def spectrum_in_unit_interval(op: NystromOperator, slack: float = EIGENVALUE_SLACK) -> bool:
    """Whether every Nyström eigenvalue lies in [-slack, 1 + slack]."""
    eig = op.eigenvalues
    return bool(eig.min() >= -slack and eig.max() <= 1.0 + slack)
