"""
Parallel extension of symmetric functions on the glued window.

The glued window is [-r, r] with both endpoints identified, a circle of
circumference 2r. A symmetric function of k glued points is extended to
k + 1 points by pushing the configuration along the ray from its nearest
diagonal point until a coordinate reaches the boundary, dropping that
coordinate, and evaluating the original function on the rest. Iterating
gives the upward levels; padding with boundary points gives the downward
ones. The Lipschitz constants of the whole family are certified by Monte
Carlo over sampled pairs.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from dysonlab.core.constants import (
    LIPSCHITZ_SLACK,
    MAX_EXTENSION_K,
    MAX_EXTENSION_LEVEL,
    TIE_EXCLUSION,
)
from dysonlab.core.exceptions import DegenerateDiagonal, OutOfWindow, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GluedPoint:
    """A point of [-r, r] with -r and r identified."""

    coordinate: float
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValidationError(f"Radius must be positive, got {self.radius}")
        if abs(self.coordinate) > self.radius:
            raise OutOfWindow(f"{self.coordinate} lies outside [-{self.radius}, {self.radius}]")

    def distance(self, other: "GluedPoint") -> float:
        direct = abs(self.coordinate - other.coordinate)
        return min(direct, 2.0 * self.radius - direct)


def _tuple(x: Sequence[float], radius: float) -> np.ndarray:
    values = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(values)):
        raise ValidationError("Tuple coordinates must be finite")
    if np.any(np.abs(values) > radius):
        raise OutOfWindow(f"Tuple {values.tolist()} leaves the window of radius {radius}")
    return values


@dataclass(frozen=True)
class SymmetricFunction:
    """A permutation-invariant function of k glued points.

    The evaluator receives the coordinates sorted in decreasing order.
    """

    k: int
    radius: float
    evaluator: Callable[[np.ndarray], float] = field(repr=False)
    lipschitz: float
    name: str = "u"

    def __call__(self, x: Sequence[float]) -> float:
        values = _tuple(x, self.radius)
        if values.size != self.k:
            raise ValidationError(f"{self.name} takes {self.k} points, got {values.size}")
        return float(self.evaluator(np.sort(values)[::-1]))


def nearest_diagonal_point(x: Sequence[float]) -> Tuple[np.ndarray, Tuple[int, int]]:
    """Nearest point of the diagonal set {x_i = x_j for some i != j}.

    The nearest diagonal point replaces the closest pair by its midpoint;
    ties go to the smallest pair of indices.

    Returns:
        (diagonal point, (i, j)) with i < j the merged pair

    Raises:
        DegenerateDiagonal: If x already lies on the diagonal
    """
    values = np.asarray(x, dtype=float).reshape(-1)
    if values.size < 2:
        raise ValidationError("The diagonal needs at least two coordinates")
    i_idx, j_idx = np.triu_indices(values.size, k=1)
    gaps = np.abs(values[i_idx] - values[j_idx])
    best = int(np.argmin(gaps))
    if gaps[best] == 0.0:
        raise DegenerateDiagonal(f"{values.tolist()} lies on the diagonal")
    i, j = int(i_idx[best]), int(j_idx[best])
    diagonal = values.copy()
    diagonal[[i, j]] = 0.5 * (values[i] + values[j])
    return diagonal, (i, j)


def boundary_projection(x: Sequence[float], radius: float) -> np.ndarray:
    """Boundary point of the ray from the nearest diagonal point through x.

    Only the merged pair moves: it separates symmetrically until one of its
    coordinates reaches -r or r. A tuple with a coordinate already at the
    boundary is returned unchanged.

    Raises:
        OutOfWindow: If a coordinate lies outside [-r, r]
        DegenerateDiagonal: If x lies on the diagonal
    """
    values = _tuple(x, radius)
    if np.any(np.abs(values) == radius):
        return values.copy()
    diagonal, (i, j) = nearest_diagonal_point(values)
    direction = values - diagonal
    steps = []
    for index in (i, j):
        speed = direction[index]
        wall = radius if speed > 0 else -radius
        steps.append((wall - values[index]) / speed)
    scale = min(steps)
    projected = np.clip(values + scale * direction, -radius, radius)
    # The coordinate that stops the ray sits exactly on the wall.
    hit = (i, j)[int(np.argmin(steps))]
    projected[hit] = math.copysign(radius, direction[hit])
    return projected


def boundary_index(x: Sequence[float]) -> int:
    """Index of the coordinate nearest the boundary; ties go to the largest index."""
    magnitudes = np.abs(np.asarray(x, dtype=float).reshape(-1))
    candidates = np.flatnonzero(magnitudes == magnitudes.max())
    return int(candidates[-1])


def _drop_boundary_coordinate(x: np.ndarray, radius: float) -> np.ndarray:
    projected = boundary_projection(x, radius)
    return np.delete(projected, boundary_index(projected))


def extend_one_level(u: SymmetricFunction) -> SymmetricFunction:
    """Extension of u to k + 1 points, constant along each boundary ray."""
    if u.k < 1:
        raise ValidationError("Only functions of at least one point can be extended upward")

    def evaluate(x: np.ndarray) -> float:
        return u(_drop_boundary_coordinate(x, u.radius))

    return SymmetricFunction(
        k=u.k + 1,
        radius=u.radius,
        evaluator=evaluate,
        lipschitz=math.sqrt(2.0) * u.lipschitz,
        name=f"{u.name}+",
    )


def _pad_to(u: SymmetricFunction, level: int) -> SymmetricFunction:
    missing = -level

    def evaluate(x: np.ndarray) -> float:
        return u(np.concatenate([x, np.full(missing, u.radius)]))

    return SymmetricFunction(
        k=u.k + level,
        radius=u.radius,
        evaluator=evaluate,
        lipschitz=u.lipschitz,
        name=f"{u.name}{level}",
    )


def extend_parallel(u: SymmetricFunction, l_max: int) -> Dict[int, SymmetricFunction]:
    """The parallel-extension family u^(k,l) for l = -k, ..., l_max.

    Downward levels pad with boundary points at r; upward levels iterate
    extend_one_level. The declared Lipschitz constant of level l is
    2^(l/2) Lip(u) upward and Lip(u) downward.
    """
    if u.k > MAX_EXTENSION_K:
        raise ValidationError(f"k is limited to {MAX_EXTENSION_K}, got {u.k}")
    if not 0 <= l_max <= MAX_EXTENSION_LEVEL:
        raise ValidationError(f"l_max must lie in [0, {MAX_EXTENSION_LEVEL}], got {l_max}")
    family: Dict[int, SymmetricFunction] = {0: u}
    for level in range(-u.k, 0):
        family[level] = _pad_to(u, level)
    current = u
    for level in range(1, l_max + 1):
        current = extend_one_level(current)
        family[level] = current
    return dict(sorted(family.items()))


def winding_function(k: int, radius: float) -> SymmetricFunction:
    """h(sum_i (x_i - r) mod 2r) with h(θ) = (r/π) sin(πθ/r).

    Every parallel extension of this function is the same formula in more
    variables, so the whole family is continuous with Lipschitz constant
    sqrt(number of points).
    """
    period = 2.0 * radius

    def evaluate(x: np.ndarray) -> float:
        theta = float(np.mod(np.sum(x - radius), period))
        return radius / math.pi * math.sin(math.pi * theta / radius)

    return SymmetricFunction(k, radius, evaluate, math.sqrt(k), name="winding")


def periodic_sum_function(k: int, radius: float) -> SymmetricFunction:
    """sum_i (r/π) sin(π x_i / r): smooth on the glued circle, Lipschitz sqrt(k)."""

    def evaluate(x: np.ndarray) -> float:
        return float(np.sum(radius / math.pi * np.sin(math.pi * x / radius)))

    return SymmetricFunction(k, radius, evaluate, math.sqrt(k), name="periodic_sum")


def constant_function(k: int, radius: float, value: float = 1.0) -> SymmetricFunction:
    return SymmetricFunction(k, radius, lambda x: value, 0.0, name="constant")


FAMILIES: Dict[str, Callable[[int, float], SymmetricFunction]] = {
    "winding": winding_function,
    "periodic_sum": periodic_sum_function,
}


def glued_product_metric(x: Sequence[float], y: Sequence[float], radius: float) -> float:
    """Permutation-minimized l^2 product of glued distances."""
    a = np.asarray(x, dtype=float).reshape(-1)
    b = np.asarray(y, dtype=float).reshape(-1)
    if a.size != b.size:
        raise ValidationError(f"Tuples of different sizes: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    direct = np.abs(a[:, None] - b[None, :])
    cost = np.minimum(direct, 2.0 * radius - direct) ** 2
    rows, cols = linear_sum_assignment(cost)
    return math.sqrt(float(cost[rows, cols].sum()))


def merge_signature(x: Sequence[float], radius: float, levels: int) -> Tuple[Tuple, float]:
    """Discrete choices made by `levels` upward extension steps at x.

    Returns the sequence of (sort order, merged pair, wall side) choices and
    the smallest distance to a tie between competing choices. Within a set
    of constant signature the extended function is smooth.
    """
    current = np.asarray(x, dtype=float).reshape(-1)
    signature: List[Tuple] = []
    margin = math.inf
    for _ in range(levels):
        order = tuple(np.argsort(-current, kind="stable").tolist())
        ordered = current[list(order)]
        gaps = ordered[:-1] - ordered[1:]
        if gaps.size > 1:
            margin = min(margin, float(np.min(np.diff(np.sort(ordered)))))
            sorted_gaps = np.sort(gaps)
            margin = min(margin, float(sorted_gaps[1] - sorted_gaps[0]))
        pair = int(np.argmin(gaps))
        balance = ordered[pair] + ordered[pair + 1]
        margin = min(margin, abs(float(balance)))
        others = np.delete(ordered, [pair, pair + 1])
        if others.size:
            margin = min(margin, radius - float(np.max(np.abs(others))))
        signature.append((order, pair, bool(balance >= 0)))
        current = _drop_boundary_coordinate(ordered, radius)
    return tuple(signature), margin


def locally_euclidean(x: np.ndarray, y: np.ndarray, radius: float) -> bool:
    """Whether the glued product metric at (x, y) is the plain l^2 distance."""
    direct = np.abs(x - y)
    if np.any(direct > 2.0 * radius - direct):
        return False
    euclidean = math.sqrt(float(np.sum(direct**2)))
    return euclidean <= glued_product_metric(x, y, radius) + 1e-12


def admissible_pair(x: np.ndarray, y: np.ndarray, radius: float, levels: int) -> bool:
    """Both points share every extension choice, away from ties."""
    if levels <= 0:
        return locally_euclidean(x, y, radius)
    sig_x, margin_x = merge_signature(x, radius, levels)
    sig_y, margin_y = merge_signature(y, radius, levels)
    return (
        sig_x == sig_y
        and min(margin_x, margin_y) > TIE_EXCLUSION
        and locally_euclidean(x, y, radius)
    )


def _uniform_tuples(rng: np.random.Generator, n: int, k: int, radius: float) -> np.ndarray:
    return np.sort(rng.uniform(-radius, radius, size=(n, k)), axis=1)[:, ::-1]


def empirical_lipschitz(
    f: Callable[..., float],
    metric: Callable[..., float],
    n_pairs: int,
    rng: np.random.Generator,
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None,
    window: Optional[float] = None,
    local_scale: float = 1e-3,
    admissible: Optional[Callable[[np.ndarray, np.ndarray], bool]] = None,
) -> float:
    """Largest |f(x) - f(y)| / metric(x, y) over sampled pairs.

    Half of the pairs are drawn independently from the sampler, the other
    half as local Gaussian perturbations of sampled points, clipped to the
    window when one is given. Pairs at distance zero or rejected by
    `admissible` are skipped.
    """
    if n_pairs < 1:
        raise ValidationError(f"n_pairs must be positive, got {n_pairs}")
    if sampler is None:
        if not isinstance(f, SymmetricFunction):
            raise ValidationError("A sampler is needed for functions without a window")
        dim, radius = f.k, f.radius
        sampler = lambda g, n: _uniform_tuples(g, n, dim, radius)  # noqa: E731
        window = radius if window is None else window
    n_uniform = n_pairs - n_pairs // 2
    n_local = n_pairs // 2
    starts = np.asarray(sampler(rng, n_uniform + n_local), dtype=float)
    partners = np.asarray(sampler(rng, n_uniform), dtype=float)
    local = starts[n_uniform:] + local_scale * rng.standard_normal(starts[n_uniform:].shape)
    if window is not None:
        local = np.clip(local, -window, window)
    ends = np.concatenate([partners, local]) if n_local else partners

    estimate = 0.0
    for x, y in zip(starts, ends):
        if admissible is not None and not admissible(x, y):
            continue
        distance = metric(x, y)
        if distance <= 0.0:
            continue
        estimate = max(estimate, abs(f(x) - f(y)) / distance)
    return estimate


@dataclass(frozen=True)
class LadderRow:
    """One level of a Lipschitz certification."""

    family: str
    k: int
    level: int
    points: int
    estimate: float
    bound: float
    passed: bool


def lipschitz_ladder(
    family: str,
    k: int,
    l_max: int,
    n_pairs: int,
    rng: np.random.Generator,
    radius: float = 1.0,
) -> List[LadderRow]:
    """Empirical Lipschitz constants of every level of a test family.

    The winding family is continuous at every level and is certified on all
    sampled pairs. The periodic-sum family is certified on pairs sharing
    their extension choices, away from tie sets.
    """
    if family not in FAMILIES:
        raise ValidationError(f"Unknown family '{family}' (expected one of {sorted(FAMILIES)})")
    u = FAMILIES[family](k, radius)
    rows: List[LadderRow] = []
    for level, f in extend_parallel(u, l_max).items():
        if f.k == 0:
            estimate = 0.0
        else:
            guard = None
            if family == "periodic_sum":
                depth = max(level, 0)
                guard = lambda x, y, d=depth: admissible_pair(x, y, radius, d)  # noqa: E731
            estimate = empirical_lipschitz(
                f,
                lambda x, y: glued_product_metric(x, y, radius),
                n_pairs,
                rng,
                admissible=guard,
            )
        bound = (2.0 ** (level / 2.0) if level > 0 else 1.0) * u.lipschitz
        passed = estimate <= bound + LIPSCHITZ_SLACK
        logger.info(
            f"{'✅' if passed else '❌'} Lipschitz {family} k={k} l={level}: "
            f"{estimate:.6f} <= {bound:.6f}"
        )
        rows.append(LadderRow(family, k, level, f.k, estimate, bound, passed))
    return rows
