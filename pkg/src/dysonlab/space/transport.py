"""
Wasserstein distances between empirical laws on configuration space.

Both laws are uniform over the same number of members, so optimal
transport reduces to an assignment on the matrix of ground costs
d(γ_a, η_b)^p, with d either the matching distance (Full ground) or the
partial matching distance on a window (Partial ground).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from dysonlab.core.exceptions import InfiniteDistance, SizeMismatch, ValidationError
from dysonlab.utils.helpers import get_run_stats, parallel_map

from .assignment import solve_assignment
from .configspace import Configuration, EmpiricalLaw, Window
from .matching import INFINITE, ExtendedDistance, interpolate, matching_distance, partial_matching_distance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ground:
    """Ground metric on configurations: Full matching or Partial(r)."""

    kind: str = "full"
    radius: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("full", "partial"):
            raise ValidationError(f"Unknown ground '{self.kind}' (expected full or partial)")
        if self.kind == "partial":
            if self.radius is None:
                raise ValidationError("Partial ground needs a radius")
            Window(self.radius)

    @classmethod
    def full(cls) -> "Ground":
        return cls("full")

    @classmethod
    def partial(cls, radius: float) -> "Ground":
        return cls("partial", float(radius))

    def distance(self, gamma: Configuration, eta: Configuration) -> float:
        """d_Υ (l2 matching) or the partial matching distance on the window."""
        if self.kind == "full":
            return float(matching_distance(gamma, eta))
        return partial_matching_distance(gamma, eta, self.radius)


GroundLike = Union[Ground, str, None]


def as_ground(ground: GroundLike, radius: Optional[float] = None) -> Ground:
    if isinstance(ground, Ground):
        return ground
    if ground is None or ground == "full":
        return Ground.full()
    return Ground(str(ground), radius)


@dataclass(frozen=True)
class TransportPlan:
    """Optimal assignment between two equal-size empirical laws.

    Attributes:
        assignment: assignment[a] is the member of B coupled with member a of A
        cost: (1/N sum d(A_a, B_assignment[a])^p)^(1/p)
    """

    assignment: np.ndarray
    cost: float

    def __post_init__(self) -> None:
        n = self.assignment.size
        if not np.array_equal(np.sort(self.assignment), np.arange(n)):
            raise ValidationError("Transport assignment must be a permutation")


def _law(value: Union[EmpiricalLaw, list]) -> EmpiricalLaw:
    return value if isinstance(value, EmpiricalLaw) else EmpiricalLaw(value)


def _one_dimensional_full_costs(a: EmpiricalLaw, b: EmpiricalLaw, p: float) -> Optional[np.ndarray]:
    # Members grouped by size; each same-size block is one vectorized
    # difference of sorted arrays, every cross-size entry is infinite.
    if any(m.dimension != 1 for m in a) or any(m.dimension != 1 for m in b):
        return None
    cost = np.full((len(a), len(b)), np.inf)
    sizes_a = np.array([len(m) for m in a])
    sizes_b = np.array([len(m) for m in b])
    for size in np.intersect1d(sizes_a, sizes_b):
        rows = np.flatnonzero(sizes_a == size)
        cols = np.flatnonzero(sizes_b == size)
        if size == 0:
            cost[np.ix_(rows, cols)] = 0.0
            continue
        left = np.stack([a[i].points for i in rows])
        right = np.stack([b[j].points for j in cols])
        block = np.sum((left[:, None, :] - right[None, :, :]) ** 2, axis=2) ** (p / 2.0)
        cost[np.ix_(rows, cols)] = block
    return cost


def ground_cost_matrix(
    a: Union[EmpiricalLaw, list],
    b: Union[EmpiricalLaw, list],
    p: float = 2.0,
    ground: GroundLike = None,
) -> np.ndarray:
    """Matrix of ground costs d(A_i, B_j)^p; infinite entries mark forbidden pairs."""
    law_a, law_b = _law(a), _law(b)
    metric = as_ground(ground)
    if metric.kind == "full":
        fast = _one_dimensional_full_costs(law_a, law_b, p)
        if fast is not None:
            return fast

    def row(i: int) -> np.ndarray:
        return np.array([metric.distance(law_a[i], member) ** p for member in law_b])

    return np.vstack(parallel_map(row, range(len(law_a)))) if len(law_a) else np.empty((0, len(law_b)))


def _check_sizes(a: EmpiricalLaw, b: EmpiricalLaw) -> None:
    if len(a) != len(b):
        raise SizeMismatch(f"Empirical laws have different sizes: {len(a)} vs {len(b)}")


def _monotone_single_point(a: EmpiricalLaw, b: EmpiricalLaw, p: float) -> Optional[float]:
    # One point per member on the line: the sorted coupling is optimal for
    # convex costs, so W_p is the quantile coupling of the two samples.
    if not all(len(m) == 1 and m.dimension == 1 for m in a):
        return None
    if not all(len(m) == 1 and m.dimension == 1 for m in b):
        return None
    x = np.sort(np.array([m.points[0] for m in a]))
    y = np.sort(np.array([m.points[0] for m in b]))
    return float(np.mean(np.abs(x - y) ** p)) ** (1.0 / p)


def optimal_plan(
    a: Union[EmpiricalLaw, list],
    b: Union[EmpiricalLaw, list],
    p: float = 2.0,
    ground: GroundLike = None,
    lexicographic: bool = True,
) -> TransportPlan:
    """Optimal assignment between two equal-size empirical laws.

    Raises:
        SizeMismatch: If the laws have different sizes
        InfiniteDistance: If every assignment uses an infinite ground cost
    """
    law_a, law_b = _law(a), _law(b)
    _check_sizes(law_a, law_b)
    cost = ground_cost_matrix(law_a, law_b, p, ground)
    result = solve_assignment(cost, lexicographic=lexicographic)
    if not result.feasible:
        raise InfiniteDistance("Every coupling of the two laws has infinite cost")
    get_run_stats().record_operation("optimal_plan")
    value = (result.value / len(law_a)) ** (1.0 / p)
    return TransportPlan(result.permutation, value)


def wasserstein(
    a: Union[EmpiricalLaw, list],
    b: Union[EmpiricalLaw, list],
    p: float = 2.0,
    ground: GroundLike = None,
) -> ExtendedDistance:
    """Wasserstein distance W_p between two equal-size empirical laws.

    Returns INFINITE in Full mode when no assignment avoids members of
    different sizes.

    Raises:
        SizeMismatch: If the laws have different sizes
    """
    law_a, law_b = _law(a), _law(b)
    _check_sizes(law_a, law_b)
    if p < 1:
        raise ValidationError(f"Transport exponent must be >= 1, got {p}")
    metric = as_ground(ground)
    if metric.kind == "full":
        fast = _monotone_single_point(law_a, law_b, p)
        if fast is not None:
            return ExtendedDistance(fast)
    cost = ground_cost_matrix(law_a, law_b, p, metric)
    result = solve_assignment(cost, lexicographic=False)
    get_run_stats().record_operation("wasserstein")
    if not result.feasible:
        return INFINITE
    return ExtendedDistance((max(result.value, 0.0) / len(law_a)) ** (1.0 / p))


def displacement(
    a: Union[EmpiricalLaw, list],
    b: Union[EmpiricalLaw, list],
    t: float,
    ground: GroundLike = None,
) -> EmpiricalLaw:
    """Member-wise matching interpolation along the optimal W_2 plan.

    Raises:
        InfiniteDistance: If no finite plan exists
    """
    law_a, law_b = _law(a), _law(b)
    plan = optimal_plan(law_a, law_b, 2.0, ground)
    return EmpiricalLaw(interpolate(law_a[i], law_b[int(j)], t) for i, j in enumerate(plan.assignment))
