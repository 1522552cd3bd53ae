"""
Matching distances on configuration space.

- ``matching_distance``: the l^p matching extended distance, infinite
  between configurations with different point counts.
- ``glued_distance``: the metric on the closed window [-r, r] with both
  boundary points identified.
- ``partial_matching_distance``: the window-localized pseudo-distance in
  which an interior point is either paired with an interior point of the
  other configuration at squared cost |x - y|^2 or killed at the window
  boundary at squared cost (r - |x|)^2.
- ``brute_force_partial``: an exhaustive oracle for the latter.
- ``interpolate``: points of the matching geodesic between two
  configurations of equal size.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from dysonlab.core.constants import MAX_BRUTE_FORCE_POINTS
from dysonlab.core.exceptions import InfiniteDistance, OutOfWindow, TooLarge, ValidationError

from .assignment import solve_assignment
from .configspace import Configuration, Window, restrict

logger = logging.getLogger(__name__)

ConfigurationLike = Union[Configuration, Sequence[float], np.ndarray]
Radius = Union[Window, float]


class ExtendedDistance(float):
    """A nonnegative real or the distinguished value INFINITE."""

    def __new__(cls, value: float) -> "ExtendedDistance":
        number = float(value)
        if math.isnan(number) or number < 0:
            raise ValidationError(f"Distances are nonnegative, got {value}")
        return super().__new__(cls, number)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self)

    def __repr__(self) -> str:
        return "INFINITE" if self.is_infinite else f"ExtendedDistance({float(self)!r})"


INFINITE = ExtendedDistance(math.inf)


@dataclass(frozen=True)
class MatchPlan:
    """A (partial) coupling between two configurations.

    Indices refer to the sorted points of the configurations the plan was
    computed from. Points outside the window appear nowhere.
    """

    pairs: Tuple[Tuple[int, int], ...]
    killed_left: Tuple[int, ...] = field(default=())
    killed_right: Tuple[int, ...] = field(default=())
    cost: float = 0.0


def as_configuration(value: ConfigurationLike) -> Configuration:
    return value if isinstance(value, Configuration) else Configuration(value)


def _radius(window: Radius) -> float:
    return window.radius if isinstance(window, Window) else Window(float(window)).radius


def _check_dimensions(gamma: Configuration, eta: Configuration) -> None:
    if len(gamma) and len(eta) and gamma.dimension != eta.dimension:
        raise ValidationError(
            f"Configurations live in different dimensions: {gamma.dimension} vs {eta.dimension}"
        )


def _as_rows(points: np.ndarray) -> np.ndarray:
    return points.reshape(-1, 1) if points.ndim == 1 else points


def _norms(points: np.ndarray) -> np.ndarray:
    return np.abs(points) if points.ndim == 1 else np.linalg.norm(points, axis=1)


def _pair_costs(gamma: Configuration, eta: Configuration, p: float) -> np.ndarray:
    return cdist(_as_rows(gamma.points), _as_rows(eta.points)) ** p


def matching_plan(gamma: ConfigurationLike, eta: ConfigurationLike, p: float = 2.0) -> MatchPlan:
    """Optimal bijection between two configurations of equal size.

    The lexicographically smallest optimal permutation is returned. In one
    dimension the sorted identity coupling is optimal for every p >= 1.

    Raises:
        InfiniteDistance: If the point counts differ
    """
    g, e = as_configuration(gamma), as_configuration(eta)
    _check_dimensions(g, e)
    if p < 1:
        raise ValidationError(f"Matching exponent must be >= 1, got {p}")
    if len(g) != len(e):
        raise InfiniteDistance(f"No coupling between {len(g)} and {len(e)} points")
    n = len(g)
    if g.dimension == 1:
        total = float(np.sum(np.abs(g.points - e.points) ** p))
        return MatchPlan(tuple((i, i) for i in range(n)), cost=total ** (1.0 / p) if n else 0.0)
    result = solve_assignment(_pair_costs(g, e, p))
    pairs = tuple((i, int(j)) for i, j in enumerate(result.permutation))
    return MatchPlan(pairs, cost=result.value ** (1.0 / p))


def matching_distance(gamma: ConfigurationLike, eta: ConfigurationLike, p: float = 2.0) -> ExtendedDistance:
    """The l^p matching extended distance between two configurations."""
    g, e = as_configuration(gamma), as_configuration(eta)
    _check_dimensions(g, e)
    if p < 1:
        raise ValidationError(f"Matching exponent must be >= 1, got {p}")
    if len(g) != len(e):
        return INFINITE
    if len(g) == 0:
        return ExtendedDistance(0.0)
    if g.dimension == 1:
        return ExtendedDistance(float(np.sum(np.abs(g.points - e.points) ** p)) ** (1.0 / p))
    result = solve_assignment(_pair_costs(g, e, p), lexicographic=False)
    return ExtendedDistance(result.value ** (1.0 / p))


def glued_distance(x: float, y: float, r: Radius) -> float:
    """Distance on [-r, r] with both boundary points glued together.

    Raises:
        OutOfWindow: If |x| > r or |y| > r
    """
    radius = _radius(r)
    if abs(x) > radius or abs(y) > radius:
        raise OutOfWindow(f"Points ({x}, {y}) outside the closed window of radius {radius}")
    return min(abs(x - y), (radius - abs(x)) + (radius - abs(y)))


def _glued_cost_matrix(x: np.ndarray, y: np.ndarray, radius: float, additive_legs: bool) -> np.ndarray:
    direct = np.abs(x[:, None] - y[None, :])
    legs_x = radius - np.abs(x)
    legs_y = radius - np.abs(y)
    if additive_legs:
        return np.minimum(direct, legs_x[:, None] + legs_y[None, :]) ** 2
    return np.minimum(direct**2, legs_x[:, None] ** 2 + legs_y[None, :] ** 2)


def glued_product_distance(
    gamma: ConfigurationLike,
    eta: ConfigurationLike,
    r: Radius,
    additive_legs: bool = False,
) -> ExtendedDistance:
    """Permutation-minimized product distance between the restrictions to B_r.

    With additive_legs=False each pair costs min(|x-y|^2, (r-|x|)^2 + (r-|y|)^2),
    which reproduces the partial matching distance on equal counts. With
    additive_legs=True the pair cost is the squared glued distance, an upper
    bound for it. Different counts inside the window give INFINITE.
    """
    radius = _radius(r)
    g = restrict(as_configuration(gamma), radius)
    e = restrict(as_configuration(eta), radius)
    if g.dimension != 1 or e.dimension != 1:
        raise ValidationError("The glued product distance is defined for 1-D configurations")
    if len(g) != len(e):
        return INFINITE
    if len(g) == 0:
        return ExtendedDistance(0.0)
    cost = _glued_cost_matrix(g.points, e.points, radius, additive_legs)
    return ExtendedDistance(math.sqrt(solve_assignment(cost, lexicographic=False).value))


def _partial_problem(
    gamma: ConfigurationLike, eta: ConfigurationLike, r: Radius
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    radius = _radius(r)
    g, e = as_configuration(gamma), as_configuration(eta)
    _check_dimensions(g, e)
    inside_g = np.flatnonzero(_norms(g.points) < radius) if len(g) else np.empty(0, dtype=np.int64)
    inside_e = np.flatnonzero(_norms(e.points) < radius) if len(e) else np.empty(0, dtype=np.int64)
    x = g.points[inside_g]
    y = e.points[inside_e]
    kill_x = (radius - _norms(x)) ** 2 if x.size else np.empty(0)
    kill_y = (radius - _norms(y)) ** 2 if y.size else np.empty(0)
    if x.size and y.size:
        pair = cdist(_as_rows(x), _as_rows(y)) ** 2
    else:
        pair = np.empty((inside_g.size, inside_e.size))
    return inside_g, inside_e, pair, kill_x, kill_y, radius


def _augmented_matrix(pair: np.ndarray, kill_x: np.ndarray, kill_y: np.ndarray) -> np.ndarray:
    a, b = pair.shape
    matrix = np.zeros((a + b, a + b))
    matrix[:a, :b] = pair
    matrix[:a, b:] = kill_x[:, None]
    matrix[a:, :b] = kill_y[None, :]
    return matrix


def partial_matching_plan(gamma: ConfigurationLike, eta: ConfigurationLike, r: Radius) -> MatchPlan:
    """Optimal partial matching with boundary kills inside the window B_r.

    The augmented square matrix has one row per interior point of gamma plus
    one dummy row per interior point of eta, and symmetrically for columns:
    real-real entries are squared distances, real-dummy entries kill costs,
    dummy-dummy entries zero.
    """
    inside_g, inside_e, pair, kill_x, kill_y, _ = _partial_problem(gamma, eta, r)
    a, b = pair.shape
    if a + b == 0:
        return MatchPlan(())
    result = solve_assignment(_augmented_matrix(pair, kill_x, kill_y))
    perm = result.permutation
    pairs = tuple(
        (int(inside_g[i]), int(inside_e[perm[i]])) for i in range(a) if perm[i] < b
    )
    killed_left = tuple(int(inside_g[i]) for i in range(a) if perm[i] >= b)
    killed_right = tuple(int(inside_e[j]) for j in perm[a:] if j < b)
    return MatchPlan(pairs, killed_left, tuple(sorted(killed_right)), math.sqrt(max(result.value, 0.0)))


def partial_matching_distance(gamma: ConfigurationLike, eta: ConfigurationLike, r: Radius) -> float:
    """The partial matching pseudo-distance d^(r) between two configurations.

    Points outside B_r are discarded. The value is monotone in r and equals
    the matching distance once r exceeds every point by more than that
    distance.
    """
    _, _, pair, kill_x, kill_y, _ = _partial_problem(gamma, eta, r)
    a, b = pair.shape
    if a + b == 0:
        return 0.0
    result = solve_assignment(_augmented_matrix(pair, kill_x, kill_y), lexicographic=False)
    return math.sqrt(max(result.value, 0.0))


def brute_force_partial(gamma: ConfigurationLike, eta: ConfigurationLike, r: Radius) -> float:
    """Exhaustive minimum over partial injections and kill sets.

    Enumerates the subsets of eta's interior points left unmatched: the table
    best[mask] holds the cheapest way to process gamma's points so far while
    pairing exactly the eta points in mask, every other gamma point killed.

    Raises:
        TooLarge: If either window holds more than MAX_BRUTE_FORCE_POINTS points
    """
    _, _, pair, kill_x, kill_y, _ = _partial_problem(gamma, eta, r)
    a, b = pair.shape
    if a > MAX_BRUTE_FORCE_POINTS or b > MAX_BRUTE_FORCE_POINTS:
        raise TooLarge(
            f"Brute force is limited to {MAX_BRUTE_FORCE_POINTS} points per side, got {a} and {b}"
        )
    masks = np.arange(1 << b)
    best = np.full(1 << b, np.inf)
    best[0] = 0.0
    for i in range(a):
        updated = best + kill_x[i]
        for j in range(b):
            without = masks[(masks >> j) & 1 == 0]
            target = without | (1 << j)
            updated[target] = np.minimum(updated[target], best[without] + pair[i, j])
        best = updated
    unmatched = np.zeros(1 << b)
    for j in range(b):
        unmatched += np.where((masks >> j) & 1 == 0, kill_y[j], 0.0)
    return math.sqrt(max(float(np.min(best + unmatched)), 0.0))


def interpolate(gamma: ConfigurationLike, eta: ConfigurationLike, t: float) -> Configuration:
    """Point at time t on the matching geodesic from gamma to eta.

    Raises:
        InfiniteDistance: If the point counts differ
        ValidationError: If t is outside [0, 1]
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"Interpolation time must lie in [0, 1], got {t}")
    g, e = as_configuration(gamma), as_configuration(eta)
    plan = matching_plan(g, e, 2.0)
    if not plan.pairs:
        return Configuration(g.points)
    left = np.array([i for i, _ in plan.pairs])
    right = np.array([j for _, j in plan.pairs])
    return Configuration((1.0 - t) * g.points[left] + t * e.points[right])
