"""
Tests for Wasserstein distances between empirical laws.
"""

import itertools
import math

import numpy as np
import pytest

from dysonlab.core.exceptions import InfiniteDistance, SizeMismatch, ValidationError
from dysonlab.space.configspace import EmpiricalLaw
from dysonlab.space.matching import INFINITE, matching_distance, partial_matching_distance
from dysonlab.space.transport import (
    Ground,
    as_ground,
    displacement,
    ground_cost_matrix,
    optimal_plan,
    wasserstein,
)


def _random_law(rng, n, k):
    return EmpiricalLaw(rng.normal(size=(n, k)).tolist())


class TestGround:
    def test_partial_needs_radius(self):
        with pytest.raises(ValidationError):
            Ground("partial")
        with pytest.raises(ValidationError):
            Ground("sliced")

    def test_distances(self):
        assert Ground.full().distance([0, 1], [0.1, 0.9]) == pytest.approx(math.sqrt(0.02))
        assert Ground.partial(1.0).distance([0.9], [-0.9]) == pytest.approx(math.sqrt(0.02))
        assert as_ground("partial", 2.0) == Ground.partial(2.0)
        assert as_ground(None) == Ground.full()


class TestWasserstein:
    def test_identical_laws(self, rng):
        law = _random_law(rng, 5, 3)
        assert wasserstein(law, law) == 0.0
        assert optimal_plan(law, law).assignment.tolist() == list(range(5))

    def test_singletons_give_ground_distance(self):
        gamma, eta = [0.0, 1.0], [0.1, 0.9]
        assert wasserstein([gamma], [eta]) == pytest.approx(float(matching_distance(gamma, eta)))
        assert wasserstein([gamma], [eta], ground=Ground.partial(0.5)) == pytest.approx(
            partial_matching_distance(gamma, eta, 0.5)
        )

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_exhaustive_assignment_oracle(self, p):
        rng = np.random.default_rng(7)
        a, b = _random_law(rng, 4, 3), _random_law(rng, 4, 3)
        cost = np.array([[float(matching_distance(x, y)) ** p for y in b] for x in a])
        best = min(cost[np.arange(4), perm].sum() for perm in itertools.permutations(range(4)))
        assert wasserstein(a, b, p) == pytest.approx((best / 4) ** (1 / p), abs=1e-12)

    def test_partial_ground_oracle(self):
        rng = np.random.default_rng(8)
        a, b = _random_law(rng, 4, 3), _random_law(rng, 4, 2)
        ground = Ground.partial(1.5)
        cost = np.array([[partial_matching_distance(x, y, 1.5) ** 2 for y in b] for x in a])
        best = min(cost[np.arange(4), perm].sum() for perm in itertools.permutations(range(4)))
        assert wasserstein(a, b, 2, ground) == pytest.approx(math.sqrt(best / 4), abs=1e-12)
        assert optimal_plan(a, b, 2, ground).cost == pytest.approx(math.sqrt(best / 4), abs=1e-12)

    def test_plan_cost_equals_distance(self, rng):
        a, b = _random_law(rng, 6, 2), _random_law(rng, 6, 2)
        assert optimal_plan(a, b).cost == pytest.approx(float(wasserstein(a, b)))

    def test_non_crossing_assignment(self):
        plan = optimal_plan([[0.0], [10.0]], [[10.5], [0.5]])
        assert plan.assignment.tolist() == [1, 0]
        assert plan.cost == pytest.approx(0.5)

    def test_single_point_members_use_sorted_coupling(self):
        a, b = [[3.0], [0.0], [1.0]], [[0.5], [2.0], [-1.0]]
        expected = math.sqrt(np.mean((np.array([-1.0, 0.5, 2.0]) - np.array([0.0, 1.0, 3.0])) ** 2))
        assert wasserstein(a, b) == pytest.approx(expected)

    def test_mismatched_masses(self):
        a, b = [[0.0], [1.0, 2.0]], [[0.0, 1.0], [5.0, 6.0]]
        assert wasserstein(a, b) is INFINITE
        with pytest.raises(InfiniteDistance):
            optimal_plan(a, b)
        assert np.isinf(ground_cost_matrix(a, b)[0]).all()

    def test_mass_blocks_are_matched_within_size(self):
        a, b = [[0.0], [1.0, 2.0]], [[1.0, 2.5], [0.2]]
        assert optimal_plan(a, b).assignment.tolist() == [1, 0]
        assert wasserstein(a, b) == pytest.approx(math.sqrt((0.04 + 0.25) / 2))

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            wasserstein([[0.0]], [[0.0], [1.0]])

    def test_exponent_below_one(self):
        with pytest.raises(ValidationError):
            wasserstein([[0.0]], [[1.0]], p=0.5)


class TestDisplacement:
    def test_midpoint_law(self):
        mid = displacement([[0.0, 1.0]], [[0.1, 0.9]], 0.5)
        assert mid[0].tolist() == pytest.approx([0.05, 0.95])

    def test_distance_scales_along_geodesic(self, rng):
        a, b = _random_law(rng, 5, 2), _random_law(rng, 5, 2)
        total = float(wasserstein(a, b))
        mid = displacement(a, b, 0.5)
        assert float(wasserstein(a, mid)) <= 0.5 * total + 1e-9
        assert float(wasserstein(mid, b)) <= 0.5 * total + 1e-9
