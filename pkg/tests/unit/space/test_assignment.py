"""
Tests for the exact assignment solvers.
"""

import itertools

import numpy as np
import pytest

from dysonlab.core.exceptions import ValidationError
from dysonlab.space.assignment import hungarian, is_feasible, solve_assignment


def _brute_force(cost):
    n = cost.shape[0]
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(n)):
        value = cost[np.arange(n), perm].sum()
        if value < best - 1e-12:
            best, best_perm = value, perm
    return best, best_perm


class TestSolveAssignment:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        cost = np.random.default_rng(seed).random((6, 6))
        value, _ = _brute_force(cost)
        assert solve_assignment(cost).value == pytest.approx(value, abs=1e-12)
        assert solve_assignment(cost, lexicographic=False).value == pytest.approx(value, abs=1e-12)

    def test_dual_potentials_are_feasible(self):
        cost = np.random.default_rng(3).random((7, 7))
        perm, u, v = hungarian(cost)
        reduced = cost - u[:, None] - v[None, :]
        assert reduced.min() >= -1e-12
        assert np.allclose(reduced[np.arange(7), perm], 0.0, atol=1e-12)

    def test_ties_resolve_to_lexicographically_smallest(self):
        assert solve_assignment(np.zeros((4, 4))).permutation.tolist() == [0, 1, 2, 3]
        cost = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        # both cyclic shifts are optimal
        assert solve_assignment(cost).permutation.tolist() == [1, 2, 0]

    def test_lexicographic_on_integer_ties(self):
        cost = np.random.default_rng(11).integers(0, 3, size=(6, 6)).astype(float)
        value = _brute_force(cost)[0]
        optimal = [
            list(p)
            for p in itertools.permutations(range(6))
            if cost[np.arange(6), p].sum() == value
        ]
        assert solve_assignment(cost).permutation.tolist() == min(optimal)

    def test_forbidden_edges(self):
        cost = np.array([[np.inf, 1.0], [2.0, np.inf]])
        result = solve_assignment(cost)
        assert result.feasible
        assert result.permutation.tolist() == [1, 0]
        assert result.value == 3.0

    def test_infeasible(self):
        cost = np.array([[np.inf, 1.0], [np.inf, 2.0]])
        assert not is_feasible(cost)
        result = solve_assignment(cost)
        assert not result.feasible
        assert result.value == np.inf

    def test_empty_matrix(self):
        result = solve_assignment(np.empty((0, 0)))
        assert result.value == 0.0
        assert result.permutation.size == 0

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.array([[np.nan]]), np.array([[-np.inf]])])
    def test_invalid_matrices(self, bad):
        with pytest.raises(ValidationError):
            solve_assignment(bad)
