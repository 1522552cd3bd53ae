"""
Exact linear assignment.

Two exact backends share one entry point:

- a Hungarian solver with dual potentials, followed by a lexicographic
  tie-break over the graph of tight edges, so that among all optimal
  permutations the lexicographically smallest one is returned;
- scipy's ``linear_sum_assignment`` for value-only solves, where the
  particular optimal permutation does not matter.

Infinite costs mark forbidden edges. A maximum bipartite matching on the
finite entries decides feasibility before either solver runs.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from dysonlab.core.constants import TIE_TOLERANCE_FACTOR
from dysonlab.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Assignment:
    """Result of an assignment solve.

    Attributes:
        permutation: permutation[i] is the column assigned to row i, or None
            when no finite assignment exists
        value: total cost of the permutation (inf when infeasible)
    """

    permutation: Optional[np.ndarray]
    value: float

    @property
    def feasible(self) -> bool:
        return self.permutation is not None


def _validated(cost: np.ndarray) -> np.ndarray:
    matrix = np.asarray(cost, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"Assignment needs a square cost matrix, got shape {matrix.shape}")
    if np.isnan(matrix).any() or np.isneginf(matrix).any():
        raise ValidationError("Assignment costs must be finite or +inf")
    return matrix


def is_feasible(cost: np.ndarray) -> bool:
    """Whether some permutation uses only finite entries."""
    matrix = _validated(cost)
    n = matrix.shape[0]
    finite = np.isfinite(matrix)
    if finite.all():
        return True
    graph = csr_matrix(finite.astype(np.int8))
    matched = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(matched >= 0)) and matched.size == n


def _replace_forbidden(matrix: np.ndarray) -> np.ndarray:
    finite = np.isfinite(matrix)
    if finite.all():
        return matrix
    big = 2.0 * float(np.abs(matrix[finite]).sum()) + 1.0
    return np.where(finite, matrix, big)


def hungarian(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hungarian method with potentials on a square finite matrix.

    Returns:
        (permutation, u, v): the optimal row-to-column permutation and dual
        potentials with cost[i, j] - u[i] - v[j] >= 0, equality on matched edges
    """
    n = cost.shape[0]
    # 1-based bookkeeping: column 0 is the virtual root of each search.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    owner = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)

    for row in range(1, n + 1):
        owner[0] = row
        col = 0
        min_slack = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[col] = True
            current_row = owner[col]
            free = ~used[1:]
            reduced = cost[current_row - 1] - u[current_row] - v[1:]
            improve = free & (reduced < min_slack[1:])
            min_slack[1:][improve] = reduced[improve]
            way[1:][improve] = col
            candidates = np.where(free, min_slack[1:], np.inf)
            next_col = int(np.argmin(candidates)) + 1
            delta = candidates[next_col - 1]
            u[owner[used]] += delta
            v[used] -= delta
            min_slack[~used] -= delta
            col = next_col
            if owner[col] == 0:
                break
        while col:
            previous = way[col]
            owner[col] = owner[previous]
            col = previous

    permutation = np.empty(n, dtype=np.int64)
    permutation[owner[1:] - 1] = np.arange(n)
    return permutation, u[1:], v[1:]


def _lexicographic(permutation: np.ndarray, tight: np.ndarray) -> np.ndarray:
    """Smallest permutation, in lexicographic order, inside the tight graph.

    Rows are fixed one at a time. For row i every smaller tight column is
    tried; a column held by a later row is freed by an alternating path that
    re-matches later rows on tight edges and ends at the column row i gives up.
    """
    n = permutation.size
    perm = permutation.copy()
    holder = np.empty(n, dtype=np.int64)
    holder[perm] = np.arange(n)
    neighbours: List[np.ndarray] = [np.flatnonzero(tight[i]) for i in range(n)]

    def reroute(start: int, target: int, first: int, visited: np.ndarray) -> bool:
        # Depth-first search for an alternating path from `start` to `target`
        # through rows after `first`; the path is applied on success.
        stack = [(start, iter(neighbours[start]))]
        path: List[int] = []
        while stack:
            row, columns = stack[-1]
            advanced = False
            for col in columns:
                if visited[col]:
                    continue
                visited[col] = True
                if col == target:
                    path.append(col)
                    for (moved, _), new_col in zip(stack, path):
                        perm[moved] = new_col
                        holder[new_col] = moved
                    return True
                other = holder[col]
                if other > first:
                    path.append(col)
                    stack.append((other, iter(neighbours[other])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if path:
                    path.pop()
        return False

    for i in range(n):
        released = perm[i]
        for col in neighbours[i]:
            if col >= released:
                break
            other = holder[col]
            if other < i:
                continue
            visited = np.zeros(n, dtype=bool)
            visited[col] = True
            if reroute(other, released, i, visited):
                perm[i] = col
                holder[col] = i
                break
    return perm


def solve_assignment(cost: np.ndarray, lexicographic: bool = True) -> Assignment:
    """Minimum-cost perfect assignment of a square matrix.

    Args:
        cost: square matrix; +inf marks a forbidden edge
        lexicographic: return the lexicographically smallest optimal
            permutation (Hungarian backend); otherwise any optimal one (scipy)

    Returns:
        Assignment with permutation None and value inf when every permutation
        uses a forbidden edge
    """
    matrix = _validated(cost)
    n = matrix.shape[0]
    if n == 0:
        return Assignment(np.empty(0, dtype=np.int64), 0.0)
    if not is_feasible(matrix):
        logger.debug(f"Assignment of size {n} has no finite permutation")
        return Assignment(None, float("inf"))

    work = _replace_forbidden(matrix)
    if lexicographic:
        permutation, u, v = hungarian(work)
        reduced = work - u[:, None] - v[None, :]
        scale = max(1.0, float(np.abs(work).max()))
        tolerance = TIE_TOLERANCE_FACTOR * np.finfo(float).eps * n * scale
        tight = np.abs(reduced) <= tolerance
        tight[np.arange(n), permutation] = True
        permutation = _lexicographic(permutation, tight)
    else:
        rows, cols = linear_sum_assignment(work)
        permutation = np.empty(n, dtype=np.int64)
        permutation[rows] = cols

    value = float(matrix[np.arange(n), permutation].sum())
    logger.debug(f"Solved assignment of size {n}, value {value:.6g}")
    return Assignment(permutation, value)
