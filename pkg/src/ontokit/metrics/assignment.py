"""Maximum-score linear assignment via the Hungarian algorithm.

This is the hot kernel of the edge/node matching metrics: solving an
m-by-n matching is O(max(m, n)^3) and dominates evaluation time on large
graphs. Two interchangeable builds are provided: a numba ``@njit`` kernel
and a vectorized numpy one, selected by the ``use_numba`` argument or the
``ONTOKIT_NO_NUMBA`` environment flag (see :mod:`ontokit._accel`).

Semantics shared by both builds: scores are floored at zero, i.e. a pair
with score <= 0 is never part of the returned matching, and rectangular
inputs are handled by implicit zero padding. Both return the same optimum;
ties between equally scoring matchings may resolve differently.
"""

from __future__ import annotations

import numpy as np

from .._accel import jit_compile, resolve_use_numba
from ..errors import DataError

Matching = list[tuple[int, int, float]]


def _solve_square_loops(cost: np.ndarray) -> np.ndarray:
    """Min-cost perfect matching on a square cost matrix.

    Shortest augmenting paths with row/column potentials; one row is
    inserted per phase and each phase runs Dijkstra over column slacks.
    Written with bare loops so numba can compile it as-is. Returns
    row -> column assignments.
    """
    k = cost.shape[0]
    u = np.zeros(k + 1, dtype=np.float64)
    v = np.zeros(k + 1, dtype=np.float64)
    p = np.zeros(k + 1, dtype=np.int64)  # p[j]: row matched to column j (1-based, 0 = free)
    way = np.zeros(k + 1, dtype=np.int64)
    minv = np.empty(k + 1, dtype=np.float64)
    used = np.empty(k + 1, dtype=np.bool_)
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        for j in range(k + 1):
            minv[j] = np.inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, k + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(k + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(k, dtype=np.int64)
    for j in range(1, k + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col


_solve_square_jit = None


def _get_jit_kernel():
    global _solve_square_jit
    if _solve_square_jit is None:
        _solve_square_jit = jit_compile(_solve_square_loops)
    return _solve_square_jit


def _solve_square_numpy(cost: np.ndarray) -> np.ndarray:
    """Same algorithm as :func:`_solve_square_loops` with the column scan vectorized."""
    k = cost.shape[0]
    u = np.zeros(k + 1)
    v = np.zeros(k + 1)
    p = np.zeros(k + 1, dtype=np.intp)
    way = np.zeros(k + 1, dtype=np.intp)
    cols = np.arange(k + 1)
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        minv = np.full(k + 1, np.inf)
        used = np.zeros(k + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            idx = cols[free]
            cur = cost[i0 - 1, idx - 1] - u[i0] - v[idx]
            better = cur < minv[idx]
            upd = idx[better]
            minv[upd] = cur[better]
            way[upd] = j0
            j1 = idx[np.argmin(minv[idx])]
            delta = minv[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(k, dtype=np.intp)
    for j in range(1, k + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col


def solve_assignment(
    score_matrix: np.ndarray, use_numba: bool | None = None
) -> tuple[Matching, float]:
    """Maximum-total one-to-one matching over a rectangular score matrix.

    Returns the matched (row, col, score) triples and their total. Pairs
    scoring <= 0 are excluded (the zero floor), so an all-negative matrix
    yields an empty matching with total 0.
    """
    scores = np.asarray(score_matrix, dtype=np.float64)
    if scores.ndim != 2:
        raise DataError(f"score matrix must be 2-D, got shape {scores.shape}")
    if scores.size and not np.all(np.isfinite(scores)):
        raise DataError("score matrix contains non-finite entries")
    m, n = scores.shape
    if m == 0 or n == 0:
        return [], 0.0
    k = max(m, n)
    padded = np.zeros((k, k), dtype=np.float64)
    padded[:m, :n] = np.maximum(scores, 0.0)
    if resolve_use_numba(use_numba):
        row_to_col = _get_jit_kernel()(-padded)
    else:
        row_to_col = _solve_square_numpy(-padded)
    matching: Matching = []
    total = 0.0
    for i in range(m):
        j = int(row_to_col[i])
        if j < n and scores[i, j] > 0.0:
            matching.append((i, j, float(scores[i, j])))
            total += float(scores[i, j])
    return matching, total
