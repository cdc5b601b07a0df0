"""Minimum-cost assignment with deterministic tie-breaking.

`hungarian_assign` solves the rectangular linear assignment problem and,
among all minimum-cost solutions, returns the one whose (row, col) pair list
is lexicographically smallest. Determinism matters here: keypoint grouping
feeds these assignments into cluster updates, and pipeline outputs must be
bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonFiniteCost, ShapeMismatch

# Slack when comparing candidate totals against the optimum; only affects
# which of several (near-)equal-cost optima is preferred.
_TIE_TOL = 1e-9

# Below this size every smaller column is tried during the lexicographic
# refinement; above it, candidates are pre-filtered by zero reduced cost
# (exact for square matrices, where complementary slackness makes tightness
# a necessary condition for membership in any optimal assignment).
_EXHAUSTIVE_LIMIT = 12


def _solve(cost: list[list[float]], m: int, n: int) -> tuple[float, list[int], list[float], list[float]]:
    """Shortest-augmenting-path assignment for m <= n.

    Returns (total, col_of_row, u, v) where col_of_row[i] is the column
    assigned to row i and (u, v) are optimal potentials with non-negative
    reduced costs (0-based, lengths m and n).
    """
    inf = math.inf
    u = [0.0] * (m + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = 1-based row assigned to column j
    way = [0] * (n + 1)    # way[j] = previous column on the augmenting path
    for i in range(1, m + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            ui0 = u[i0]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - ui0 - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    col_of_row = [-1] * m
    total = 0.0
    for j in range(1, n + 1):
        if match[j]:
            col_of_row[match[j] - 1] = j - 1
            total += cost[match[j] - 1][j - 1]
    return total, col_of_row, u[1:], v[1:]


def _solve_oriented(arr: np.ndarray) -> tuple[float, dict[int, int], np.ndarray, np.ndarray]:
    """Solve an arbitrary matrix; returns (total, row->col map, u, v).

    u has one entry per row, v one per column, aligned with `arr` regardless
    of the internal transpose.
    """
    m, n = arr.shape
    if m == 0 or n == 0:
        return 0.0, {}, np.zeros(m), np.zeros(n)
    if m <= n:
        total, cols, u, v = _solve(arr.tolist(), m, n)
        return total, {r: c for r, c in enumerate(cols)}, np.asarray(u), np.asarray(v)
    total, rows_of_col, u, v = _solve(arr.T.tolist(), n, m)
    mapping = {r: c for c, r in enumerate(rows_of_col)}
    return total, mapping, np.asarray(v), np.asarray(u)


def _residual_total(arr: np.ndarray, rows: list[int], cols: list[int]) -> tuple[float, dict[int, int]]:
    """Optimal total and assignment of the submatrix arr[rows][:, cols],
    with the mapping expressed in original indices."""
    sub = arr[np.ix_(rows, cols)]
    total, mapping, _, _ = _solve_oriented(sub)
    return total, {rows[r]: cols[c] for r, c in mapping.items()}


def hungarian_assign(cost: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-cost matching covering min(m, n) (row, col) pairs.

    Among equal-cost optima the lexicographically smallest pair list wins:
    rows are fixed in ascending order to the smallest column that still
    permits an optimal completion.

    Raises:
        ShapeMismatch: cost is not 2-D.
        NonFiniteCost: cost contains NaN or +/-inf.
    """
    arr = np.asarray(cost, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"cost matrix must be 2-D, got shape {arr.shape}")
    m, n = arr.shape
    if m == 0 or n == 0:
        return []
    if not np.all(np.isfinite(arr)):
        raise NonFiniteCost("cost matrix contains non-finite entries")

    opt, hint, u, v = _solve_oriented(arr)
    tol = _TIE_TOL * max(1.0, abs(opt))
    exhaustive = max(m, n) <= _EXHAUSTIVE_LIMIT

    pairs: list[tuple[int, int]] = []
    free_cols = list(range(n))
    fixed = 0.0
    need = min(m, n)

    for r in range(m):
        if need == 0:
            break
        hint_col = hint.get(r, -1)
        if exhaustive:
            candidates = [c for c in free_cols if hint_col < 0 or c < hint_col]
        else:
            reduced = arr[r, free_cols] - u[r] - v[free_cols]
            candidates = [
                c for c, rc in zip(free_cols, reduced)
                if (hint_col < 0 or c < hint_col) and abs(rc) <= tol
            ]
        chosen = hint_col
        rows_left = list(range(r + 1, m))
        for c in candidates:
            rest = [j for j in free_cols if j != c]
            res_total, res_map = _residual_total(arr, rows_left, rest)
            if abs(fixed + arr[r, c] + res_total - opt) <= tol:
                chosen = c
                hint = res_map
                break
        if chosen >= 0:
            pairs.append((r, int(chosen)))
            free_cols.remove(chosen)
            fixed += arr[r, chosen]
            need -= 1
        # otherwise every optimal solution leaves row r unassigned (m > n)

    if len(pairs) != min(m, n):
        raise AssertionError("assignment failed to cover min(m, n) pairs")
    return pairs


def assignment_total(cost: np.ndarray, pairs: list[tuple[int, int]]) -> float:
    """Sum the matrix entries of an assignment in ascending row order."""
    arr = np.asarray(cost, dtype=np.float64)
    return float(sum(arr[r, c] for r, c in sorted(pairs)))
