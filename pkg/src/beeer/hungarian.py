"""Exact maximum-weight assignment (Kuhn-Munkres, shortest augmenting path).

The rectangular N x M problem is padded to a square with zero-score dummy
rows/columns and solved as a minimisation over negated scores. Among all
optimal matchings the lexicographically smallest sorted pair list is
returned; it is found by walking rows in order over the equality subgraph of
the optimal dual potentials (every optimal matching lives in that subgraph).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[int, int], ...]
    n_pred: int
    n_gt: int

    def total(self, score) -> float:
        score = np.asarray(score, dtype=np.float64)
        return float(sum(score[i, j] for i, j in self.pairs))


def _solve_min(cost: np.ndarray):
    """O(n^3) Hungarian for a square cost matrix.

    Returns (row_to_col, u, v) where u/v are dual potentials satisfying
    cost[i, j] - u[i] - v[j] >= 0 with equality on the matching.
    """
    n = cost.shape[0]
    inf = np.inf
    # 1-based arrays; column 0 is the virtual source.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j] = row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    c = np.zeros((n + 1, n + 1))
    c[1:, 1:] = cost
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = c[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            cand = np.where(free, minv, inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:], v[1:]


def _lex_smallest(tight: list[list[int]], row_to_col: np.ndarray, n_real_rows: int) -> np.ndarray:
    """Rematch rows in order to their smallest feasible tight column."""
    n = len(row_to_col)
    row_to_col = row_to_col.copy()
    col_to_row = np.empty(n, dtype=np.int64)
    col_to_row[row_to_col] = np.arange(n)

    def augment(r, target, banned, fixed_upto, seen):
        # Alternating path from row r to the freed column ``target``.
        for col in tight[r]:
            if col == banned or col in seen:
                continue
            seen.add(col)
            if col == target:
                row_to_col[r] = col
                col_to_row[col] = r
                return True
            owner = col_to_row[col]
            if owner <= fixed_upto:
                continue
            if augment(owner, target, banned, fixed_upto, seen):
                row_to_col[r] = col
                col_to_row[col] = r
                return True
        return False

    for i in range(n_real_rows):
        current = row_to_col[i]
        for j in tight[i]:
            if j >= current:
                break
            r = col_to_row[j]
            if r < i:
                continue
            saved = (row_to_col.copy(), col_to_row.copy())
            # Give j to row i, free row i's old column, re-home row r.
            row_to_col[i] = j
            col_to_row[j] = i
            if augment(r, current, j, i, set()):
                break
            row_to_col[:], col_to_row[:] = saved
    return row_to_col


def hungarian_max(score) -> Assignment:
    """Maximum-total one-to-one matching of size min(N, M)."""
    score = np.asarray(score, dtype=np.float64)
    if score.ndim != 2:
        raise ValueError(f"score matrix must be 2-D, got shape {score.shape}")
    n_rows, n_cols = score.shape
    if n_rows == 0 or n_cols == 0:
        return Assignment((), n_rows, n_cols)
    if not np.all(np.isfinite(score)):
        raise ValueError("score matrix must be finite")
    n = max(n_rows, n_cols)
    padded = np.zeros((n, n))
    padded[:n_rows, :n_cols] = score
    cost = -padded
    row_to_col, u, v = _solve_min(cost)
    tol = 1e-9 * max(1.0, float(np.abs(score).max()))
    slack = cost - u[:, None] - v[None, :]
    tight = [list(np.flatnonzero(slack[i] <= tol)) for i in range(n)]
    for i in range(n):
        # The matched column is tight by construction; guard against rounding.
        if row_to_col[i] not in tight[i]:
            tight[i] = sorted(tight[i] + [int(row_to_col[i])])
    row_to_col = _lex_smallest(tight, row_to_col, n_rows)
    pairs = tuple(
        (i, int(row_to_col[i])) for i in range(n_rows) if row_to_col[i] < n_cols
    )
    return Assignment(pairs, n_rows, n_cols)
