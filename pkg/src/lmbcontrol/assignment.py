"""Assignment solvers: optimal (Hungarian) and ranked (Murty) variants.

Ranked assignment operates on a cost matrix of shape (n_labels, n_meas + 1)
whose column 0 holds the missed-detection cost of each label and columns
1..n_meas the association costs. An association map theta is a tuple of
length n_labels with values in {0, .., n_meas}; nonzero values are distinct.

Solutions come out in non-decreasing total cost; groups of equal-cost
solutions are ordered by their theta tuples.
"""

from __future__ import annotations

import heapq
import itertools
from typing import Iterator

import numpy as np
from scipy.optimize import linear_sum_assignment

# finite sentinel standing in for an infeasible (infinite-cost) pairing
BIG = 1e15

# absolute/relative tolerance for grouping equal-cost solutions
TIE_TOL = 1e-9


def optimal_assignment(cost: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost injective assignment of min(n, m) row/column pairs."""
    c = np.asarray(cost, dtype=float)
    rows, cols = linear_sum_assignment(c)
    total = float(c[rows, cols].sum())
    return list(zip(rows.tolist(), cols.tolist())), total


def _expand(cost: np.ndarray) -> np.ndarray:
    """Rectangular matrix with one dedicated miss column per label."""
    n, m1 = cost.shape
    m = m1 - 1
    e = np.full((n, m + n), BIG)
    e[:, :m] = cost[:, 1:]
    e[np.arange(n), m + np.arange(n)] = cost[:, 0]
    return np.minimum(e, BIG)


def _solve_node(
    expanded: np.ndarray, forced: tuple[tuple[int, int], ...], forbidden: frozenset
) -> tuple[float, tuple[int, ...]] | None:
    """Best assignment under forced/forbidden pair constraints, or None."""
    n, ncols = expanded.shape
    forced_rows = {i for i, _ in forced}
    forced_cols = {j for _, j in forced}
    free_rows = [i for i in range(n) if i not in forced_rows]
    free_cols = [j for j in range(ncols) if j not in forced_cols]

    sol = [-1] * n
    total = 0.0
    for i, j in forced:
        if expanded[i, j] >= BIG:
            return None
        sol[i] = j
        total += expanded[i, j]
    if free_rows:
        sub = expanded[np.ix_(free_rows, free_cols)].copy()
        for i, j in forbidden:
            if i in forced_rows or j in forced_cols:
                continue
            sub[free_rows.index(i), free_cols.index(j)] = BIG
        ri, ci = linear_sum_assignment(sub)
        for a, b in zip(ri, ci):
            if sub[a, b] >= BIG:
                return None
            sol[free_rows[a]] = free_cols[b]
            total += sub[a, b]
    return total, tuple(sol)


def _cols_to_theta(sol: tuple[int, ...], m: int) -> tuple[int, ...]:
    return tuple(0 if j >= m else j + 1 for j in sol)


def _murty_raw(cost: np.ndarray) -> Iterator[tuple[float, tuple[int, ...]]]:
    """All feasible assignments in non-decreasing cost order (heap order)."""
    n, m1 = cost.shape
    m = m1 - 1
    if n == 0:
        yield 0.0, ()
        return
    expanded = _expand(cost)
    counter = itertools.count()
    root = _solve_node(expanded, (), frozenset())
    if root is None:
        return
    heap = [(root[0], next(counter), (), frozenset(), root[1])]
    while heap:
        total, _, forced, forbidden, sol = heapq.heappop(heap)
        yield total, _cols_to_theta(sol, m)
        forced_rows = {i for i, _ in forced}
        new_forced = list(forced)
        for i in range(n):
            if i in forced_rows:
                continue
            fb = forbidden | {(i, sol[i])}
            node = _solve_node(expanded, tuple(new_forced), fb)
            if node is not None:
                heapq.heappush(
                    heap, (node[0], next(counter), tuple(new_forced), fb, node[1])
                )
            new_forced.append((i, sol[i]))


def iter_ranked_assignments(cost: np.ndarray) -> Iterator[tuple[tuple[int, ...], float]]:
    """Feasible association maps in non-decreasing cost, ties sorted by theta."""
    c = np.asarray(cost, dtype=float)
    group: list[tuple[tuple[int, ...], float]] = []
    group_cost = None
    for total, theta in _murty_raw(c):
        if group and total - group_cost > TIE_TOL * max(1.0, abs(group_cost)):
            yield from sorted(group)
            group = []
        if not group:
            group_cost = total
        group.append((theta, total))
    yield from sorted(group)


def ranked_assignments(cost: np.ndarray, M: int) -> list[tuple[tuple[int, ...], float]]:
    """The M lowest-cost association maps (fewer if fewer are feasible)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return list(itertools.islice(iter_ranked_assignments(cost), M))
