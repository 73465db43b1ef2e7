"""OSPA multi-object miss distance with localization/cardinality split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import optimal_assignment


@dataclass(frozen=True)
class OspaParams:
    c: float = 100.0
    p: float = 2.0

    def __post_init__(self):
        if self.c <= 0 or self.p < 1:
            raise ValueError("require cutoff c > 0 and order p >= 1")


def ospa(
    X: np.ndarray, Y: np.ndarray, params: OspaParams = OspaParams()
) -> tuple[float, float, float]:
    """OSPA distance between 2-D point sets; (total, localization, cardinality).

    Distances are cut off at c before raising to the p-th power; both-empty
    input gives all zeros by convention.
    """
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    if len(X) > len(Y):
        X, Y = Y, X
    m, n = len(X), len(Y)
    if n == 0:
        return 0.0, 0.0, 0.0
    c, p = params.c, params.p
    if m == 0:
        return c, 0.0, c
    d = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=2)
    cost = np.minimum(d, c) ** p
    _, loc_sum = optimal_assignment(cost)
    loc = (loc_sum / n) ** (1.0 / p)
    card = (c**p * (n - m) / n) ** (1.0 / p)
    total = ((loc_sum + c**p * (n - m)) / n) ** (1.0 / p)
    return float(total), float(loc), float(card)
