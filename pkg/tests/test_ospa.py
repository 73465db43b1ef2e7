import itertools

import numpy as np
import pytest

from lmbcontrol.ospa import OspaParams, ospa

P = OspaParams(c=100.0, p=2.0)


def brute_force_total(X, Y, params):
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    if len(X) > len(Y):
        X, Y = Y, X
    m, n = len(X), len(Y)
    if n == 0:
        return 0.0
    if m == 0:
        return params.c
    c, p = params.c, params.p
    best = np.inf
    for perm in itertools.permutations(range(n), m):
        s = sum(
            min(np.linalg.norm(X[i] - Y[perm[i]]), c) ** p for i in range(m)
        )
        best = min(best, s)
    return float(((best + c**p * (n - m)) / n) ** (1.0 / p))


def test_identical_sets():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert ospa(X, X, P) == (0.0, 0.0, 0.0)


def test_both_empty():
    z = np.zeros((0, 2))
    assert ospa(z, z, P) == (0.0, 0.0, 0.0)


def test_pure_cardinality_penalty():
    total, loc, card = ospa(np.zeros((0, 2)), np.array([[5.0, 5.0]]), P)
    assert (total, loc, card) == (100.0, 0.0, 100.0)


def test_sub_cutoff_distance():
    total, loc, card = ospa(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]]), P)
    assert total == pytest.approx(5.0)
    assert loc == pytest.approx(5.0)
    assert card == 0.0


def test_cutoff_applies():
    total, _, _ = ospa(np.array([[0.0, 0.0]]), np.array([[5000.0, 0.0]]), P)
    assert total == pytest.approx(100.0)


def test_matches_permutation_bruteforce(rng):
    for _ in range(30):
        m = int(rng.integers(0, 7))
        n = int(rng.integers(0, 7))
        X = rng.uniform(0, 400, size=(m, 2))
        Y = rng.uniform(0, 400, size=(n, 2))
        total, _, _ = ospa(X, Y, P)
        assert total == pytest.approx(brute_force_total(X, Y, P), abs=1e-9)


def test_symmetry(rng):
    for _ in range(10):
        X = rng.uniform(0, 400, size=(int(rng.integers(0, 5)), 2))
        Y = rng.uniform(0, 400, size=(int(rng.integers(0, 5)), 2))
        assert ospa(X, Y, P)[0] == pytest.approx(ospa(Y, X, P)[0], abs=1e-12)


def test_triangle_inequality_sampled(rng):
    for _ in range(50):
        X = rng.uniform(0, 400, size=(int(rng.integers(1, 5)), 2))
        Y = rng.uniform(0, 400, size=(int(rng.integers(1, 5)), 2))
        Z = rng.uniform(0, 400, size=(int(rng.integers(1, 5)), 2))
        dxy = ospa(X, Y, P)[0]
        dxz = ospa(X, Z, P)[0]
        dzy = ospa(Z, Y, P)[0]
        assert dxy <= dxz + dzy + 1e-9


def test_bounds_and_equal_cardinality(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        X = rng.uniform(0, 4000, size=(n, 2))
        Y = rng.uniform(0, 4000, size=(n, 2))
        total, loc, card = ospa(X, Y, P)
        assert total <= P.c + 1e-12
        assert card == 0.0
        assert total == pytest.approx(loc)


def test_params_validation():
    with pytest.raises(ValueError):
        OspaParams(c=0.0)
    with pytest.raises(ValueError):
        OspaParams(p=0.5)
