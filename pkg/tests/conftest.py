"""Shared fixtures and independent brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from lmbcontrol.rfs import Label, LmbComponent, ParticleDensity
from lmbcontrol.lmb import LmbDensity
from lmbcontrol.models import detection_prob, likelihood, clutter_intensity

TIE_TOL = 1e-9


def random_particle_density(rng, n=None, scale=100.0):
    n = n or int(rng.integers(1, 8))
    w = rng.random(n) + 0.05
    x = rng.normal(500.0, scale, size=(n, 5))
    return ParticleDensity(w / w.sum(), x)


def random_lmb(rng, n_comps=None, r_lo=0.02, r_hi=0.98):
    n_comps = n_comps if n_comps is not None else int(rng.integers(1, 6))
    comps = []
    for i in range(n_comps):
        lab = Label(int(rng.integers(0, 3)), i)
        comps.append(
            LmbComponent(lab, float(rng.uniform(r_lo, r_hi)), random_particle_density(rng))
        )
    return LmbDensity(comps)


def powerset(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def oracle_subset_ranking(density, K):
    """Exhaustive power-set ranking with the documented tie rule.

    Subsets sorted by descending product-form weight; equal-weight subsets
    ordered by their inclusion-indicator tuple over lexicographically sorted
    labels (0 = included), so {a,b} < {a} < {b} < {}.
    """
    comps = sorted(density.components, key=lambda c: c.label)
    rs = [c.r for c in comps]
    entries = []
    for chosen in powerset(range(len(comps))):
        cset = set(chosen)
        w = 1.0
        for i, r in enumerate(rs):
            w *= r if i in cset else (1.0 - r)
        key = tuple(0 if i in cset else 1 for i in range(len(comps)))
        sub = tuple(comps[i].label for i in sorted(cset))
        entries.append((w, key, sub))
    entries.sort(key=lambda e: -e[0])
    out, group, gw = [], [], None
    for w, key, sub in entries:
        if group and gw - w > 1e-12 * max(1.0, abs(gw)):
            out.extend(sorted(group))
            group = []
        if not group:
            gw = w
        group.append((key, sub, w))
    out.extend(sorted(group))
    return [(sub, w) for _, sub, w in out[:K]]


def all_association_maps(n, m):
    """Every map theta: rows -> {0..m} injective on nonzero values."""
    def rec(i, used):
        if i == n:
            yield ()
            return
        for j in range(m + 1):
            if j != 0 and j in used:
                continue
            for rest in rec(i + 1, used | ({j} if j else set())):
                yield (j,) + rest
    yield from rec(0, frozenset())


def oracle_ranked_assignments(cost, M):
    """Brute-force ranked assignments with the documented tie rule."""
    c = np.asarray(cost, dtype=float)
    n, m1 = c.shape
    m = m1 - 1
    items = []
    for theta in all_association_maps(n, m):
        vals = [c[i, j] for i, j in enumerate(theta)]
        if any(not np.isfinite(v) or v >= 1e15 for v in vals):
            continue
        items.append((theta, float(sum(vals))))
    items.sort(key=lambda t: t[1])
    out, group, gc = [], [], None
    for theta, total in items:
        if group and total - gc > TIE_TOL * max(1.0, abs(gc)):
            out.extend(sorted(group))
            group = []
        if not group:
            gc = total
        group.append((theta, total))
    out.extend(sorted(group))
    return out[:M]


def oracle_lmb_update(pred, Z, sensor_pos, model):
    """Exhaustive-enumeration LMB update: every subset, every association map.

    Returns {label: (r, posterior particle weights)} with no truncation,
    pruning or resampling.
    """
    comps = list(pred.components)
    n, m = len(comps), len(Z)
    eta = np.zeros((n, m + 1))
    psi = []
    for a, c in enumerate(comps):
        w, x = c.density.weights, c.density.states
        pd = detection_prob(sensor_pos, x, model)
        P = np.zeros((len(w), m + 1))
        P[:, 0] = 1.0 - pd
        for j in range(m):
            kz = clutter_intensity(Z[j], model)
            if kz > 0.0:
                P[:, j + 1] = pd * likelihood(Z[j], sensor_pos, x, model) / kz
        psi.append(P)
        eta[a] = w @ P

    hyps = []
    for chosen in powerset(range(n)):
        wI = 1.0
        for i, c in enumerate(comps):
            wI *= c.r if i in chosen else (1.0 - c.r)
        for theta in all_association_maps(len(chosen), m):
            wgt = wI * float(np.prod([eta[a, j] for a, j in zip(chosen, theta)]))
            if wgt > 0.0:
                hyps.append((chosen, theta, wgt))
    total = sum(h[2] for h in hyps)

    out = {}
    for a, c in enumerate(comps):
        mass = np.zeros(m + 1)
        for chosen, theta, wgt in hyps:
            if a in chosen:
                mass[theta[chosen.index(a)]] += wgt / total
        r = mass.sum()
        if r <= 0.0:
            continue
        w_post = np.zeros(len(c.density))
        for j in range(m + 1):
            if mass[j] > 0.0:
                w_post += (mass[j] / r) * c.density.weights * psi[a][:, j] / eta[a, j]
        out[c.label] = (float(r), w_post / w_post.sum())
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
