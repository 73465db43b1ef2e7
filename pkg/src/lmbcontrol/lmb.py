"""Sequential-Monte-Carlo labeled multi-Bernoulli filter.

Prediction keeps the LMB form (surviving components plus births); the update
enumerates hypotheses (label subset, association map) through a two-stage
truncation: the K best label subsets of the product-form predicted weight,
then the M best ranked assignments per subset.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .assignment import iter_ranked_assignments
from .models import (
    BirthModel,
    MeasurementModel,
    MotionModel,
    clutter_intensity,
    detection_prob,
    likelihood,
    predict_measurements,
    propagate,
)
from .rfs import (
    DistinctLabelError,
    Label,
    LmbComponent,
    ParticleDensity,
    clamp_r,
    eap_estimate,
    lmb_subset_weight,
    normalize,
)


class UpdateDegenerateError(RuntimeError):
    """Raised when truncation leaves no feasible update hypothesis."""


@dataclass(frozen=True)
class LmbDensity:
    """A labeled multi-Bernoulli density: one Bernoulli track per label."""

    components: tuple[LmbComponent, ...]

    def __init__(self, components: Sequence[LmbComponent] = ()):
        comps = tuple(components)
        labels = [c.label for c in comps]
        if len(set(labels)) != len(labels):
            raise DistinctLabelError("duplicate labels in LMB density")
        object.__setattr__(self, "components", comps)

    def __len__(self) -> int:
        return len(self.components)

    @property
    def labels(self) -> list[Label]:
        return [c.label for c in self.components]


@dataclass(frozen=True)
class Hypothesis:
    """Label subset, association map over that subset, normalized weight."""

    subset: tuple[Label, ...]
    assoc: tuple[int, ...]
    weight: float


@dataclass(frozen=True)
class TruncationConfig:
    """Hypothesis-truncation and particle-housekeeping settings.

    `hyp_floor` drops hypotheses whose unnormalized weight falls below
    `hyp_floor` times the best hypothesis seen; zero disables the floor and
    makes the enumeration exactly the top-K x top-M set.
    """

    k_subsets: int = 100
    m_assignments: int = 100
    prune_r: float = 1e-3
    max_particles: int = 1000
    gate_sigma: float = 6.0
    hyp_floor: float = 1e-9

    def __post_init__(self):
        if self.k_subsets < 1 or self.m_assignments < 1 or self.max_particles < 1:
            raise ValueError("truncation counts must be positive")


def predict(
    prior: LmbDensity,
    birth: BirthModel,
    motion: MotionModel,
    k: int,
    rng: np.random.Generator | None = None,
    n_birth_particles: int = 1000,
) -> LmbDensity:
    """LMB prediction: survival-scaled existing tracks plus new birth tracks."""
    comps = []
    for c in prior.components:
        states = propagate(c.density.states, motion, rng)
        comps.append(
            LmbComponent(
                label=c.label,
                r=motion.p_S * c.r,
                density=ParticleDensity(c.density.weights, states),
            )
        )
    for b in birth.components:
        label = Label(k, b.index)
        if rng is None:
            raise ValueError("birth sampling requires an RNG")
        states = rng.multivariate_normal(b.mean, b.cov, size=n_birth_particles)
        w = np.full(n_birth_particles, 1.0 / n_birth_particles)
        comps.append(LmbComponent(label=label, r=b.r, density=ParticleDensity(w, states)))
    return LmbDensity(comps)


def top_k_label_subsets(
    pred: LmbDensity, K: int
) -> list[tuple[tuple[Label, ...], float]]:
    """The K label subsets of largest product-form weight, exactly.

    Best-first search over include/exclude toggles relative to the maximum-
    weight subset {l : r_l > 0.5}. Equal-weight subsets are ordered by their
    inclusion pattern over lexicographically sorted labels, inclusion before
    exclusion (so {a, b} precedes {a} precedes {b} precedes {}).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    comps = sorted(pred.components, key=lambda c: c.label)
    labels = [c.label for c in comps]
    n = len(comps)
    logodds = np.array([math.log(clamp_r(c.r)) - math.log1p(-clamp_r(c.r)) for c in comps])

    base = frozenset(i for i in range(n) if logodds[i] > 0)
    toggle_cost = np.abs(logodds)
    order = sorted(range(n), key=lambda i: (toggle_cost[i], i))

    def emit(toggles):
        chosen = base.symmetric_difference(order[t] for t in toggles)
        key = tuple(0 if i in chosen else 1 for i in range(n))
        sub = tuple(labels[i] for i in sorted(chosen))
        return key, sub, lmb_subset_weight(comps, sub)

    # heap enumerates toggle subsets in non-decreasing toggle-cost order
    results: list[tuple[tuple[Label, ...], float]] = []
    group: list[tuple[tuple[int, ...], tuple[Label, ...], float]] = []
    group_cost = None
    heap = [(0.0, ())]
    while heap and (len(results) < K or group):
        cost, toggles = heapq.heappop(heap)
        if group and cost - group_cost > 1e-12 * max(1.0, abs(group_cost)):
            results.extend((sub, w) for _, sub, w in sorted(group))
            group = []
            if len(results) >= K:
                break
        if not group:
            group_cost = cost
        group.append(emit(toggles))
        last = toggles[-1] if toggles else -1
        if last + 1 < n:
            nxt = last + 1
            heapq.heappush(heap, (cost + toggle_cost[order[nxt]], toggles + (nxt,)))
            if toggles:
                heapq.heappush(
                    heap,
                    (cost - toggle_cost[order[last]] + toggle_cost[order[nxt]],
                     toggles[:-1] + (nxt,)),
                )
    results.extend((sub, w) for _, sub, w in sorted(group))
    return results[:K]


def resample(
    density: ParticleDensity, n: int, rng: np.random.Generator
) -> ParticleDensity:
    """Systematic resampling to n equally weighted particles."""
    d = normalize(density)
    positions = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(np.cumsum(d.weights), positions)
    idx = np.minimum(idx, len(d) - 1)
    return ParticleDensity(np.full(n, 1.0 / n), d.states[idx])


def psi_z(
    x: np.ndarray,
    sensor_pos: np.ndarray,
    z_index: int,
    Z: np.ndarray,
    model: MeasurementModel,
):
    """Per-state update factor: q_D for a miss, p_D g(z|x)/kappa(z) otherwise."""
    if z_index < 0 or z_index > len(Z):
        raise IndexError(f"measurement index {z_index} out of range")
    pd = detection_prob(sensor_pos, x, model)
    if z_index == 0:
        return 1.0 - pd
    z = Z[z_index - 1]
    kz = clutter_intensity(z, model)
    if kz <= 0.0:
        # a measurement outside the clutter support cannot be explained as
        # clutter; treat the pairing as infeasible
        return np.zeros_like(pd) if np.ndim(pd) else 0.0
    return pd * likelihood(z, sensor_pos, x, model) / kz


def _gate_mask(
    density: ParticleDensity,
    sensor_pos: np.ndarray,
    Z: np.ndarray,
    model: MeasurementModel,
    gate_sigma: float,
) -> np.ndarray:
    """Per-measurement gate: innovation Mahalanobis test against the particle
    cloud's predicted-measurement spread plus the sensor noise."""
    if not np.isfinite(gate_sigma):
        return np.ones(len(Z), dtype=bool)
    zhat = predict_measurements(sensor_pos, density.states)
    w = density.weights
    mask = np.empty(len(Z), dtype=bool)
    for j, z in enumerate(Z):
        from .models import wrap_angle

        dth = wrap_angle(z[0] - zhat[:, 0])
        dr = z[1] - zhat[:, 1]
        mth, mr = w @ dth, w @ dr
        vth = w @ (dth - mth) ** 2
        vr = w @ (dr - mr) ** 2
        d2 = mth**2 / (model.sigma_theta**2 + vth) + mr**2 / (model.sigma_r**2 + vr)
        mask[j] = d2 <= gate_sigma**2
    return mask


def update(
    pred: LmbDensity,
    Z: np.ndarray,
    sensor_pos: np.ndarray,
    model: MeasurementModel,
    trunc: TruncationConfig,
    rng: np.random.Generator | None = None,
) -> LmbDensity:
    """Measurement update of the predicted LMB density.

    Enumerates truncated hypotheses, mixes per-label particle weights over
    them, prunes low-existence components and (when an RNG is supplied)
    resamples each surviving component to `trunc.max_particles` particles.
    """
    comps = pred.components
    n, m = len(comps), len(Z)
    if n == 0:
        return LmbDensity([])

    # per-component association factors: psi[a][i, j] and eta[a, j]
    eta = np.zeros((n, m + 1))
    psi: list[np.ndarray] = []
    for a, c in enumerate(comps):
        w, x = c.density.weights, c.density.states
        pd = detection_prob(sensor_pos, x, model)
        P = np.zeros((len(w), m + 1))
        P[:, 0] = 1.0 - pd
        if m:
            keep = _gate_mask(c.density, sensor_pos, Z, model, trunc.gate_sigma)
            for j in range(m):
                if not keep[j]:
                    continue
                kz = clutter_intensity(Z[j], model)
                if kz <= 0.0:
                    continue
                P[:, j + 1] = pd * likelihood(Z[j], sensor_pos, x, model) / kz
        psi.append(P)
        eta[a] = w @ P

    label_to_idx = {c.label: a for a, c in enumerate(comps)}
    subsets = top_k_label_subsets(pred, trunc.k_subsets)

    hyps: list[tuple[tuple[int, ...], tuple[int, ...], float]] = []
    best = 0.0
    for subset, w_plus in subsets:
        idxs = tuple(label_to_idx[l] for l in subset)
        if not idxs:
            hyps.append(((), (), w_plus))
            best = max(best, w_plus)
            continue
        bound = w_plus * float(np.prod(eta[list(idxs)].max(axis=1)))
        if bound <= 0.0 or bound < trunc.hyp_floor * best:
            continue
        with np.errstate(divide="ignore"):
            cost = -np.log(eta[list(idxs)])
        for count, (theta, _) in enumerate(iter_ranked_assignments(cost)):
            if count >= trunc.m_assignments:
                break
            wgt = w_plus * float(
                np.prod([eta[a, j] for a, j in zip(idxs, theta)])
            )
            if wgt < trunc.hyp_floor * best:
                break
            hyps.append((idxs, theta, wgt))
            best = max(best, wgt)

    total = sum(h[2] for h in hyps)
    if not hyps or not total > 0.0:
        raise UpdateDegenerateError("no feasible hypothesis after truncation")

    # accumulate P(theta(label) = j) per component
    assoc_mass = np.zeros((n, m + 1))
    for idxs, theta, wgt in hyps:
        wn = wgt / total
        for a, j in zip(idxs, theta):
            assoc_mass[a, j] += wn

    out = []
    for a, c in enumerate(comps):
        r = float(assoc_mass[a].sum())
        if r <= 0.0 or r < trunc.prune_r:
            continue
        # mixture of per-assignment posteriors on the shared particle support
        mix = assoc_mass[a] / r
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(eta[a] > 0.0, mix / eta[a], 0.0)
        w_post = c.density.weights * (psi[a] @ coef)
        dens = normalize(ParticleDensity(w_post, c.density.states))
        if rng is not None:
            dens = resample(dens, trunc.max_particles, rng)
        out.append(LmbComponent(label=c.label, r=min(r, 1.0), density=dens))
    return LmbDensity(out)


def extract_tracks(
    post: LmbDensity, threshold: float = 0.5
) -> list[tuple[Label, np.ndarray]]:
    """EAP state per component whose existence probability exceeds threshold."""
    return [
        (c.label, eap_estimate(c.density))
        for c in post.components
        if c.r > threshold
    ]
