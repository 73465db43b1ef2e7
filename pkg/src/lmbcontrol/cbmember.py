"""Cardinality-balanced multi-Bernoulli (CB-MeMBer) update, particle form.

Used inside the sensor-control loop on pseudo-measurements, and as the main
filter in the baseline comparison mode. The update produces one legacy
component per predicted component plus one measurement-corrected component
per measurement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .models import (
    BirthModel,
    MeasurementModel,
    MotionModel,
    clutter_intensity,
    detection_prob,
    likelihood,
    propagate,
)
from .rfs import BernoulliComponent, ParticleDensity, clamp_r, normalize

# measurement-corrected components below this existence probability are
# dropped; near-zero components only add noise to the normalized cost terms
MEAS_TRACK_FLOOR = 1e-4


@dataclass(frozen=True)
class MbDensity:
    """Unlabeled multi-Bernoulli density."""

    components: tuple[BernoulliComponent, ...]

    def __init__(self, components: Sequence[BernoulliComponent] = ()):
        object.__setattr__(self, "components", tuple(components))

    def __len__(self) -> int:
        return len(self.components)


def strip_labels(pred) -> MbDensity:
    """Unlabeled view of an LMB density: same (r, density) pairs, label order."""
    if isinstance(pred, MbDensity):
        return pred
    return MbDensity(
        [BernoulliComponent(c.r, c.density) for c in pred.components]
    )


def mb_predict(
    prior: MbDensity,
    birth: BirthModel,
    motion: MotionModel,
    rng: np.random.Generator,
    n_birth_particles: int = 1000,
) -> MbDensity:
    """Multi-Bernoulli prediction: survival-scaled tracks plus births."""
    comps = []
    for c in prior.components:
        states = propagate(c.density.states, motion, rng)
        comps.append(
            BernoulliComponent(motion.p_S * c.r, ParticleDensity(c.density.weights, states))
        )
    for b in birth.components:
        states = rng.multivariate_normal(b.mean, b.cov, size=n_birth_particles)
        w = np.full(n_birth_particles, 1.0 / n_birth_particles)
        comps.append(BernoulliComponent(b.r, ParticleDensity(w, states)))
    return MbDensity(comps)


def cbmember_update(
    pred: MbDensity,
    Z: np.ndarray,
    sensor_pos: np.ndarray,
    model: MeasurementModel,
    meas_track_floor: float = MEAS_TRACK_FLOOR,
) -> MbDensity:
    """Cardinality-balanced multi-Bernoulli measurement update.

    Legacy track i:
        r_L = r (1 - rho_L) / (1 - r rho_L),      rho_L = <p, p_D>
        p_L proportional to p(x) (1 - p_D(x))
    Measurement track for z:
        r_U(z) = sum_i r(1-r) rho_U(z) / (1 - r rho_L)^2
                 / (kappa(z) + sum_i r rho_U(z) / (1 - r rho_L))
        p_U(x; z) proportional to sum_i (r / (1-r)) p_i(x) p_D(x) g(z|x)
    """
    comps = pred.components
    n, m = len(comps), len(Z)
    if n == 0:
        return MbDensity([])

    pd_list, rho_L = [], np.empty(n)
    for i, c in enumerate(comps):
        pd = detection_prob(sensor_pos, c.density.states, model)
        pd_list.append(pd)
        rho_L[i] = c.density.weights @ pd
    r_arr = np.array([clamp_r(c.r) for c in comps])
    denom_L = 1.0 - r_arr * rho_L

    out = []
    for i, c in enumerate(comps):
        r_leg = float(c.r * (1.0 - rho_L[i]) / denom_L[i])
        w_leg = c.density.weights * (1.0 - pd_list[i])
        if w_leg.sum() > 0:
            dens = normalize(ParticleDensity(w_leg, c.density.states))
        else:
            # p_D = 1 everywhere: legacy existence is zero, keep prior shape
            r_leg = 0.0
            dens = c.density
        out.append(BernoulliComponent(min(max(r_leg, 0.0), 1.0), dens))

    for z in Z:
        kz = clutter_intensity(z, model)
        rho_U = np.empty(n)
        psi_parts = []
        for i, c in enumerate(comps):
            psi = pd_list[i] * likelihood(z, sensor_pos, c.density.states, model)
            psi_parts.append(psi)
            rho_U[i] = c.density.weights @ psi
        num = float(np.sum(r_arr * (1.0 - r_arr) * rho_U / denom_L**2))
        den = kz + float(np.sum(r_arr * rho_U / denom_L))
        if den <= 0.0:
            continue
        r_u = min(num / den, 1.0)
        if r_u < meas_track_floor:
            continue
        w_u = np.concatenate(
            [
                (r_arr[i] / (1.0 - r_arr[i])) * comps[i].density.weights * psi_parts[i]
                for i in range(n)
            ]
        )
        x_u = np.concatenate([c.density.states for c in comps], axis=0)
        if w_u.sum() <= 0.0:
            continue
        out.append(BernoulliComponent(r_u, normalize(ParticleDensity(w_u, x_u))))
    return MbDensity(out)
