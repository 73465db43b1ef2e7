"""Core data types for labeled/unlabeled multi-Bernoulli densities.

Single-target states are flat 5-vectors [x, y, vx, vy, omega]. Particle
densities hold a weight vector and a (n, 5) state matrix; all types are
treated as immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

STATE_DIM = 5

# index constants into the state vector
IX, IY, IVX, IVY, IOMEGA = range(STATE_DIM)

# existence probabilities are clamped to [R_EPS, 1 - R_EPS] before any
# r / (1 - r) product is formed
R_EPS = 1e-9


class DegenerateDensityError(ValueError):
    """Raised when a particle density has no usable weight mass."""


class InvalidSubsetError(ValueError):
    """Raised when a label subset refers to an unknown label."""


class DistinctLabelError(ValueError):
    """Raised on a duplicate label within one LMB density."""


@dataclass(frozen=True, order=True)
class Label:
    """Track label: scan of birth plus an index among simultaneous births."""

    birth_time: int
    birth_index: int


@dataclass(frozen=True)
class ParticleDensity:
    """Weighted particle approximation of a single-object spatial density."""

    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        x = np.ascontiguousarray(self.states, dtype=float)
        if w.ndim != 1 or w.shape[0] < 1:
            raise ValueError("weights must be a non-empty 1-D array")
        if x.ndim != 2 or x.shape != (w.shape[0], STATE_DIM):
            raise ValueError(
                f"states must have shape ({w.shape[0]}, {STATE_DIM}), got {x.shape}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", x)

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class LmbComponent:
    """One labeled Bernoulli track (label, existence probability, density)."""

    label: Label
    r: float
    density: ParticleDensity

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"existence probability out of [0, 1]: {self.r}")


@dataclass(frozen=True)
class BernoulliComponent:
    """Unlabeled Bernoulli component used by the control-loop update."""

    r: float
    density: ParticleDensity

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"existence probability out of [0, 1]: {self.r}")


def clamp_r(r: float) -> float:
    """Clamp an existence probability away from the endpoints 0 and 1."""
    return min(max(r, R_EPS), 1.0 - R_EPS)


def normalize(density: ParticleDensity) -> ParticleDensity:
    """Return a copy of `density` with weights scaled to sum to one."""
    w = density.weights
    if np.any(w < 0):
        raise DegenerateDensityError("negative particle weight")
    total = w.sum()
    if not total > 0:
        raise DegenerateDensityError("particle weights sum to zero")
    return ParticleDensity(w / total, density.states)


def lmb_subset_weight(components: Sequence[LmbComponent], subset: Iterable[Label]) -> float:
    """Product-form weight of one label subset of an LMB density.

    Equals prod_{i not in L} (1 - r_i) * prod_{l in L} r_l; the weights over
    the full power set of labels sum to one.
    """
    chosen = set(subset)
    known = {c.label for c in components}
    unknown = chosen - known
    if unknown:
        raise InvalidSubsetError(f"labels not in density: {sorted(unknown)}")
    w = 1.0
    for c in components:
        r = clamp_r(c.r)
        w *= r if c.label in chosen else (1.0 - r)
    return w


def eap_estimate(density: ParticleDensity) -> np.ndarray:
    """Weighted-mean (EAP) point estimate of a particle density."""
    d = normalize(density)
    return d.weights @ d.states
