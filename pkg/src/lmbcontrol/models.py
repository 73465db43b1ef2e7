"""Scenario models: constant-turn dynamics, range-bearing sensing, clutter.

Measurement geometry is relative to the (mobile) sensor: a measurement is
[bearing, range] of the target position minus the sensor position, with the
bearing measured from the +y axis, i.e. atan2(dx, dy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rfs import IOMEGA, IVX, IVY, IX, IY, STATE_DIM

# below this |omega * T| the constant-velocity limit of the turn matrix is used
OMEGA_SINGULARITY = 1e-6


class CoincidentPositionError(ValueError):
    """Raised when a bearing is requested for a target at the sensor position."""


@dataclass(frozen=True)
class MotionModel:
    """Nearly-constant-turn dynamics with white acceleration/turn-rate noise."""

    T: float = 1.0
    sigma_eps: float = 15.0
    sigma_gamma: float = math.pi / 180.0
    p_S: float = 0.99

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("sampling period must be positive")
        if self.sigma_eps < 0 or self.sigma_gamma < 0:
            raise ValueError("noise std must be non-negative")
        if not 0.0 <= self.p_S <= 1.0:
            raise ValueError("survival probability out of [0, 1]")


@dataclass(frozen=True)
class MeasurementModel:
    """Range-bearing sensor with range-dependent detection and uniform clutter.

    Detection is certain within radius `R0` of the sensor and decays linearly
    with slope `h` beyond it. Clutter is uniform Poisson with intensity
    `lambda_c` over `bearing_lim x range_lim`.
    """

    sigma_theta: float = math.pi / 180.0
    sigma_r: float = 5.0
    R0: float = 1000.0
    h: float = 0.001
    lambda_c: float = 1.6e-3
    bearing_lim: tuple[float, float] = (-math.pi, math.pi)
    range_lim: tuple[float, float] = (0.0, 2000.0)

    def __post_init__(self):
        if self.sigma_theta <= 0 or self.sigma_r <= 0:
            raise ValueError("measurement noise std must be positive")
        if self.R0 < 0 or self.h < 0 or self.lambda_c < 0:
            raise ValueError("R0, h and lambda_c must be non-negative")
        if self.bearing_lim[1] <= self.bearing_lim[0] or self.range_lim[1] <= self.range_lim[0]:
            raise ValueError("surveillance region is empty")

    @property
    def region_area(self) -> float:
        return (self.bearing_lim[1] - self.bearing_lim[0]) * (
            self.range_lim[1] - self.range_lim[0]
        )


@dataclass(frozen=True)
class BirthComponent:
    """Gaussian birth term: existence probability, mean and covariance."""

    r: float
    mean: np.ndarray
    cov: np.ndarray
    index: int

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("birth probability out of [0, 1]")
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))


@dataclass(frozen=True)
class BirthModel:
    components: tuple[BirthComponent, ...]


@dataclass(frozen=True)
class TargetSpec:
    """Initial state and lifetime [birth, death) of one true target."""

    state: np.ndarray
    birth: int = 1
    death: int = 51

    def __post_init__(self):
        object.__setattr__(self, "state", np.asarray(self.state, dtype=float))


@dataclass(frozen=True)
class TrueTrack:
    track_id: int
    birth: int
    death: int
    states: np.ndarray  # (death - birth, STATE_DIM)


@dataclass(frozen=True)
class GroundTruth:
    tracks: tuple[TrueTrack, ...]
    n_scans: int

    def alive_at(self, k: int) -> list[tuple[int, np.ndarray]]:
        """Targets alive at scan k, sorted by track id."""
        out = []
        for t in self.tracks:
            if t.birth <= k < t.death:
                out.append((t.track_id, t.states[k - t.birth]))
        return out

    def positions_at(self, k: int) -> np.ndarray:
        alive = self.alive_at(k)
        if not alive:
            return np.zeros((0, 2))
        return np.array([s[:2] for _, s in alive])


# initial target states of the default scenario: five closely spaced targets
DEFAULT_INITIAL_STATES = (
    (800.0, 600.0, 1.0, 0.0, 0.0),
    (650.0, 500.0, 0.3, 0.6, 0.0),
    (620.0, 700.0, 0.25, 0.45, 0.0),
    (750.0, 800.0, 0.0, 0.6, 0.0),
    (700.0, 700.0, 0.2, 0.6, 0.0),
)

# reported birth means place tracks far from the actual initial targets; kept
# selectable through config, not used by default
PAPER_BIRTH_MEANS = (
    (-1500.0, 0.0, 250.0, 0.0, 0.0),
    (-250.0, 0.0, 1000.0, 0.0, 0.0),
    (250.0, 0.0, 750.0, 0.0, 0.0),
    (1000.0, 0.0, 1500.0, 0.0, 0.0),
)

BIRTH_EXISTENCE = (0.02, 0.02, 0.03, 0.03)

BIRTH_COV = np.diag(
    [50.0**2, 50.0**2, 50.0**2, 50.0**2, (6.0 * math.pi / 180.0) ** 2]
)


def default_birth_model(use_paper_means: bool = False) -> BirthModel:
    """Four-component LMB birth model for the default scenario."""
    if use_paper_means:
        means = PAPER_BIRTH_MEANS
    else:
        means = tuple(s[:2] + (0.0, 0.0, 0.0) for s in DEFAULT_INITIAL_STATES[:4])
    comps = tuple(
        BirthComponent(r=r, mean=np.array(m), cov=BIRTH_COV.copy(), index=i)
        for i, (r, m) in enumerate(zip(BIRTH_EXISTENCE, means))
    )
    return BirthModel(comps)


def ct_transition_matrix(omega: float, T: float) -> np.ndarray:
    """Coordinated-turn transition matrix for [x, y, vx, vy].

    Uses the analytic constant-velocity limit for |omega * T| below the
    singularity threshold.
    """
    if T <= 0:
        raise ValueError("sampling period must be positive")
    wt = omega * T
    if abs(wt) < OMEGA_SINGULARITY:
        a, b = T, 0.0
        c, s = 1.0, 0.0
    else:
        s, c = math.sin(wt), math.cos(wt)
        a = s / omega
        b = (1.0 - c) / omega
    return np.array(
        [
            [1.0, 0.0, a, -b],
            [0.0, 1.0, b, a],
            [0.0, 0.0, c, -s],
            [0.0, 0.0, s, c],
        ]
    )


def propagate(
    states: np.ndarray, model: MotionModel, rng: np.random.Generator | None = None
) -> np.ndarray:
    """One noisy constant-turn step for a single state or a batch of states.

    With `rng` None (or zero noise stds) the step is deterministic.
    """
    x = np.atleast_2d(np.asarray(states, dtype=float))
    single = np.asarray(states).ndim == 1
    T = model.T
    wt = x[:, IOMEGA] * T
    s, c = np.sin(wt), np.cos(wt)
    small = np.abs(wt) < OMEGA_SINGULARITY
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(small, T, s / x[:, IOMEGA])
        b = np.where(small, 0.0, (1.0 - c) / x[:, IOMEGA])
    c = np.where(small, 1.0, c)
    s = np.where(small, 0.0, s)

    out = np.empty_like(x)
    out[:, IX] = x[:, IX] + a * x[:, IVX] - b * x[:, IVY]
    out[:, IY] = x[:, IY] + b * x[:, IVX] + a * x[:, IVY]
    out[:, IVX] = c * x[:, IVX] - s * x[:, IVY]
    out[:, IVY] = s * x[:, IVX] + c * x[:, IVY]
    out[:, IOMEGA] = x[:, IOMEGA]

    if rng is not None and (model.sigma_eps > 0 or model.sigma_gamma > 0):
        eps = rng.normal(0.0, model.sigma_eps, size=(x.shape[0], 2))
        gamma = rng.normal(0.0, model.sigma_gamma, size=x.shape[0])
        out[:, IX] += 0.5 * T * T * eps[:, 0]
        out[:, IY] += 0.5 * T * T * eps[:, 1]
        out[:, IVX] += T * eps[:, 0]
        out[:, IVY] += T * eps[:, 1]
        out[:, IOMEGA] += T * gamma
    return out[0] if single else out


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta), 2.0 * np.pi)


def predict_measurements(sensor_pos: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Noise-free [bearing, range] of states (n, >=2) relative to the sensor."""
    x = np.atleast_2d(np.asarray(states, dtype=float))
    dx = x[:, IX] - sensor_pos[0]
    dy = x[:, IY] - sensor_pos[1]
    return np.column_stack([np.arctan2(dx, dy), np.hypot(dx, dy)])


def measure(
    sensor_pos: np.ndarray,
    target: np.ndarray,
    model: MeasurementModel,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """Range-bearing measurement of one target; noise-free when rng is None.

    `noise` may supply a pre-drawn standard-normal pair, which takes
    precedence over `rng` (used to share noise draws between filter modes).
    """
    t = np.asarray(target, dtype=float)
    dx, dy = t[IX] - sensor_pos[0], t[IY] - sensor_pos[1]
    if dx == 0.0 and dy == 0.0:
        raise CoincidentPositionError("bearing undefined: target at sensor position")
    z = np.array([math.atan2(dx, dy), math.hypot(dx, dy)])
    if noise is None and rng is not None:
        noise = rng.normal(size=2)
    if noise is not None:
        z = z + np.asarray(noise) * np.array([model.sigma_theta, model.sigma_r])
        z[0] = wrap_angle(z[0])
        z[1] = max(z[1], model.range_lim[0])
    return z


def detection_prob(sensor_pos: np.ndarray, states: np.ndarray, model: MeasurementModel):
    """Detection probability per Eq-style cutoff profile; scalar in, scalar out."""
    x = np.atleast_2d(np.asarray(states, dtype=float))
    d = np.hypot(x[:, IX] - sensor_pos[0], x[:, IY] - sensor_pos[1])
    p = np.where(d <= model.R0, 1.0, np.maximum(0.0, 1.0 - model.h * (d - model.R0)))
    return float(p[0]) if np.asarray(states).ndim == 1 else p


def sample_clutter(model: MeasurementModel, rng: np.random.Generator) -> np.ndarray:
    """Poisson-distributed uniform clutter over the surveillance region, (n, 2)."""
    n = rng.poisson(model.lambda_c * model.region_area)
    theta = rng.uniform(*model.bearing_lim, size=n)
    rr = rng.uniform(*model.range_lim, size=n)
    return np.column_stack([theta, rr])


def in_region(z: np.ndarray, model: MeasurementModel) -> bool:
    return bool(
        model.bearing_lim[0] <= z[0] <= model.bearing_lim[1]
        and model.range_lim[0] <= z[1] <= model.range_lim[1]
    )


def clutter_intensity(z: np.ndarray, model: MeasurementModel) -> float:
    """Uniform clutter intensity: lambda_c inside the region, zero outside."""
    return model.lambda_c if in_region(np.asarray(z, dtype=float), model) else 0.0


def likelihood(
    z: np.ndarray, sensor_pos: np.ndarray, states: np.ndarray, model: MeasurementModel
):
    """Gaussian measurement likelihood g(z | x) with wrapped bearing residual."""
    zhat = predict_measurements(sensor_pos, states)
    dtheta = wrap_angle(z[0] - zhat[:, 0])
    dr = z[1] - zhat[:, 1]
    norm = 1.0 / (2.0 * math.pi * model.sigma_theta * model.sigma_r)
    g = norm * np.exp(
        -0.5 * ((dtheta / model.sigma_theta) ** 2 + (dr / model.sigma_r) ** 2)
    )
    return float(g[0]) if np.asarray(states).ndim == 1 else g


def generate_ground_truth(
    motion: MotionModel,
    targets: Sequence[TargetSpec],
    n_scans: int,
    rng: np.random.Generator | None = None,
) -> GroundTruth:
    """Deterministic ground-truth tracks (zero process noise by default)."""
    tracks = []
    for tid, spec in enumerate(targets):
        death = min(spec.death, n_scans + 1)
        if death <= spec.birth:
            continue
        states = np.empty((death - spec.birth, STATE_DIM))
        states[0] = spec.state
        for i in range(1, states.shape[0]):
            states[i] = propagate(states[i - 1], motion, None)
        tracks.append(TrueTrack(tid, spec.birth, death, states))
    return GroundTruth(tuple(tracks), n_scans)


def default_targets(n_scans: int = 50) -> tuple[TargetSpec, ...]:
    return tuple(
        TargetSpec(np.array(s), birth=1, death=n_scans + 1)
        for s in DEFAULT_INITIAL_STATES
    )
