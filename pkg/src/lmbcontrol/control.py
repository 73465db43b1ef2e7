"""Task-driven sensor control: pseudo-measurement evaluation of commands.

For every admissible command the sensor is hypothetically moved, an ideal
(noise- and clutter-free) measurement set is generated from the predicted
track estimates, the multi-Bernoulli update is run on it, and a normalized
cost combining cardinality spread and state spread is evaluated. The command
with the smallest cost wins; ties keep the earlier command (stay first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cbmember import MbDensity, cbmember_update, strip_labels
from .models import MeasurementModel, detection_prob, in_region, predict_measurements
from .rfs import IX, IY, eap_estimate


@dataclass(frozen=True)
class SensorState:
    x: float
    y: float

    @property
    def pos(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def moved(self, cmd: "SensorCommand") -> "SensorState":
        return SensorState(self.x + cmd.dx, self.y + cmd.dy)


@dataclass(frozen=True)
class SensorCommand:
    dx: float
    dy: float


@dataclass(frozen=True)
class ControlConfig:
    eta: float = 0.0
    move_radii: tuple[float, ...] = (25.0, 50.0)
    n_directions: int = 8
    include_stay: bool = True
    estimate_threshold: float = 0.5
    meas_track_floor: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if any(r <= 0 for r in self.move_radii):
            raise ValueError("move radii must be positive")
        if self.n_directions < 1:
            raise ValueError("need at least one heading")


def admissible_commands(cfg: ControlConfig) -> list[SensorCommand]:
    """Stay (optionally) plus evenly spaced headings at each radius."""
    cmds = []
    if cfg.include_stay:
        cmds.append(SensorCommand(0.0, 0.0))
    for rho in cfg.move_radii:
        for j in range(cfg.n_directions):
            phi = 2.0 * math.pi * j / cfg.n_directions
            cmds.append(SensorCommand(rho * math.cos(phi), rho * math.sin(phi)))
    return cmds


def pre_estimate(pred: MbDensity, threshold: float = 0.5) -> list[np.ndarray]:
    """EAP state of every component whose existence exceeds the threshold."""
    return [eap_estimate(c.density) for c in pred.components if c.r > threshold]


def pims(
    estimates: Sequence[np.ndarray],
    sensor_after: np.ndarray,
    model: MeasurementModel,
) -> np.ndarray:
    """Predicted ideal measurement set: noise-free, clutter-free, detectable."""
    out = []
    for est in estimates:
        if detection_prob(sensor_after, est, model) <= 0.0:
            continue
        z = predict_measurements(sensor_after, est)[0]
        if in_region(z, model):
            out.append(z)
    return np.array(out) if out else np.zeros((0, 2))


def cardinality_error(post: MbDensity) -> float:
    """Normalized cardinality variance, in [0, 1]; zero for an empty density."""
    if len(post) == 0:
        return 0.0
    r = np.array([c.r for c in post.components])
    return float(4.0 * np.sum(r * (1.0 - r)) / len(post))


def _component_state_error(c) -> float:
    w = c.density.weights / c.density.weights.sum()
    x = c.density.states[:, IX]
    y = c.density.states[:, IY]
    J = len(w)
    var_x = float(w @ x**2 - (w @ x) ** 2)
    var_y = float(w @ y**2 - (w @ y) ** 2)
    scale = (1.0 / J) * (1.0 - 1.0 / J)
    max_x = scale * float(np.sum(x**2))
    max_y = scale * float(np.sum(y**2))
    denom = max_x * max_y
    if denom <= 0.0:
        return 0.0
    return min(max(var_x * var_y / denom, 0.0), 1.0)


def state_error(post: MbDensity) -> float:
    """Existence-weighted average of normalized per-track position spread.

    Each track's error is the product of its weighted coordinate variances
    over the maxima attained by equally weighted particles; defined as 1
    (total uncertainty) when no existence mass remains.
    """
    r = np.array([c.r for c in post.components])
    if r.sum() <= 0.0:
        return 1.0
    errs = np.array([_component_state_error(c) for c in post.components])
    return float(np.sum(r * errs) / r.sum())


def peecs_cost(post: MbDensity, eta: float) -> float:
    """Convex combination of cardinality and state error terms."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    return eta * cardinality_error(post) + (1.0 - eta) * state_error(post)


def select_command(
    pred,
    sensor: SensorState,
    cfg: ControlConfig,
    model: MeasurementModel,
) -> tuple[SensorCommand, list[float]]:
    """Evaluate every admissible command and return the cheapest one.

    `pred` may be a labeled or unlabeled multi-Bernoulli density. Returns the
    chosen command together with the full per-command cost table.
    """
    cmds = admissible_commands(cfg)
    if not cmds:
        raise ValueError("empty command set")
    mb = strip_labels(pred)
    estimates = pre_estimate(mb, cfg.estimate_threshold)
    costs = []
    for cmd in cmds:
        s_pos = sensor.moved(cmd).pos
        z_ideal = pims(estimates, s_pos, model)
        post = cbmember_update(mb, z_ideal, s_pos, model, cfg.meas_track_floor)
        costs.append(peecs_cost(post, cfg.eta))
    best = int(np.argmin(costs))  # argmin keeps the first of any ties
    return cmds[best], costs
