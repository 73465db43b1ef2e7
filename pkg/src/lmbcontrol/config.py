"""Run configuration: dataclass defaults plus YAML overrides.

Every model parameter the scenario leaves open has an explicit default here;
a config file only needs the keys it wants to change. Angles are radians,
distances meters.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .control import ControlConfig
from .lmb import TruncationConfig
from .models import (
    BirthModel,
    MeasurementModel,
    MotionModel,
    TargetSpec,
    default_birth_model,
    default_targets,
)
from .ospa import OspaParams

MODES = ("lmb-peecs", "cbmember-peecs")


class ConfigError(ValueError):
    """Raised on unknown keys or invalid values in a run configuration."""


@dataclass(frozen=True)
class RunConfig:
    n_scans: int = 50
    n_trials: int = 20
    seed: int = 0
    mode: str = "lmb-peecs"
    sensor_init: tuple[float, float] = (0.0, 1500.0)
    extract_threshold: float = 0.5
    n_birth_particles: int = 1000
    birth_use_paper_means: bool = False
    motion: MotionModel = field(default_factory=MotionModel)
    measurement: MeasurementModel = field(default_factory=MeasurementModel)
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    ospa: OspaParams = field(default_factory=OspaParams)
    targets: tuple[TargetSpec, ...] | None = None

    def __post_init__(self):
        if self.n_scans < 1 or self.n_trials < 1:
            raise ConfigError("n_scans and n_trials must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")

    def resolved_targets(self) -> tuple[TargetSpec, ...]:
        if self.targets is not None:
            return self.targets
        return default_targets(self.n_scans)

    def birth_model(self) -> BirthModel:
        return default_birth_model(self.birth_use_paper_means)


def _build(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    kwargs = {}
    for key, val in data.items():
        if isinstance(val, list):
            val = tuple(val)
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


_SECTIONS = {
    "motion": MotionModel,
    "measurement": MeasurementModel,
    "truncation": TruncationConfig,
    "control": ControlConfig,
    "ospa": OspaParams,
}


def config_from_dict(data: dict[str, Any] | None) -> RunConfig:
    data = dict(data or {})
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            section = data.pop(name)
            if not isinstance(section, dict):
                raise ConfigError(f"section {name!r} must be a mapping")
            kwargs[name] = _build(cls, section, name)
    if "targets" in data:
        specs = data.pop("targets")
        if specs is not None:
            if not isinstance(specs, list):
                raise ConfigError("targets must be a list of mappings")
            kwargs["targets"] = tuple(
                _build(TargetSpec, t, f"targets[{i}]") for i, t in enumerate(specs)
            )
        else:
            kwargs["targets"] = None
    return _build(RunConfig, {**data, **kwargs}, "run config")


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a mapping")
    return config_from_dict(data)
