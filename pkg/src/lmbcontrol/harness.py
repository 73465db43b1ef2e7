"""End-to-end trial driver: predict -> control -> move -> measure -> update.

A trial's randomness is split into named streams derived from the trial seed
(detection, measurement noise, clutter, measurement ordering, filter-side
sampling) so that both filter modes consume identical ground truth and
identical detection/noise/clutter draws when run on the same seed.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cbmember import MbDensity, cbmember_update, mb_predict, strip_labels
from .config import RunConfig
from .control import SensorState, select_command
from .lmb import LmbDensity, extract_tracks, predict, resample, update
from .models import (
    GroundTruth,
    detection_prob,
    generate_ground_truth,
    measure,
    sample_clutter,
)
from .ospa import ospa
from .rfs import BernoulliComponent, eap_estimate

# hard cap on CB-MeMBer components in the baseline filter mode
MAX_MB_COMPONENTS = 100

_STREAMS = ("truth", "detection", "noise", "clutter", "shuffle", "filter")


@dataclass
class TrialRecord:
    """Per-scan log of one simulated trial."""

    seed: tuple[int, ...]
    mode: str
    sensor_x: list[float] = field(default_factory=list)
    sensor_y: list[float] = field(default_factory=list)
    commands: list[tuple[float, float]] = field(default_factory=list)
    cost_tables: list[list[float]] = field(default_factory=list)
    true_states: list[np.ndarray] = field(default_factory=list)
    tracks: list[list] = field(default_factory=list)
    n_true: list[int] = field(default_factory=list)
    n_est: list[int] = field(default_factory=list)
    ospa_total: list[float] = field(default_factory=list)
    ospa_loc: list[float] = field(default_factory=list)
    ospa_card: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ospa_total)


@dataclass(frozen=True)
class Aggregate:
    """Per-scan mean and std of the error curves over trials."""

    n_trials: int
    ospa_total_mean: np.ndarray
    ospa_total_std: np.ndarray
    ospa_loc_mean: np.ndarray
    ospa_loc_std: np.ndarray
    ospa_card_mean: np.ndarray
    ospa_card_std: np.ndarray
    card_err_mean: np.ndarray


def _rng_streams(seed) -> dict[str, np.random.Generator]:
    entropy = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    children = np.random.SeedSequence(entropy).spawn(len(_STREAMS))
    return {name: np.random.default_rng(c) for name, c in zip(_STREAMS, children)}


def generate_measurements(
    truth: GroundTruth,
    k: int,
    sensor_pos: np.ndarray,
    cfg: RunConfig,
    rngs: dict[str, np.random.Generator],
) -> np.ndarray:
    """Detections plus clutter at scan k, in shuffled order.

    Detection and noise variates are drawn for every live target regardless
    of the detection outcome, keeping the streams aligned across filter modes
    whose sensors follow different paths.
    """
    model = cfg.measurement
    zs = []
    for _, state in truth.alive_at(k):
        u = rngs["detection"].random()
        noise = rngs["noise"].normal(size=2)
        if u < detection_prob(sensor_pos, state, model):
            zs.append(measure(sensor_pos, state, model, noise=noise))
    clutter = sample_clutter(model, rngs["clutter"])
    all_z = np.array(zs + list(clutter)) if (zs or len(clutter)) else np.zeros((0, 2))
    perm = rngs["shuffle"].permutation(len(all_z))
    return all_z[perm]


def _mb_housekeeping(
    post: MbDensity, cfg: RunConfig, rng: np.random.Generator
) -> MbDensity:
    comps = [c for c in post.components if c.r >= cfg.truncation.prune_r]
    comps.sort(key=lambda c: -c.r)
    comps = comps[:MAX_MB_COMPONENTS]
    return MbDensity(
        [
            BernoulliComponent(c.r, resample(c.density, cfg.truncation.max_particles, rng))
            for c in comps
        ]
    )


def run_trial(cfg: RunConfig, seed) -> TrialRecord:
    """One full simulated trial; deterministic in (cfg, seed)."""
    rngs = _rng_streams(seed)
    truth = generate_ground_truth(
        cfg.motion, cfg.resolved_targets(), cfg.n_scans, rngs["truth"]
    )
    birth = cfg.birth_model()
    sensor = SensorState(*cfg.sensor_init)
    rec = TrialRecord(
        seed=tuple(seed) if isinstance(seed, (tuple, list)) else (seed,), mode=cfg.mode
    )

    lmb_prior = LmbDensity([])
    mb_prior = MbDensity([])

    for k in range(1, cfg.n_scans + 1):
        if cfg.mode == "lmb-peecs":
            pred = predict(
                lmb_prior, birth, cfg.motion, k, rngs["filter"], cfg.n_birth_particles
            )
            pred_mb = strip_labels(pred)
        else:
            pred_mb = mb_predict(
                mb_prior, birth, cfg.motion, rngs["filter"], cfg.n_birth_particles
            )

        cmd, costs = select_command(pred_mb, sensor, cfg.control, cfg.measurement)
        sensor = sensor.moved(cmd)

        Z = generate_measurements(truth, k, sensor.pos, cfg, rngs)

        if cfg.mode == "lmb-peecs":
            post = update(
                pred, Z, sensor.pos, cfg.measurement, cfg.truncation, rngs["filter"]
            )
            lmb_prior = post
            tracks = extract_tracks(post, cfg.extract_threshold)
            est_pos = np.array([s[:2] for _, s in tracks]) if tracks else np.zeros((0, 2))
        else:
            post = cbmember_update(
                pred_mb, Z, sensor.pos, cfg.measurement, cfg.control.meas_track_floor
            )
            mb_prior = _mb_housekeeping(post, cfg, rngs["filter"])
            tracks = [
                (i, eap_estimate(c.density))
                for i, c in enumerate(mb_prior.components)
                if c.r > cfg.extract_threshold
            ]
            est_pos = np.array([s[:2] for _, s in tracks]) if tracks else np.zeros((0, 2))

        true_pos = truth.positions_at(k)
        total, loc, card = ospa(est_pos, true_pos, cfg.ospa)

        rec.sensor_x.append(sensor.x)
        rec.sensor_y.append(sensor.y)
        rec.commands.append((cmd.dx, cmd.dy))
        rec.cost_tables.append(costs)
        rec.true_states.append(true_pos)
        rec.tracks.append(tracks)
        rec.n_true.append(len(true_pos))
        rec.n_est.append(len(tracks))
        rec.ospa_total.append(total)
        rec.ospa_loc.append(loc)
        rec.ospa_card.append(card)
    return rec


def trial_seeds(base_seed: int, n_trials: int) -> list[tuple[int, int]]:
    return [(base_seed, t) for t in range(n_trials)]


def _trial_task(args):
    cfg, seed = args
    return run_trial(cfg, seed)


def run_trials(
    cfg: RunConfig, n_trials: int, base_seed: int, workers: int = 1
) -> list[TrialRecord]:
    tasks = [(cfg, seed) for seed in trial_seeds(base_seed, n_trials)]
    if workers <= 1 or n_trials == 1:
        return [_trial_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so results are trial-ordered
        return list(pool.map(_trial_task, tasks))


def aggregate(records: list[TrialRecord]) -> Aggregate:
    """Order-insensitive per-scan statistics over trials."""
    tot = np.array([r.ospa_total for r in records])
    loc = np.array([r.ospa_loc for r in records])
    card = np.array([r.ospa_card for r in records])
    cerr = np.abs(
        np.array([r.n_est for r in records], dtype=float)
        - np.array([r.n_true for r in records], dtype=float)
    )
    return Aggregate(
        n_trials=len(records),
        ospa_total_mean=tot.mean(axis=0),
        ospa_total_std=tot.std(axis=0),
        ospa_loc_mean=loc.mean(axis=0),
        ospa_loc_std=loc.std(axis=0),
        ospa_card_mean=card.mean(axis=0),
        ospa_card_std=card.std(axis=0),
        card_err_mean=cerr.mean(axis=0),
    )


def run_monte_carlo(
    cfg: RunConfig, n_trials: int, base_seed: int, workers: int = 1
) -> tuple[list[TrialRecord], Aggregate]:
    records = run_trials(cfg, n_trials, base_seed, workers)
    return records, aggregate(records)


def run_comparison(
    cfg: RunConfig, n_trials: int, base_seed: int, workers: int = 1
) -> dict[str, tuple[list[TrialRecord], Aggregate]]:
    """Run both filter modes on identical per-trial seeds."""
    out = {}
    for mode in ("lmb-peecs", "cbmember-peecs"):
        mode_cfg = dataclasses.replace(cfg, mode=mode)
        out[mode] = run_monte_carlo(mode_cfg, n_trials, base_seed, workers)
    return out


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def write_trial_csv(rec: TrialRecord, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["k", "sensor_x", "sensor_y", "n_true", "n_est",
             "ospa_total", "ospa_loc", "ospa_card"]
        )
        for i in range(len(rec)):
            w.writerow(
                [i + 1, _fmt(rec.sensor_x[i]), _fmt(rec.sensor_y[i]),
                 rec.n_true[i], rec.n_est[i], _fmt(rec.ospa_total[i]),
                 _fmt(rec.ospa_loc[i]), _fmt(rec.ospa_card[i])]
            )


def write_costs_csv(rec: TrialRecord, cfg: RunConfig, path: Path) -> None:
    from .control import admissible_commands

    cmds = admissible_commands(cfg.control)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "command", "dx", "dy", "cost"])
        for i, costs in enumerate(rec.cost_tables):
            for j, cost in enumerate(costs):
                w.writerow([i + 1, j, _fmt(cmds[j].dx), _fmt(cmds[j].dy), _fmt(cost)])


def write_aggregate_csv(agg: Aggregate, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["k", "ospa_total_mean", "ospa_total_std", "ospa_loc_mean",
             "ospa_loc_std", "ospa_card_mean", "ospa_card_std", "card_err_mean"]
        )
        for i in range(len(agg.ospa_total_mean)):
            w.writerow(
                [i + 1, _fmt(agg.ospa_total_mean[i]), _fmt(agg.ospa_total_std[i]),
                 _fmt(agg.ospa_loc_mean[i]), _fmt(agg.ospa_loc_std[i]),
                 _fmt(agg.ospa_card_mean[i]), _fmt(agg.ospa_card_std[i]),
                 _fmt(agg.card_err_mean[i])]
            )


def emit_outputs(
    records: list[TrialRecord],
    agg: Aggregate,
    cfg: RunConfig,
    out_dir: str | Path,
    plot: bool = False,
) -> list[Path]:
    """Write per-trial and aggregate CSVs (plus plots when requested)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for i, rec in enumerate(records):
            p = out / f"trial_{i:03d}.csv"
            write_trial_csv(rec, p)
            paths.append(p)
        agg_path = out / "aggregate.csv"
        write_aggregate_csv(agg, agg_path)
        paths.append(agg_path)
        if plot:
            paths.extend(write_plots(records, agg, cfg, out))
        return paths
    except OSError as exc:
        raise OSError(f"failed writing outputs under {out}: {exc}") from exc


def write_plots(
    records: list[TrialRecord], agg: Aggregate, cfg: RunConfig, out: Path
) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    truth = generate_ground_truth(
        cfg.motion, cfg.resolved_targets(), cfg.n_scans, None
    )
    fig, ax = plt.subplots(figsize=(6, 6))
    for t in truth.tracks:
        ax.plot(t.states[:, 0], t.states[:, 1], "k-", lw=0.8)
        ax.plot(t.states[0, 0], t.states[0, 1], "ko", ms=3)
    rec = records[0]
    ax.plot(rec.sensor_x, rec.sensor_y, "b.-", lw=1, label="sensor")
    ax.plot(rec.sensor_x[0], rec.sensor_y[0], "bs", label="sensor start")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend()
    ax.set_title("Sensor and target trajectories")
    traj = out / "trajectory.svg"
    fig.savefig(traj)
    plt.close(fig)

    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    k = np.arange(1, len(agg.ospa_total_mean) + 1)
    for ax_, mean, label in (
        (axes[0], agg.ospa_card_mean, "OSPA cardinality"),
        (axes[1], agg.ospa_loc_mean, "OSPA localization"),
        (axes[2], agg.ospa_total_mean, "OSPA total"),
    ):
        ax_.plot(k, mean)
        ax_.set_ylabel(label)
    axes[2].set_xlabel("scan")
    errs = out / "errors.svg"
    fig.savefig(errs)
    plt.close(fig)
    return [traj, errs]
