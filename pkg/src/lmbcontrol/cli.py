"""Command-line entry points for the tracking simulator."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import click

from .config import MODES, ConfigError, RunConfig, load_config
from .harness import aggregate, emit_outputs, run_comparison, run_monte_carlo


def _load(config_path: str, seed, trials, mode=None) -> RunConfig:
    try:
        cfg = load_config(config_path)
        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if trials is not None:
            overrides["n_trials"] = trials
        if mode is not None:
            overrides["mode"] = mode
        return dataclasses.replace(cfg, **overrides) if overrides else cfg
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
def main():
    """LMB multi-target tracking with task-driven mobile-sensor control."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Base seed (overrides config).")
@click.option("--trials", type=int, default=None, help="Trial count (overrides config).")
@click.option("--mode", type=click.Choice(MODES), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="out")
@click.option("--plot", is_flag=True, help="Also write trajectory/error plots.")
@click.option("--workers", type=int, default=1, help="Parallel trial workers.")
def run(config_path, seed, trials, mode, out_dir, plot, workers):
    """Run Monte-Carlo trials in one filter mode and write CSV outputs."""
    cfg = _load(config_path, seed, trials, mode)
    records, agg = run_monte_carlo(cfg, cfg.n_trials, cfg.seed, workers)
    try:
        paths = emit_outputs(records, agg, cfg, out_dir, plot=plot)
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {len(paths)} files to {out_dir}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default="out")
@click.option("--plot", is_flag=True)
@click.option("--workers", type=int, default=1)
def compare(config_path, seed, trials, out_dir, plot, workers):
    """Run both filter modes on shared noise draws and write both outputs."""
    cfg = _load(config_path, seed, trials)
    results = run_comparison(cfg, cfg.n_trials, cfg.seed, workers)
    out = Path(out_dir)
    try:
        for mode, (records, agg) in results.items():
            mode_cfg = dataclasses.replace(cfg, mode=mode)
            emit_outputs(records, agg, mode_cfg, out / mode, plot=plot)
        _write_summary(results, out / "comparison.csv")
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote comparison outputs to {out_dir}")


def _write_summary(results, path: Path) -> None:
    import csv

    import numpy as np

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "mean_ospa_total", "mean_ospa_total_k21_50"])
        for mode, (_, agg) in results.items():
            curve = np.asarray(agg.ospa_total_mean)
            late = curve[20:] if len(curve) > 20 else curve
            w.writerow([mode, f"{curve.mean():.9g}", f"{late.mean():.9g}"])
