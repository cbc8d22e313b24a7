"""Execute resolved scenarios and write their output files."""

from __future__ import annotations

import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .ensemble import DriveScenario, EnsembleConfig, run_ensemble
from .errors import ConfigError
from .fields import (
    estimate_cross_correlation,
    estimate_g1,
    event_log_to_csv,
    realization_to_csv,
    sample_field,
)
from .output import (
    check_overwrite,
    write_correlations_csv,
    write_manifest,
    write_observables_csv,
)
from .whitenoise import WhiteNoiseState, solve_white_noise

__all__ = ["run_scenario", "apply_overrides"]


def apply_overrides(
    raw: dict,
    seed: int | None = None,
    trajectories: int | None = None,
    workers: int | None = None,
) -> dict:
    """Fold CLI overrides into a parsed (unresolved) config dict."""
    mode = raw.get("mode")
    if seed is not None:
        if mode == "field_stats":
            raw.setdefault("field_stats", {})["master_seed"] = seed
        elif mode == "partially_coherent":
            raw.setdefault("ensemble", {})["master_seed"] = seed
    if trajectories is not None:
        if mode == "field_stats":
            raw.setdefault("field_stats", {})["n_realizations"] = trajectories
        elif mode == "partially_coherent":
            raw.setdefault("ensemble", {})["n_trajectories"] = trajectories
    if workers is not None and mode == "partially_coherent":
        raw.setdefault("ensemble", {})["workers"] = workers
    return raw


def _run_white_noise(cfg: ScenarioConfig):
    initial = WhiteNoiseState(1.0, 0.0, 0.0, 0.0j)
    return solve_white_noise(cfg.pump, initial, cfg.grid, method=cfg.wn_method)


def _run_partially_coherent(cfg: ScenarioConfig, workers: int | None):
    scenario = DriveScenario(cfg.system, cfg.field_1, cfg.field_2, cfg.drive)
    ecfg = EnsembleConfig(
        n_trajectories=cfg.n_trajectories,
        master_seed=cfg.master_seed,
        grid=cfg.grid,
        scenario=scenario,
        chunk_size=cfg.chunk_size,
        workers=cfg.workers,
    )
    return run_ensemble(ecfg, workers=workers).observables


def _run_field_stats(cfg: ScenarioConfig, out_dir: Path, overwrite: bool) -> dict[str, str]:
    reals_1 = [
        sample_field(replace(cfg.field_1, stream_id=2 * k), cfg.master_seed, cfg.grid)
        for k in range(cfg.n_realizations)
    ]
    reals_2 = [
        sample_field(replace(cfg.field_2, stream_id=2 * k + 1), cfg.master_seed, cfg.grid)
        for k in range(cfg.n_realizations)
    ]
    n_lags = int(cfg.max_lag_fs / cfg.grid.dt)
    lags = np.arange(n_lags + 1) * cfg.grid.dt
    auto_1 = estimate_g1(reals_1, lags)
    auto_2 = estimate_g1(reals_2, lags)
    cross = estimate_cross_correlation(reals_1, reals_2, lags)

    outputs: dict[str, str] = {}
    corr_path = out_dir / f"{cfg.prefix}_correlations.csv"
    write_correlations_csv(
        corr_path, auto_1, auto_2, cross, cfg.field_1.coherence_time, overwrite=overwrite
    )
    outputs["correlations_csv"] = corr_path.name

    for k in range(min(cfg.dump_realizations, cfg.n_realizations)):
        for tag, real in (("a", reals_1[k]), ("b", reals_2[k])):
            rp = out_dir / f"{cfg.prefix}_realization_{tag}{k}.csv"
            check_overwrite(rp, overwrite)
            realization_to_csv(real, rp)
            outputs[f"realization_{tag}{k}_csv"] = rp.name
            if real.event_log is not None:
                ep = out_dir / f"{cfg.prefix}_events_{tag}{k}.csv"
                check_overwrite(ep, overwrite)
                event_log_to_csv(real, ep)
                outputs[f"events_{tag}{k}_csv"] = ep.name
    return outputs


def run_scenario(
    cfg: ScenarioConfig,
    out_dir,
    overwrite: bool = False,
    workers: int | None = None,
) -> dict[str, str]:
    """Run one resolved scenario; returns the map of written files.

    Outputs land in ``out_dir`` as <prefix>_observables.csv (or
    <prefix>_correlations.csv for field statistics) plus a
    <prefix>_manifest.json echoing the resolved configuration. Identical
    configurations produce byte-identical CSVs.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    if cfg.mode == "white_noise":
        series = _run_white_noise(cfg)
    elif cfg.mode == "partially_coherent":
        series = _run_partially_coherent(cfg, workers)
    elif cfg.mode == "field_stats":
        series = None
    else:
        raise ConfigError(f"config.mode: unknown mode {cfg.mode!r}")

    outputs: dict[str, str] = {}
    if series is not None:
        obs_path = out_dir / f"{cfg.prefix}_observables.csv"
        write_observables_csv(obs_path, series, overwrite=overwrite)
        outputs["observables_csv"] = obs_path.name
    else:
        outputs.update(_run_field_stats(cfg, out_dir, overwrite))

    wall = time.perf_counter() - started
    manifest_path = out_dir / f"{cfg.prefix}_manifest.json"
    write_manifest(
        manifest_path, cfg.raw, __version__, wall, outputs, overwrite=overwrite
    )
    outputs["manifest_json"] = manifest_path.name
    return outputs
