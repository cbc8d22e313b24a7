"""Scenario configuration: TOML/JSON loading, validation, resolution.

Unit conventions for all config files (also printed in the CLI help):
times are femtoseconds; every frequency-like quantity given in THz is an
angular rate, converted as value[THz] * 1e-3 -> rad/fs (pump rates become
1/fs the same way).

A manifest JSON written by a previous run can be fed back in place of a
config file; its resolved ``config`` block reproduces the run bit-for-bit.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .fields import DT_GUARD_FRACTION, FieldParams, NoiseModel
from .grids import TimeGrid
from .vsystem import CarrierScheme, CouplingScheme, DriveConfig, VSystemParams
from .whitenoise import PumpRates

__all__ = ["ScenarioConfig", "load_config", "resolve_config", "load_scenario"]

THZ_TO_RAD_PER_FS = 1e-3

MODES = ("white_noise", "partially_coherent", "field_stats")

DEFAULT_SEED = 20260810
DEFAULT_TRAJECTORIES = 10_000
DEFAULT_CHUNK_SIZE = 1024


def _require(table: dict, section: str, key: str, kind, default=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"{section}.{key}: required key is missing")
        return default
    val = table[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(f"{section}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _check_keys(table, section: str, allowed: set[str]) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"{section}: expected a table")
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{section}.{sorted(unknown)[0]}: unknown key")


def _positive(value: float, section: str, key: str) -> float:
    if not (value > 0.0):
        raise ConfigError(f"{section}.{key}: must be > 0")
    return value


def _non_negative(value: float, section: str, key: str) -> float:
    if value < 0.0:
        raise ConfigError(f"{section}.{key}: must be >= 0")
    return value


@dataclass
class ScenarioConfig:
    """Fully resolved description of one run; ``raw`` echoes it as a dict."""

    mode: str
    prefix: str
    raw: dict = field(repr=False)

    # white_noise mode
    pump: PumpRates | None = None
    wn_method: str = "closed_form"

    # partially_coherent mode
    system: VSystemParams | None = None
    drive: DriveConfig | None = None
    field_1: FieldParams | None = None
    field_2: FieldParams | None = None
    n_trajectories: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE
    workers: int = 1

    # field_stats mode
    n_realizations: int = 0
    max_lag_fs: float = 0.0
    dump_realizations: int = 0

    # shared
    master_seed: int = DEFAULT_SEED
    grid: TimeGrid | None = None


def load_config(path) -> dict:
    """Parse a TOML or JSON config file; manifests are unwrapped to their
    resolved config block."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    if path.suffix.lower() == ".json":
        with open(path, "rb") as fh:
            doc = json.load(fh)
        if isinstance(doc, dict) and "config" in doc and doc.get("schema", "").startswith(
            "vnoise-manifest"
        ):
            doc = doc["config"]
    else:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a table/object")
    return doc


def _resolve_enum(value: str, enum_cls, section: str, key: str):
    try:
        return enum_cls(value)
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{section}.{key}: {value!r} is not one of ({options})") from None


def _resolve_grid(raw: dict, default_dt: float, default_t_max: float | None = None) -> TimeGrid:
    table = raw.get("grid", {})
    if not isinstance(table, dict):
        raise ConfigError("grid: expected a table")
    _check_keys(table, "grid", {"t_max_fs", "dt_fs"})
    if default_t_max is None and "t_max_fs" not in table:
        raise ConfigError("grid.t_max_fs: required key is missing")
    t_max = _positive(_require(table, "grid", "t_max_fs", float, default_t_max), "grid", "t_max_fs")
    dt = _positive(_require(table, "grid", "dt_fs", float, default_dt), "grid", "dt_fs")
    grid = TimeGrid.from_span(t_max, dt)
    table["t_max_fs"] = t_max
    table["dt_fs"] = dt
    raw["grid"] = table
    return grid


def resolve_config(raw: dict) -> ScenarioConfig:
    """Validate a parsed config dict, apply defaults, and echo the resolved
    values back into the returned ``raw`` copy."""
    raw = json.loads(json.dumps(raw))  # deep copy, and reject non-JSON types early
    _check_keys(
        raw,
        "config",
        {"mode", "output", "grid", "system", "drive", "fields", "ensemble", "white_noise",
         "field_stats"},
    )
    mode = _require(raw, "config", "mode", str)
    if mode not in MODES:
        raise ConfigError(f"config.mode: {mode!r} is not one of {MODES}")

    out_table = raw.get("output", {})
    _check_keys(out_table, "output", {"prefix"})
    prefix = _require(out_table, "output", "prefix", str, default=mode)
    raw["output"] = {"prefix": prefix}

    if mode == "white_noise":
        return _resolve_white_noise(raw, prefix)
    if mode == "partially_coherent":
        return _resolve_partially_coherent(raw, prefix)
    return _resolve_field_stats(raw, prefix)


def _resolve_white_noise(raw: dict, prefix: str) -> ScenarioConfig:
    for bad in ("system", "drive", "fields", "ensemble", "field_stats"):
        if bad in raw:
            raise ConfigError(f"{bad}: not allowed in white_noise mode")
    table = raw.get("white_noise")
    if table is None:
        raise ConfigError("white_noise: required table is missing")
    _check_keys(table, "white_noise", {"gamma_1_thz", "gamma_2_thz", "omega_12_thz", "method"})
    g1 = _non_negative(_require(table, "white_noise", "gamma_1_thz", float), "white_noise", "gamma_1_thz")
    g2 = _non_negative(_require(table, "white_noise", "gamma_2_thz", float), "white_noise", "gamma_2_thz")
    w12 = _require(table, "white_noise", "omega_12_thz", float, default=0.0)
    method = _require(table, "white_noise", "method", str, default="closed_form")
    if method not in ("closed_form", "ode"):
        raise ConfigError("white_noise.method: must be 'closed_form' or 'ode'")
    pump = PumpRates(g1 * THZ_TO_RAD_PER_FS, g2 * THZ_TO_RAD_PER_FS, w12 * THZ_TO_RAD_PER_FS)
    total = pump.gamma_1 + pump.gamma_2
    default_dt = (1.0 / total) / 50.0 if total > 0 else 1.0
    grid = _resolve_grid(raw, default_dt=default_dt)
    table.update(gamma_1_thz=g1, gamma_2_thz=g2, omega_12_thz=w12, method=method)
    return ScenarioConfig(
        mode="white_noise", prefix=prefix, raw=raw, pump=pump, wn_method=method, grid=grid
    )


def _resolve_field_pair(raw: dict, rabi_1: float, rabi_2: float) -> tuple[FieldParams, FieldParams, dict]:
    table = raw.get("fields")
    if table is None:
        raise ConfigError("fields: required table is missing")
    _check_keys(table, "fields", {"tau_d_fs", "model", "detuning_1_thz", "detuning_2_thz"})
    tau_d = _positive(_require(table, "fields", "tau_d_fs", float), "fields", "tau_d_fs")
    model = _resolve_enum(
        _require(table, "fields", "model", str, default=NoiseModel.PHASE_JUMP.value),
        NoiseModel, "fields", "model",
    )
    d1 = _require(table, "fields", "detuning_1_thz", float, default=0.0)
    d2 = _require(table, "fields", "detuning_2_thz", float, default=0.0)
    f1 = FieldParams(rabi_1, tau_d, d1 * THZ_TO_RAD_PER_FS, model, stream_id=0)
    f2 = FieldParams(rabi_2, tau_d, d2 * THZ_TO_RAD_PER_FS, model, stream_id=1)
    table.update(tau_d_fs=tau_d, model=model.value, detuning_1_thz=d1, detuning_2_thz=d2)
    return f1, f2, table


def _resolve_partially_coherent(raw: dict, prefix: str) -> ScenarioConfig:
    for bad in ("white_noise", "field_stats"):
        if bad in raw:
            raise ConfigError(f"{bad}: not allowed in partially_coherent mode")

    sys_table = raw.get("system")
    if sys_table is None:
        raise ConfigError("system: required table is missing")
    _check_keys(sys_table, "system", {"tau_c_fs", "omega_21_thz", "rabi_thz", "rabi_1_thz", "rabi_2_thz"})
    if ("tau_c_fs" in sys_table) == ("omega_21_thz" in sys_table):
        raise ConfigError("system: give exactly one of tau_c_fs or omega_21_thz")
    if "rabi_thz" in sys_table and ("rabi_1_thz" in sys_table or "rabi_2_thz" in sys_table):
        raise ConfigError("system: give rabi_thz or the per-transition rabi_i_thz pair, not both")
    if "rabi_thz" in sys_table:
        rabi_1 = rabi_2 = _non_negative(_require(sys_table, "system", "rabi_thz", float), "system", "rabi_thz")
    else:
        rabi_1 = _non_negative(_require(sys_table, "system", "rabi_1_thz", float), "system", "rabi_1_thz")
        rabi_2 = _non_negative(_require(sys_table, "system", "rabi_2_thz", float), "system", "rabi_2_thz")
    r1 = rabi_1 * THZ_TO_RAD_PER_FS
    r2 = rabi_2 * THZ_TO_RAD_PER_FS
    # echo the user's own parametrization: re-deriving the other form would
    # round through the unit conversion and break bit-exact reruns
    echo: dict = {}
    if "tau_c_fs" in sys_table:
        tau_c = _positive(_require(sys_table, "system", "tau_c_fs", float), "system", "tau_c_fs")
        system = VSystemParams.from_tau_c(tau_c, r1, r2)
        echo["tau_c_fs"] = tau_c
    else:
        w21 = _non_negative(_require(sys_table, "system", "omega_21_thz", float), "system", "omega_21_thz")
        system = VSystemParams(w21 * THZ_TO_RAD_PER_FS, r1, r2)
        echo["omega_21_thz"] = w21
    if "rabi_thz" in sys_table:
        echo["rabi_thz"] = rabi_1
    else:
        echo["rabi_1_thz"] = rabi_1
        echo["rabi_2_thz"] = rabi_2
    raw["system"] = echo

    drive_table = raw.get("drive", {})
    _check_keys(drive_table, "drive", {"coupling", "carrier"})
    coupling = _resolve_enum(
        _require(drive_table, "drive", "coupling", str, default=CouplingScheme.EXCLUSIVE.value),
        CouplingScheme, "drive", "coupling",
    )
    carrier = _resolve_enum(
        _require(drive_table, "drive", "carrier", str, default=CarrierScheme.PER_TRANSITION.value),
        CarrierScheme, "drive", "carrier",
    )
    drive = DriveConfig(coupling, carrier)
    raw["drive"] = {"coupling": coupling.value, "carrier": carrier.value}

    f1, f2, _ = _resolve_field_pair(raw, system.rabi_1, system.rabi_2)

    ens_table = raw.get("ensemble", {})
    _check_keys(ens_table, "ensemble", {"n_trajectories", "master_seed", "chunk_size", "workers"})
    n_traj = _require(ens_table, "ensemble", "n_trajectories", int, default=DEFAULT_TRAJECTORIES)
    if n_traj < 2:
        raise ConfigError("ensemble.n_trajectories: must be >= 2")
    seed = _require(ens_table, "ensemble", "master_seed", int, default=DEFAULT_SEED)
    chunk = _require(ens_table, "ensemble", "chunk_size", int, default=DEFAULT_CHUNK_SIZE)
    if chunk < 1:
        raise ConfigError("ensemble.chunk_size: must be >= 1")
    workers = _require(ens_table, "ensemble", "workers", int, default=1)
    if workers < 1:
        raise ConfigError("ensemble.workers: must be >= 1")
    raw["ensemble"] = {
        "n_trajectories": n_traj, "master_seed": seed, "chunk_size": chunk, "workers": workers,
    }

    scales = [f1.coherence_time]
    if math.isfinite(system.tau_c):
        scales.append(system.tau_c)
    max_rabi = max(system.rabi_1, system.rabi_2)
    if max_rabi > 0:
        scales.append(2.0 * math.pi / max_rabi)
    default_dt = min(scales) / 100.0
    grid = _resolve_grid(raw, default_dt=default_dt)
    if grid.dt > f1.coherence_time / DT_GUARD_FRACTION:
        raise ConfigError(
            f"grid.dt_fs: {grid.dt:g} fs is too coarse for tau_d={f1.coherence_time:g} fs "
            f"(need dt <= tau_d/{DT_GUARD_FRACTION:g})"
        )

    return ScenarioConfig(
        mode="partially_coherent", prefix=prefix, raw=raw,
        system=system, drive=drive, field_1=f1, field_2=f2,
        n_trajectories=n_traj, chunk_size=chunk, workers=workers,
        master_seed=seed, grid=grid,
    )


def _resolve_field_stats(raw: dict, prefix: str) -> ScenarioConfig:
    for bad in ("white_noise", "system", "drive", "ensemble"):
        if bad in raw:
            raise ConfigError(f"{bad}: not allowed in field_stats mode")
    f1, f2, fields_table = _resolve_field_pair(raw, 0.0, 0.0)
    tau_d = f1.coherence_time

    table = raw.get("field_stats", {})
    _check_keys(table, "field_stats", {"n_realizations", "master_seed", "max_lag_fs", "dump_realizations"})
    n_real = _require(table, "field_stats", "n_realizations", int, default=DEFAULT_TRAJECTORIES)
    if n_real < 2:
        raise ConfigError("field_stats.n_realizations: must be >= 2")
    seed = _require(table, "field_stats", "master_seed", int, default=DEFAULT_SEED)
    max_lag = _positive(
        _require(table, "field_stats", "max_lag_fs", float, default=3.0 * tau_d),
        "field_stats", "max_lag_fs",
    )
    dump = _require(table, "field_stats", "dump_realizations", int, default=0)
    if dump < 0:
        raise ConfigError("field_stats.dump_realizations: must be >= 0")

    grid = _resolve_grid(raw, default_dt=tau_d / DT_GUARD_FRACTION, default_t_max=12.0 * tau_d)
    if max_lag > grid.span:
        raise ConfigError("field_stats.max_lag_fs: exceeds the grid span")
    table.update(
        n_realizations=n_real, master_seed=seed, max_lag_fs=max_lag, dump_realizations=dump
    )
    raw["field_stats"] = table

    return ScenarioConfig(
        mode="field_stats", prefix=prefix, raw=raw,
        field_1=f1, field_2=f2, n_realizations=n_real, max_lag_fs=max_lag,
        dump_realizations=dump, master_seed=seed, grid=grid,
    )


def load_scenario(path) -> ScenarioConfig:
    return resolve_config(load_config(path))
