"""Scenario presets for the standard figure set.

The figure set (rendered by the companion figure generator):
  1 populations under white-noise pumping        2 purity under white-noise pumping
  3 purity + coherence fraction, tau_d = 60 fs   4 same at tau_d = 120 fs
  5 excited populations, tau_d = 60 fs           6 excited coherence, tau_d = 60 fs
  7 excited populations, tau_d = 120 fs          8 excited coherence, tau_d = 120 fs
  9 field auto/cross correlation functions

Drive strength: both couplings are set to 2*pi*10e-3 rad/fs, i.e. a 10 THz
Rabi frequency in ordinary-frequency units. Together with the cross-coupled
drive geometry this reproduces the target coherence plateau (~0.45 sustained
for several hundred fs at tau_d = 120 fs, tau_c = 400 fs); see the README
for the geometry discussion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import DEFAULT_SEED

__all__ = ["Preset", "PRESETS", "get_preset", "list_presets"]

# 10 THz ordinary frequency, expressed in the angular-THz config convention.
RABI_THZ = 20.0 * math.pi

TAU_C_SWEEP_FS = (50.0, 100.0, 200.0, 400.0)

PARTIAL_T_MAX_FS = 1500.0


@dataclass(frozen=True)
class Preset:
    name: str
    figures: str
    description: str
    configs: tuple


def _partial_config(tau_d: float, tau_c: float) -> dict:
    return {
        "mode": "partially_coherent",
        "output": {"prefix": f"partial_tau{tau_d:g}_tc{tau_c:g}"},
        "grid": {"t_max_fs": PARTIAL_T_MAX_FS},
        "system": {"tau_c_fs": tau_c, "rabi_thz": RABI_THZ},
        "drive": {"coupling": "cross_coupled", "carrier": "per_transition"},
        "fields": {"tau_d_fs": tau_d, "model": "phase_jump"},
        "ensemble": {"n_trajectories": 10_000, "master_seed": DEFAULT_SEED},
    }


def _whitenoise_config() -> dict:
    return {
        "mode": "white_noise",
        "output": {"prefix": "whitenoise_equilibration"},
        "grid": {"t_max_fs": 40.0, "dt_fs": 0.05},
        "white_noise": {"gamma_1_thz": 250.0, "gamma_2_thz": 250.0, "omega_12_thz": 0.0},
    }


def _field_stats_config(tau_d: float) -> dict:
    return {
        "mode": "field_stats",
        "output": {"prefix": f"field_stats_tau{tau_d:g}"},
        "grid": {"t_max_fs": 12.0 * tau_d, "dt_fs": tau_d / 20.0},
        "fields": {"tau_d_fs": tau_d, "model": "phase_jump"},
        "field_stats": {
            "n_realizations": 10_000,
            "master_seed": DEFAULT_SEED,
            "max_lag_fs": 3.0 * tau_d,
        },
    }


def _build_registry() -> dict[str, Preset]:
    presets: dict[str, Preset] = {}

    def add(name, figures, description, configs):
        presets[name] = Preset(name, figures, description, tuple(configs))

    add(
        "whitenoise_equilibration",
        "figures 1-2",
        "white-noise pumping from the ground state: populations and purity relax to 1/3",
        [_whitenoise_config()],
    )
    for tau_d, figures in ((60.0, "figures 3, 5, 6"), (120.0, "figures 4, 7, 8")):
        for tau_c in TAU_C_SWEEP_FS:
            add(
                f"partial_tau{tau_d:g}_tc{tau_c:g}",
                figures,
                f"two uncorrelated noisy CW fields, tau_d={tau_d:g} fs, "
                f"excited-state period tau_c={tau_c:g} fs",
                [_partial_config(tau_d, tau_c)],
            )
        add(
            f"partial_tau{tau_d:g}_sweep",
            figures,
            f"splitting sweep tau_c in {TAU_C_SWEEP_FS} fs at fixed tau_d={tau_d:g} fs",
            [_partial_config(tau_d, tc) for tc in TAU_C_SWEEP_FS],
        )
    for tau_d in (60.0, 120.0):
        add(
            f"field_stats_tau{tau_d:g}",
            "figure 9",
            f"field correlation statistics at tau_d={tau_d:g} fs: |g1| decay and the "
            "cross-stream null",
            [_field_stats_config(tau_d)],
        )
    return presets


PRESETS = _build_registry()


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; known presets: {known}")
    return PRESETS[name]


def list_presets() -> str:
    width = max(len(n) for n in PRESETS)
    lines = [f"{p.name:<{width}}  {p.figures:<15} {p.description}" for p in PRESETS.values()]
    return "\n".join(lines)
