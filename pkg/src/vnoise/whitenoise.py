"""V system pumped by two uncorrelated white-noise fields.

White noise has no realizable sample path, so this model is not simulated
trajectory-wise. After averaging over the field statistics the populations
obey a closed linear rate system and the excited-state coherence decouples:

    d rho_gg = G1 rho_11 + G2 rho_22 - (G1 + G2) rho_gg
    d rho_11 = G1 (rho_gg - rho_11)
    d rho_22 = G2 (rho_gg - rho_22)
    d rho_12 = -i w12 rho_12 - (G1 + G2)/2 rho_12

with pump rates G_i (1/fs) and excited-state splitting w12 (rad/fs). The
coherence equation is homogeneous: starting with rho_12 = 0 it stays zero,
so this drive cannot generate excited-state coherence, while all populations
relax to 1/3.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError
from .grids import TimeGrid
from .series import ObservableSeries

__all__ = [
    "PumpRates",
    "WhiteNoiseState",
    "rate_rhs",
    "solve_white_noise",
    "steady_state",
]

from dataclasses import dataclass


@dataclass(frozen=True)
class PumpRates:
    """Incoherent pump rates per transition (1/fs) and splitting (rad/fs)."""

    gamma_1: float
    gamma_2: float
    omega_12: float = 0.0

    def __post_init__(self):
        if self.gamma_1 < 0.0 or self.gamma_2 < 0.0:
            raise ConfigError("white_noise.gamma: pump rates must be >= 0")


@dataclass(frozen=True)
class WhiteNoiseState:
    """Populations plus the excited-state coherence; also used for derivatives."""

    rho_gg: float
    rho_11: float
    rho_22: float
    rho_12: complex = 0.0j

    def validate(self, tol: float = 1e-9) -> None:
        pops = (self.rho_gg, self.rho_11, self.rho_22)
        if min(pops) < -tol:
            raise ValueError(f"negative population in {self}")
        if abs(sum(pops) - 1.0) > tol:
            raise ValueError(f"populations of {self} do not sum to 1")


def rate_rhs(state: WhiteNoiseState, rates: PumpRates) -> WhiteNoiseState:
    """Time derivative of the pumped state."""
    g1, g2 = rates.gamma_1, rates.gamma_2
    return WhiteNoiseState(
        rho_gg=g1 * state.rho_11 + g2 * state.rho_22 - (g1 + g2) * state.rho_gg,
        rho_11=g1 * (state.rho_gg - state.rho_11),
        rho_22=g2 * (state.rho_gg - state.rho_22),
        rho_12=(-1j * rates.omega_12 - 0.5 * (g1 + g2)) * state.rho_12,
    )


def _population_matrix(rates: PumpRates) -> np.ndarray:
    g1, g2 = rates.gamma_1, rates.gamma_2
    return np.array(
        [
            [-(g1 + g2), g1, g2],
            [g1, -g1, 0.0],
            [g2, 0.0, -g2],
        ]
    )


def _observables(times: np.ndarray, pops: np.ndarray, rho_12: np.ndarray) -> ObservableSeries:
    # Ground-excited coherences are identically zero in this model, so the
    # purity carries only the populations and the 1-2 coherence.
    pur = (pops**2).sum(axis=1) + 2.0 * np.abs(rho_12) ** 2
    exc = pops[:, 1] + pops[:, 2]
    frac = np.where(exc < 1e-12, 0.0, np.abs(rho_12) / np.where(exc == 0.0, 1.0, exc))
    return ObservableSeries(
        t_fs=times,
        rho_gg=pops[:, 0],
        rho_11=pops[:, 1],
        rho_22=pops[:, 2],
        rho_12=rho_12,
        coherence_fraction=frac,
        purity=pur,
    )


def solve_white_noise(
    rates: PumpRates,
    initial: WhiteNoiseState,
    grid: TimeGrid,
    method: str = "closed_form",
) -> ObservableSeries:
    """Solve the rate system on ``grid``.

    closed_form evaluates the exact solution: the population block is a
    constant-coefficient linear system (symmetric rate matrix, solved by
    eigendecomposition) and the coherence is
    rho_12(0) * exp((-i w12 - (G1+G2)/2) t). The ode fallback integrates the
    same right-hand side with an adaptive stepper and agrees to 1e-8.
    """
    initial.validate()
    times = grid.times()
    p0 = np.array([initial.rho_gg, initial.rho_11, initial.rho_22])

    if method == "closed_form":
        a = _population_matrix(rates)
        w, v = np.linalg.eigh(a)
        coef = v.T @ p0
        rel = times - times[0]
        pops = np.einsum("ij,tj,j->ti", v, np.exp(np.outer(rel, w)), coef)
        if initial.rho_12 == 0:
            rho_12 = np.zeros(times.size, dtype=complex)
        else:
            lam = -1j * rates.omega_12 - 0.5 * (rates.gamma_1 + rates.gamma_2)
            rho_12 = initial.rho_12 * np.exp(lam * rel)
    elif method == "ode":
        def rhs(_t, y):
            s = WhiteNoiseState(y[0], y[1], y[2], y[3] + 1j * y[4])
            d = rate_rhs(s, rates)
            return [d.rho_gg, d.rho_11, d.rho_22, d.rho_12.real, d.rho_12.imag]

        y0 = [*p0, initial.rho_12.real, initial.rho_12.imag]
        sol = solve_ivp(
            rhs,
            (times[0], times[-1]),
            y0,
            t_eval=times,
            method="DOP853",
            rtol=1e-11,
            atol=1e-13,
        )
        if not sol.success:
            raise RuntimeError(f"rate-equation integration failed: {sol.message}")
        pops = sol.y[:3].T.copy()
        rho_12 = sol.y[3] + 1j * sol.y[4]
    else:
        raise ValueError(f"unknown method {method!r}; use 'closed_form' or 'ode'")

    return _observables(times, pops, rho_12)


def steady_state(rates: PumpRates) -> WhiteNoiseState:
    """Long-time fixed point: all populations 1/3, no coherence.

    Requires both pump rates positive; with a zero rate one excited level
    decouples and the fixed point is not unique, which is reported rather
    than silently returned.
    """
    if rates.gamma_1 <= 0.0 or rates.gamma_2 <= 0.0:
        raise ConfigError(
            "white_noise.gamma: steady state requires gamma_1 > 0 and gamma_2 > 0 "
            "(a zero rate leaves the decoupled level's population free)"
        )
    third = 1.0 / 3.0
    return WhiteNoiseState(third, third, third, 0.0j)
