"""Stochastic realizations of collisionally broadened CW fields.

A collisionally broadened CW source has constant amplitude and a randomly
interrupted phase, giving a Lorentzian spectrum and a first-order coherence
function |g1(tau)| = exp(-|tau|/tau_d). Two interchangeable microscopic
models reproduce that statistics:

* ``PHASE_JUMP``   -- Poisson collision events at rate 1/tau_d; at each event
  the phase is redrawn uniformly on [0, 2pi). Between events the phase is
  constant, so per-trajectory Hamiltonians are piecewise constant.
* ``PHASE_DIFFUSION`` -- a driftless Wiener walk of the phase with
  Var[phi(t+D) - phi(t)] = (2/tau_d) D.

Everything is sampled in the rotating frame: the optical carrier is factored
out analytically and only the slow phase phi(t) is realized, so envelopes
have unit modulus by construction.

Random streams are counter-based: a realization is addressed by
(master_seed, stream_id), and distinct stream_ids are statistically
independent. Identical arguments reproduce bit-identical samples.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalGuardError
from .grids import TimeGrid

__all__ = [
    "NoiseModel",
    "FieldParams",
    "FieldRealization",
    "CorrelationSeries",
    "sample_field",
    "estimate_g1",
    "estimate_cross_correlation",
    "realization_to_csv",
    "event_log_to_csv",
]

# dt must resolve the coherence time; coarser grids alias the jump process.
DT_GUARD_FRACTION = 20.0


class NoiseModel(enum.Enum):
    PHASE_JUMP = "phase_jump"
    PHASE_DIFFUSION = "phase_diffusion"


@dataclass(frozen=True)
class FieldParams:
    """One noisy CW source.

    rabi_amplitude and carrier_detuning are angular frequencies in rad/fs;
    coherence_time is in fs. ``stream_id`` addresses an independent random
    substream under a shared master seed.
    """

    rabi_amplitude: float
    coherence_time: float
    carrier_detuning: float = 0.0
    model: NoiseModel = NoiseModel.PHASE_JUMP
    stream_id: int = 0

    def __post_init__(self):
        if not (self.coherence_time > 0.0):
            raise ConfigError("fields.tau_d_fs: coherence time must be > 0")
        if self.rabi_amplitude < 0.0:
            raise ConfigError("fields.rabi: rabi_amplitude must be >= 0")
        if self.stream_id < 0:
            raise ConfigError("fields.stream_id: must be a non-negative integer")


@dataclass(frozen=True)
class FieldRealization:
    """One sample path e^{i phi(t)} on a uniform grid.

    ``event_log`` holds (jump time, new phase) rows for the phase-jump model
    and is None for phase diffusion.
    """

    grid: TimeGrid
    envelope: np.ndarray
    event_log: np.ndarray | None = field(default=None, repr=False)

    def window(self, start: int, stop: int) -> "FieldRealization":
        """Restriction to sample indices [start, stop); event log is dropped."""
        sub = TimeGrid(stop - start, self.grid.dt, self.grid.t0 + start * self.grid.dt)
        return FieldRealization(sub, self.envelope[start:stop])


def _stream_rng(master_seed: int, stream_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(stream_id,))
    return np.random.Generator(np.random.PCG64(ss))


def sample_field(params: FieldParams, master_seed: int, grid: TimeGrid) -> FieldRealization:
    """Draw one realization of the field phase on ``grid``.

    Deterministic: identical (params, master_seed, grid) give bit-identical
    output. Rejects grids with dt > tau_d/20.
    """
    tau_d = params.coherence_time
    if math.isfinite(tau_d) and grid.dt > tau_d / DT_GUARD_FRACTION:
        raise NumericalGuardError(
            f"grid dt={grid.dt:g} fs too coarse for tau_d={tau_d:g} fs "
            f"(need dt <= tau_d/{DT_GUARD_FRACTION:g})"
        )

    rng = _stream_rng(master_seed, params.stream_id)
    times = grid.times()
    phi0 = rng.uniform(0.0, 2.0 * np.pi)

    if params.model is NoiseModel.PHASE_JUMP:
        rate = 0.0 if math.isinf(tau_d) else 1.0 / tau_d
        # A Poisson process conditioned on its count is iid uniforms, sorted.
        n_events = rng.poisson(rate * grid.span) if rate > 0.0 else 0
        t_events = np.sort(rng.uniform(grid.t0, grid.t_end, n_events))
        phases = rng.uniform(0.0, 2.0 * np.pi, n_events)
        idx = np.searchsorted(t_events, times, side="right")
        phi = np.concatenate(([phi0], phases))[idx]
        event_log = np.column_stack((t_events, phases)) if n_events else np.empty((0, 2))
        return FieldRealization(grid, np.exp(1j * phi), event_log)

    if params.model is NoiseModel.PHASE_DIFFUSION:
        sigma = 0.0 if math.isinf(tau_d) else math.sqrt(2.0 * grid.dt / tau_d)
        steps = rng.normal(0.0, sigma, grid.n_samples - 1) if grid.n_samples > 1 else []
        phi = phi0 + np.concatenate(([0.0], np.cumsum(steps)))
        return FieldRealization(grid, np.exp(1j * phi), None)

    raise ConfigError(f"fields.model: unknown noise model {params.model!r}")


@dataclass(frozen=True)
class CorrelationSeries:
    """Normalized two-time correlation estimates per lag.

    ``stderr`` is the jackknife (leave-one-realization-out) standard error
    of |value|.
    """

    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_realizations: int


def _lag_offsets(grid: TimeGrid, lags) -> np.ndarray:
    lags = np.asarray(lags, dtype=float)
    if lags.ndim != 1:
        raise ValueError("lags must be a 1-D sequence of times")
    if np.any(lags < 0.0):
        raise ValueError("lags must be >= 0")
    if np.any(lags > grid.span + 1e-9 * grid.dt):
        raise ValueError("lag exceeds the grid span")
    offsets = np.rint(lags / grid.dt).astype(int)
    if not np.allclose(offsets * grid.dt, lags, rtol=0.0, atol=1e-6 * grid.dt):
        raise ValueError("lags must be integer multiples of the grid spacing dt")
    return offsets


def _stack_envelopes(realizations) -> tuple[TimeGrid, np.ndarray]:
    reals = list(realizations)
    if len(reals) < 1:
        raise ValueError("need at least one realization")
    grid = reals[0].grid
    for r in reals[1:]:
        if r.grid != grid:
            raise ValueError("all realizations must share the same grid")
    return grid, np.stack([r.envelope for r in reals])


def _lagged_products(env_a: np.ndarray, env_b: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-realization time averages of eps_a(t+tau) eps_b*(t), one column per lag."""
    n = env_a.shape[1]
    cols = []
    for m in offsets:
        if m == 0:
            cols.append((env_a * env_b.conj()).mean(axis=1))
        else:
            cols.append((env_a[:, m:] * env_b[:, : n - m].conj()).mean(axis=1))
    return np.stack(cols, axis=1)


def _jackknife_abs_se(per_real: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and jackknife standard error of |mean| over axis 0."""
    n = per_real.shape[0]
    total = per_real.sum(axis=0)
    mean = total / n
    if n < 2:
        return mean, np.full(mean.shape, np.nan)
    loo = (total[None, :] - per_real) / (n - 1)
    theta = np.abs(loo)
    se = np.sqrt((n - 1) / n * ((theta - theta.mean(axis=0)) ** 2).sum(axis=0))
    return mean, se


def estimate_g1(realizations, lags) -> CorrelationSeries:
    """Ensemble- and time-averaged first-order coherence function.

    g1(tau) = <eps(t+tau) eps*(t)> / <|eps(t)|^2>, exploiting stationarity by
    averaging over t within each realization.
    """
    grid, env = _stack_envelopes(realizations)
    if env.shape[0] < 2:
        raise ValueError("need at least 2 realizations for standard errors")
    offsets = _lag_offsets(grid, lags)
    per_real = _lagged_products(env, env, offsets)
    norm = np.mean(np.abs(env) ** 2)
    mean, se = _jackknife_abs_se(per_real)
    return CorrelationSeries(
        np.asarray(lags, dtype=float), mean / norm, se / norm, env.shape[0]
    )


def estimate_cross_correlation(fields_a, fields_b, lags) -> CorrelationSeries:
    """Normalized cross-correlation <eps_a(t+tau) eps_b*(t)> over paired realizations.

    Used to certify numerically that two streams are uncorrelated.
    """
    grid_a, env_a = _stack_envelopes(fields_a)
    grid_b, env_b = _stack_envelopes(fields_b)
    if env_a.shape[0] != env_b.shape[0]:
        raise ValueError("fields_a and fields_b must have the same number of realizations")
    if grid_a != grid_b:
        raise ValueError("fields_a and fields_b must share the same grid")
    if env_a.shape[0] < 2:
        raise ValueError("need at least 2 realization pairs for standard errors")
    offsets = _lag_offsets(grid_a, lags)
    per_real = _lagged_products(env_a, env_b, offsets)
    norm = math.sqrt(np.mean(np.abs(env_a) ** 2) * np.mean(np.abs(env_b) ** 2))
    mean, se = _jackknife_abs_se(per_real)
    return CorrelationSeries(
        np.asarray(lags, dtype=float), mean / norm, se / norm, env_a.shape[0]
    )


def realization_to_csv(realization: FieldRealization, path) -> None:
    times = realization.grid.times()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_fs", "re_env", "im_env"])
        for t, e in zip(times, realization.envelope):
            w.writerow([f"{t:.17g}", f"{e.real:.17g}", f"{e.imag:.17g}"])


def event_log_to_csv(realization: FieldRealization, path) -> None:
    if realization.event_log is None:
        raise ValueError("realization has no event log (phase-diffusion model)")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_jump_fs", "phase_rad"])
        for t, p in realization.event_log:
            w.writerow([f"{t:.17g}", f"{p:.17g}"])
