"""Trajectory ensembles: average many unitary evolutions over field noise.

One trajectory = one pair of field realizations driving one exact
Liouville-von Neumann propagation from the ground state. The physical state
is the ensemble average of the trajectories; purity loss and coherence decay
appear only through that averaging, since each trajectory stays pure.

Trajectory k draws field 1 from random stream (master_seed, 2k) and field 2
from (master_seed, 2k+1), so every realization is used once and the two
fields of any trajectory, as well as all trajectories, come from disjoint
streams.

Trajectories are processed in fixed-size chunks. Chunk boundaries depend
only on (n_trajectories, chunk_size), never on the worker count, and chunk
partial sums are reduced in chunk order with pairwise summation, so results
are bit-identical for any number of workers.

The stepper is the closed-form unitary of the arrow-shaped step Hamiltonian
(eigenvalues 0, +-r with r^2 = |H01|^2 + |H02|^2):

    U = exp(-i H dt) = I - i sin(r dt)/r * H + (cos(r dt) - 1)/r^2 * H^2

vectorized over the chunk; it matches the generic eigendecomposition stepper
in vsystem.propagate to machine precision.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericalGuardError
from .fields import FieldParams, sample_field
from .grids import TimeGrid
from .series import STDERR_KEYS, ObservableSeries
from .vsystem import (
    C_DENOMINATOR_FLOOR,
    DriveConfig,
    MAX_STEP_PHASE,
    VSystemParams,
    coupling_factors,
)

__all__ = [
    "DriveScenario",
    "EnsembleConfig",
    "EnsembleResult",
    "ConvergenceReport",
    "run_ensemble",
    "convergence_report",
]

# Components of the real 9-vector that fully encodes a Hermitian 3x3 matrix:
# populations, then Re/Im of the (g,1), (g,2), (1,2) elements.
_N_COMP = 9


@dataclass(frozen=True)
class DriveScenario:
    """System, the two noisy fields, and the drive geometry."""

    system: VSystemParams
    field_1: FieldParams
    field_2: FieldParams
    drive: DriveConfig = DriveConfig()


@dataclass(frozen=True)
class EnsembleConfig:
    n_trajectories: int
    master_seed: int
    grid: TimeGrid
    scenario: DriveScenario
    chunk_size: int = 1024
    workers: int = 1

    def __post_init__(self):
        if self.n_trajectories < 2:
            raise ConfigError("ensemble.n_trajectories: must be >= 2 for standard errors")
        if self.chunk_size < 1:
            raise ConfigError("ensemble.chunk_size: must be >= 1")
        if self.workers < 1:
            raise ConfigError("ensemble.workers: must be >= 1")


@dataclass
class EnsembleResult:
    grid: TimeGrid
    mean_rho: np.ndarray
    observables: ObservableSeries
    n_effective: int
    sum_v: np.ndarray = field(repr=False, default=None)
    sum_vv: np.ndarray = field(repr=False, default=None)
    chunk_counts: list = field(repr=False, default=None)
    chunk_sums: list = field(repr=False, default=None)


def _vector_from_states(rho: np.ndarray, out: np.ndarray) -> None:
    """Fill the (9, C) component matrix from a (C, 3, 3) state stack."""
    out[0] = rho[:, 0, 0].real
    out[1] = rho[:, 1, 1].real
    out[2] = rho[:, 2, 2].real
    out[3] = rho[:, 0, 1].real
    out[4] = rho[:, 0, 1].imag
    out[5] = rho[:, 0, 2].real
    out[6] = rho[:, 0, 2].imag
    out[7] = rho[:, 1, 2].real
    out[8] = rho[:, 1, 2].imag


def _rho_from_vector(v: np.ndarray) -> np.ndarray:
    """Hermitian (T, 3, 3) stack from a (T, 9) component array."""
    t = v.shape[0]
    rho = np.empty((t, 3, 3), dtype=complex)
    rho[:, 0, 0] = v[:, 0]
    rho[:, 1, 1] = v[:, 1]
    rho[:, 2, 2] = v[:, 2]
    rho[:, 0, 1] = v[:, 3] + 1j * v[:, 4]
    rho[:, 1, 0] = v[:, 3] - 1j * v[:, 4]
    rho[:, 0, 2] = v[:, 5] + 1j * v[:, 6]
    rho[:, 2, 0] = v[:, 5] - 1j * v[:, 6]
    rho[:, 1, 2] = v[:, 7] + 1j * v[:, 8]
    rho[:, 2, 1] = v[:, 7] - 1j * v[:, 8]
    return rho


def _chunk_bounds(n: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]


def _propagate_chunk(args) -> tuple[int, np.ndarray, np.ndarray]:
    """Propagate trajectories [start, stop); return (count, sum_v, sum_vv)."""
    scenario, grid, master_seed, start, stop = args
    sys = scenario.system
    mid = grid.midpoints()
    mid_times = mid.times()
    n_steps = mid.n_samples
    count = stop - start

    env1 = np.empty((n_steps, count), dtype=complex)
    env2 = np.empty((n_steps, count), dtype=complex)
    for j, k in enumerate(range(start, stop)):
        f1 = replace(scenario.field_1, stream_id=2 * k)
        f2 = replace(scenario.field_2, stream_id=2 * k + 1)
        env1[:, j] = sample_field(f1, master_seed, mid).envelope
        env2[:, j] = sample_field(f2, master_seed, mid).envelope

    p1, q2, p2, q1 = coupling_factors(
        mid_times,
        sys,
        scenario.drive,
        scenario.field_1.carrier_detuning,
        scenario.field_2.carrier_detuning,
    )

    rho = np.zeros((count, 3, 3), dtype=complex)
    rho[:, 0, 0] = 1.0

    sum_v = np.zeros((grid.n_samples, _N_COMP))
    sum_vv = np.zeros((grid.n_samples, _N_COMP, _N_COMP))
    v = np.empty((_N_COMP, count))
    u = np.empty((count, 3, 3), dtype=complex)
    dt = grid.dt

    _vector_from_states(rho, v)
    sum_v[0] = v.sum(axis=1)
    sum_vv[0] = np.einsum("ic,jc->ij", v, v)

    for k in range(n_steps):
        a = -(sys.rabi_1 * env1[k] * p1[k] + sys.rabi_2 * env2[k] * q2[k])
        b = -(sys.rabi_2 * env2[k] * p2[k] + sys.rabi_1 * env1[k] * q1[k])
        aa = a.real**2 + a.imag**2
        bb = b.real**2 + b.imag**2
        r2 = aa + bb
        r = np.sqrt(r2)
        theta = r * dt
        if theta.max(initial=0.0) > MAX_STEP_PHASE:
            j = int(np.argmax(theta))
            raise NumericalGuardError(
                f"step too large for trajectory {start + j} at step {k}: "
                f"dt*||H|| = {theta[j]:.3g} > {MAX_STEP_PHASE}"
            )
        small = theta < 1e-6
        r_safe = np.where(small, 1.0, r)
        s = np.where(small, dt * (1.0 - theta**2 / 6.0), np.sin(theta) / r_safe)
        q = np.where(
            small, -0.5 * dt**2 * (1.0 - theta**2 / 12.0), (np.cos(theta) - 1.0) / r_safe**2
        )
        u[:, 0, 0] = 1.0 + q * r2
        u[:, 0, 1] = -1j * s * a
        u[:, 0, 2] = -1j * s * b
        u[:, 1, 0] = -1j * s * a.conj()
        u[:, 2, 0] = -1j * s * b.conj()
        u[:, 1, 1] = 1.0 + q * aa
        u[:, 2, 2] = 1.0 + q * bb
        u[:, 1, 2] = q * a.conj() * b
        u[:, 2, 1] = q * a * b.conj()

        rho = u @ rho @ u.conj().swapaxes(1, 2)

        _vector_from_states(rho, v)
        sum_v[k + 1] = v.sum(axis=1)
        sum_vv[k + 1] = np.einsum("ic,jc->ij", v, v)

    return count, sum_v, sum_vv


def _mean_and_cov(
    sum_v: np.ndarray, sum_vv: np.ndarray, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Mean component vector and the covariance of that mean, per time."""
    mean = sum_v / n
    pop_cov = (sum_vv - n * np.einsum("tp,tq->tpq", mean, mean)) / (n - 1)
    return mean, pop_cov / n


def _observable_stderr(mean_v: np.ndarray, cov_mean: np.ndarray) -> dict[str, np.ndarray]:
    """Delta-method standard errors of the observables of the mean state."""

    def quad(grad: np.ndarray) -> np.ndarray:
        var = np.einsum("tp,tpq,tq->t", grad, cov_mean, grad)
        return np.sqrt(np.clip(var, 0.0, None))

    t = mean_v.shape[0]
    err: dict[str, np.ndarray] = {}
    for key, idx in (("rho_gg", 0), ("rho_11", 1), ("rho_22", 2), ("re_rho12", 7), ("im_rho12", 8)):
        err[key] = np.sqrt(np.clip(cov_mean[:, idx, idx], 0.0, None))

    zr, zi = mean_v[:, 7], mean_v[:, 8]
    amp = np.hypot(zr, zi)
    amp_safe = np.where(amp < 1e-300, 1.0, amp)
    g_abs = np.zeros((t, _N_COMP))
    g_abs[:, 7] = zr / amp_safe
    g_abs[:, 8] = zi / amp_safe
    se_abs = quad(g_abs)
    # at |z| ~ 0 the gradient degenerates; fall back to the component bound
    flat = amp < 1e-14
    se_abs = np.where(flat, np.sqrt(cov_mean[:, 7, 7] + cov_mean[:, 8, 8]), se_abs)
    err["abs_rho12"] = se_abs

    pop = mean_v[:, 1] + mean_v[:, 2]
    ok = pop > C_DENOMINATOR_FLOOR
    pop_safe = np.where(ok, pop, 1.0)
    g_c = np.zeros((t, _N_COMP))
    g_c[:, 7] = zr / (amp_safe * pop_safe)
    g_c[:, 8] = zi / (amp_safe * pop_safe)
    g_c[:, 1] = -amp / pop_safe**2
    g_c[:, 2] = -amp / pop_safe**2
    se_c = quad(g_c)
    se_c_flat = np.sqrt(cov_mean[:, 7, 7] + cov_mean[:, 8, 8]) / pop_safe
    se_c = np.where(flat, se_c_flat, se_c)
    err["coherence_fraction"] = np.where(ok, se_c, 0.0)

    g_p = 4.0 * mean_v
    g_p[:, :3] *= 0.5
    err["purity"] = quad(g_p)
    return err


def run_ensemble(cfg: EnsembleConfig, workers: int | None = None) -> EnsembleResult:
    """Average ``cfg.n_trajectories`` independent trajectories.

    Deterministic for a fixed config: the outcome does not depend on
    ``workers``, and reruns are bit-identical.
    """
    workers = cfg.workers if workers is None else workers
    bounds = _chunk_bounds(cfg.n_trajectories, cfg.chunk_size)
    tasks = [(cfg.scenario, cfg.grid, cfg.master_seed, s, e) for s, e in bounds]

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_propagate_chunk, tasks))
    else:
        parts = [_propagate_chunk(t) for t in tasks]

    counts = [p[0] for p in parts]
    sum_v = np.sum(np.stack([p[1] for p in parts]), axis=0)
    sum_vv = np.sum(np.stack([p[2] for p in parts]), axis=0)
    n = sum(counts)

    mean_v, cov_mean = _mean_and_cov(sum_v, sum_vv, n)
    mean_rho = _rho_from_vector(mean_v)
    stderr = _observable_stderr(mean_v, cov_mean)
    obs = ObservableSeries.from_density_series(cfg.grid.times(), mean_rho, stderr=stderr)
    return EnsembleResult(
        grid=cfg.grid,
        mean_rho=mean_rho,
        observables=obs,
        n_effective=n,
        sum_v=sum_v,
        sum_vv=sum_vv,
        chunk_counts=counts,
        chunk_sums=[p[1] for p in parts],
    )


@dataclass
class ConvergenceReport:
    n_total: int
    n_half: int
    max_stderr: dict[str, float]
    half_sample_max_sigma: dict[str, float]
    passed: bool


def _observables_from_mean(mean_v: np.ndarray) -> dict[str, np.ndarray]:
    zr, zi = mean_v[:, 7], mean_v[:, 8]
    amp = np.hypot(zr, zi)
    pop = mean_v[:, 1] + mean_v[:, 2]
    frac = np.where(pop < C_DENOMINATOR_FLOOR, 0.0, amp / np.where(pop == 0.0, 1.0, pop))
    pur = (mean_v[:, :3] ** 2).sum(axis=1) + 2.0 * (mean_v[:, 3:] ** 2).sum(axis=1)
    return {
        "rho_gg": mean_v[:, 0],
        "rho_11": mean_v[:, 1],
        "rho_22": mean_v[:, 2],
        "re_rho12": zr,
        "im_rho12": zi,
        "abs_rho12": amp,
        "coherence_fraction": frac,
        "purity": pur,
    }


def convergence_report(result: EnsembleResult, seed: int = 0) -> ConvergenceReport:
    """Convergence diagnostics: worst-case standard errors plus a half-sample
    stability check (observables recomputed from a random half of the
    trajectories, at chunk granularity, must agree with the full-ensemble
    values within 3 combined standard errors)."""
    if result.n_effective < 2:
        raise ValueError("convergence report requires at least 2 trajectories")

    max_se = {k: float(np.max(result.observables.stderr[k])) for k in STDERR_KEYS}

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(result.chunk_counts))
    target = result.n_effective // 2
    picked, n_half = [], 0
    for i in order:
        picked.append(i)
        n_half += result.chunk_counts[i]
        if n_half >= target:
            break
    sum_half = np.sum(np.stack([result.chunk_sums[i] for i in picked]), axis=0)
    mean_half = sum_half / n_half

    mean_full = result.sum_v / result.n_effective
    # pooled per-trajectory covariance, reused for the half-sample errors
    pop_cov = (
        result.sum_vv - result.n_effective * np.einsum("tp,tq->tpq", mean_full, mean_full)
    ) / (result.n_effective - 1)
    se_full = _observable_stderr(mean_full, pop_cov / result.n_effective)
    se_half = _observable_stderr(mean_half, pop_cov / n_half)

    obs_full = _observables_from_mean(mean_full)
    obs_half = _observables_from_mean(mean_half)

    max_sigma: dict[str, float] = {}
    for k in STDERR_KEYS:
        combined = np.sqrt(se_full[k] ** 2 + se_half[k] ** 2)
        diff = np.abs(obs_full[k] - obs_half[k])
        with np.errstate(invalid="ignore", divide="ignore"):
            z = diff / combined
        # differences at the float-noise floor are agreement, not tension
        z = np.where(diff < 1e-12, 0.0, z)
        max_sigma[k] = float(np.max(z))

    passed = all(v <= 3.0 for v in max_sigma.values())
    return ConvergenceReport(
        n_total=result.n_effective,
        n_half=n_half,
        max_stderr=max_se,
        half_sample_max_sigma=max_sigma,
        passed=passed,
    )
