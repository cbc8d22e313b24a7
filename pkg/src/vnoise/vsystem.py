"""Closed V system: Hamiltonian construction, propagation, observables.

Basis order is (|g>, |1>, |2>). States are plain 3x3 complex ndarrays.
hbar = 1 throughout; Hamiltonians are angular frequencies in rad/fs.

Propagation happens in the rotating frame in which each optical carrier is
factored out and the Hamiltonian diagonal vanishes. Couplings then read

    H[g,1] = -rabi_1 * env1(t) * exp(i D1 t)
    H[g,2] = -rabi_2 * env2(t) * exp(i D2 t)

with detunings D_i fixed by the carrier scheme, and no direct 1-2 coupling.
Two drive-geometry switches are exposed because they change the physics
qualitatively (see DriveConfig).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalGuardError
from .grids import TimeGrid

__all__ = [
    "CouplingScheme",
    "CarrierScheme",
    "DriveConfig",
    "VSystemParams",
    "ground_state",
    "check_density_matrix",
    "purity",
    "coherence_fraction",
    "coupling_factors",
    "build_hamiltonian",
    "hamiltonian_path",
    "propagate",
]

# Per-step stability guard for the piecewise-constant steppers.
MAX_STEP_PHASE = 0.5
# Excited population below which the coherence fraction is defined as 0.
C_DENOMINATOR_FLOOR = 1e-12


class CouplingScheme(enum.Enum):
    """Which transitions each field drives.

    EXCLUSIVE     -- field i drives only transition g->i.
    CROSS_COUPLED -- each field also drives the other transition, picking up
                     the extra detuning -+omega_21 of its carrier relative to
                     that transition.

    With EXCLUSIVE coupling each field enters exactly one matrix element, so
    an independent global phase shift of either field is a diagonal gauge
    rotation of the state: the ensemble-averaged excited-state coherence then
    vanishes identically for uniformly distributed initial phases, whatever
    the carrier scheme. Splitting-dependent ensemble coherence requires
    CROSS_COUPLED.
    """

    EXCLUSIVE = "exclusive"
    CROSS_COUPLED = "cross_coupled"


class CarrierScheme(enum.Enum):
    """Where the carriers sit relative to the two transitions.

    PER_TRANSITION -- each carrier resonant with its own transition (D_i = 0).
    COMMON_CARRIER -- one shared carrier centered between the transitions
                      (D1 = +omega_21/2, D2 = -omega_21/2).
    """

    PER_TRANSITION = "per_transition"
    COMMON_CARRIER = "common_carrier"


@dataclass(frozen=True)
class DriveConfig:
    coupling: CouplingScheme = CouplingScheme.EXCLUSIVE
    carrier: CarrierScheme = CarrierScheme.PER_TRANSITION


@dataclass(frozen=True)
class VSystemParams:
    """Excited-state splitting and coupling strengths, all in rad/fs.

    Only energy differences matter; the ground level is the zero of energy
    and the splitting enters through omega_21 alone.
    """

    omega_21: float
    rabi_1: float
    rabi_2: float

    def __post_init__(self):
        if self.omega_21 < 0.0:
            raise ConfigError("system.omega_21: must be >= 0")
        if self.rabi_1 < 0.0 or self.rabi_2 < 0.0:
            raise ConfigError("system.rabi: coupling strengths must be >= 0")

    @property
    def tau_c(self) -> float:
        """Characteristic excited-state period 2*pi/omega_21 (fs)."""
        return math.inf if self.omega_21 == 0.0 else 2.0 * math.pi / self.omega_21

    @classmethod
    def from_tau_c(cls, tau_c: float, rabi_1: float, rabi_2: float) -> "VSystemParams":
        if not (tau_c > 0.0):
            raise ConfigError("system.tau_c_fs: must be > 0")
        omega = 0.0 if math.isinf(tau_c) else 2.0 * math.pi / tau_c
        return cls(omega, rabi_1, rabi_2)


def ground_state() -> np.ndarray:
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-12,
    trace_tol: float = 1e-9,
    psd_tol: float = 1e-9,
) -> None:
    """Raise if rho is not Hermitian, unit-trace, positive-semidefinite 3x3."""
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= herm_tol:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho^+| = {herm:g}")
    tr = np.trace(rho)
    if abs(tr - 1.0) >= trace_tol:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -psd_tol:
        raise ValueError(f"density matrix not positive semidefinite: min eig {evals.min():g}")


def purity(rho: np.ndarray) -> np.ndarray | float:
    """Tr[rho^2], real. Accepts a single matrix or a stacked (..., 3, 3) array."""
    rho = np.asarray(rho)
    val = np.einsum("...ij,...ji->...", rho, rho)
    if np.max(np.abs(np.imag(val))) > 1e-12:
        raise ValueError("purity has a non-negligible imaginary part; input not Hermitian?")
    out = np.real(val)
    return float(out) if out.ndim == 0 else out


def coherence_fraction(rho: np.ndarray) -> np.ndarray | float:
    """|rho_12| / (rho_11 + rho_22), defined as 0 at vanishing excited population."""
    rho = np.asarray(rho)
    num = np.abs(rho[..., 1, 2])
    den = np.real(rho[..., 1, 1] + rho[..., 2, 2])
    out = np.where(den < C_DENOMINATOR_FLOOR, 0.0, num / np.where(den == 0.0, 1.0, den))
    return float(out) if out.ndim == 0 else out


def coupling_factors(
    t, sys: VSystemParams, cfg: DriveConfig, detuning_1: float = 0.0, detuning_2: float = 0.0
) -> tuple:
    """Deterministic phase factors multiplying each (field, transition) pair.

    Returns (p1, q2, p2, q1) where H[g,1] = -(rabi_1*env1*p1 + rabi_2*env2*q2)
    and H[g,2] = -(rabi_2*env2*p2 + rabi_1*env1*q1); q terms are zero for
    exclusive coupling. ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=float)
    if cfg.carrier is CarrierScheme.PER_TRANSITION:
        d1, d2 = detuning_1, detuning_2
    elif cfg.carrier is CarrierScheme.COMMON_CARRIER:
        d1 = 0.5 * sys.omega_21 + detuning_1
        d2 = -0.5 * sys.omega_21 + detuning_2
    else:
        raise ConfigError(f"drive.carrier: unknown carrier scheme {cfg.carrier!r}")

    p1 = np.exp(1j * d1 * t)
    p2 = np.exp(1j * d2 * t)
    if cfg.coupling is CouplingScheme.EXCLUSIVE:
        q2 = np.zeros_like(p1)
        q1 = np.zeros_like(p2)
    elif cfg.coupling is CouplingScheme.CROSS_COUPLED:
        # Cross terms: the other field's carrier seen from this transition.
        q2 = np.exp(1j * (d2 + sys.omega_21) * t)
        q1 = np.exp(1j * (d1 - sys.omega_21) * t)
    else:
        raise ConfigError(f"drive.coupling: unknown coupling scheme {cfg.coupling!r}")
    return p1, q2, p2, q1


def build_hamiltonian(
    t: float,
    sys: VSystemParams,
    env1: complex,
    env2: complex,
    cfg: DriveConfig,
    detuning_1: float = 0.0,
    detuning_2: float = 0.0,
) -> np.ndarray:
    """Rotating-frame Hamiltonian sample at time t. Hermitian, zero diagonal."""
    for name, env in (("env1", env1), ("env2", env2)):
        if abs(abs(env) - 1.0) > 1e-9:
            raise ValueError(f"{name} must have unit modulus, got |{name}| = {abs(env):.12g}")
    p1, q2, p2, q1 = coupling_factors(t, sys, cfg, detuning_1, detuning_2)
    h01 = -(sys.rabi_1 * env1 * p1 + sys.rabi_2 * env2 * q2)
    h02 = -(sys.rabi_2 * env2 * p2 + sys.rabi_1 * env1 * q1)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = h01
    h[1, 0] = np.conj(h01)
    h[0, 2] = h02
    h[2, 0] = np.conj(h02)
    return h


def hamiltonian_path(
    sys: VSystemParams,
    env1: np.ndarray,
    env2: np.ndarray,
    step_times: np.ndarray,
    cfg: DriveConfig,
    detuning_1: float = 0.0,
    detuning_2: float = 0.0,
) -> np.ndarray:
    """Stack of per-step Hamiltonians, one per entry of ``step_times``.

    ``env1``/``env2`` are the envelope samples at those times (conventionally
    interval midpoints, so the piecewise-constant stepper is second-order
    accurate in the deterministic detuning phases).
    """
    env1 = np.asarray(env1)
    env2 = np.asarray(env2)
    step_times = np.asarray(step_times, dtype=float)
    if not (env1.shape == env2.shape == step_times.shape):
        raise ValueError("env1, env2 and step_times must have matching shapes")
    p1, q2, p2, q1 = coupling_factors(step_times, sys, cfg, detuning_1, detuning_2)
    h01 = -(sys.rabi_1 * env1 * p1 + sys.rabi_2 * env2 * q2)
    h02 = -(sys.rabi_2 * env2 * p2 + sys.rabi_1 * env1 * q1)
    h = np.zeros(step_times.shape + (3, 3), dtype=complex)
    h[..., 0, 1] = h01
    h[..., 1, 0] = h01.conj()
    h[..., 0, 2] = h02
    h[..., 2, 0] = h02.conj()
    return h


def _check_step_size(h_path: np.ndarray, dt: float) -> None:
    # Spectral norms: eigenvalues of each step Hamiltonian are 0, +-r.
    norms = np.sqrt(np.abs(h_path[..., 0, 1]) ** 2 + np.abs(h_path[..., 0, 2]) ** 2)
    worst = float(norms.max()) if norms.size else 0.0
    if dt * worst > MAX_STEP_PHASE:
        raise NumericalGuardError(
            f"step too large: dt*max||H|| = {dt * worst:.3g} > {MAX_STEP_PHASE}"
        )


def _rk4_step(rho: np.ndarray, h: np.ndarray, dt: float, substeps: int) -> np.ndarray:
    def deriv(r):
        return -1j * (h @ r - r @ h)

    sub = dt / substeps
    for _ in range(substeps):
        k1 = deriv(rho)
        k2 = deriv(rho + 0.5 * sub * k1)
        k3 = deriv(rho + 0.5 * sub * k2)
        k4 = deriv(rho + sub * k3)
        rho = rho + (sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def propagate(
    rho0: np.ndarray,
    h_path: np.ndarray,
    grid: TimeGrid,
    method: str = "piecewise_exp",
    rk_substeps: int = 1,
) -> np.ndarray:
    """Evolve rho0 through the piecewise-constant Hamiltonian path.

    ``grid`` holds the n+1 output times; ``h_path`` holds the n step
    Hamiltonians, H[k] acting on [t_k, t_{k+1}). Returns the (n+1, 3, 3)
    state history, rho(t_0) first.

    piecewise_exp: rho <- U rho U^+ with U = exp(-i H dt) from the
    eigendecomposition of H; exact for piecewise-constant H and exactly
    unitary per step. rk4: classical fourth-order integration of
    d rho/dt = -i [H, rho] on the same held path, kept as an independent
    cross-check.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0)
    h_path = np.asarray(h_path, dtype=complex)
    n_steps = grid.n_samples - 1
    if h_path.shape != (n_steps, 3, 3):
        raise ValueError(f"h_path must have shape ({n_steps}, 3, 3), got {h_path.shape}")
    _check_step_size(h_path, grid.dt)

    out = np.empty((grid.n_samples, 3, 3), dtype=complex)
    out[0] = rho0
    rho = rho0
    if method == "piecewise_exp":
        for k in range(n_steps):
            w, v = np.linalg.eigh(h_path[k])
            u = (v * np.exp(-1j * w * grid.dt)) @ v.conj().T
            rho = u @ rho @ u.conj().T
            out[k + 1] = rho
    elif method == "rk4":
        if rk_substeps < 1:
            raise ValueError("rk_substeps must be >= 1")
        for k in range(n_steps):
            rho = _rk4_step(rho, h_path[k], grid.dt, rk_substeps)
            out[k + 1] = rho
    else:
        raise ValueError(f"unknown method {method!r}; use 'piecewise_exp' or 'rk4'")
    return out
