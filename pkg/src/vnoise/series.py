"""Time series of the observables reported by every simulation mode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import vsystem

__all__ = ["ObservableSeries", "STDERR_KEYS"]

# Order matters: it fixes the CSV column layout.
STDERR_KEYS = (
    "rho_gg",
    "rho_11",
    "rho_22",
    "re_rho12",
    "im_rho12",
    "abs_rho12",
    "coherence_fraction",
    "purity",
)


@dataclass
class ObservableSeries:
    """Populations, excited-state coherence, coherence fraction and purity.

    For ensemble runs these are observables of the mean density matrix and
    ``stderr`` maps each key in STDERR_KEYS to a per-time standard error;
    deterministic solvers leave ``stderr`` as None.
    """

    t_fs: np.ndarray
    rho_gg: np.ndarray
    rho_11: np.ndarray
    rho_22: np.ndarray
    rho_12: np.ndarray
    coherence_fraction: np.ndarray
    purity: np.ndarray
    stderr: dict[str, np.ndarray] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.t_fs.size

    @property
    def abs_rho12(self) -> np.ndarray:
        return np.abs(self.rho_12)

    @classmethod
    def from_density_series(
        cls, t_fs: np.ndarray, rhos: np.ndarray, stderr: dict[str, np.ndarray] | None = None
    ) -> "ObservableSeries":
        rhos = np.asarray(rhos)
        return cls(
            t_fs=np.asarray(t_fs, dtype=float),
            rho_gg=np.real(rhos[:, 0, 0]),
            rho_11=np.real(rhos[:, 1, 1]),
            rho_22=np.real(rhos[:, 2, 2]),
            rho_12=rhos[:, 1, 2].copy(),
            coherence_fraction=vsystem.coherence_fraction(rhos),
            purity=vsystem.purity(rhos),
            stderr=stderr,
        )
