"""Uniform time grids.

All times are femtoseconds. Every sampled quantity in the package lives on
a uniform grid; non-uniform input is rejected rather than resampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["TimeGrid"]


@dataclass(frozen=True)
class TimeGrid:
    """``n_samples`` times t0, t0+dt, ..., strictly increasing."""

    n_samples: int
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("grid.n_samples: must be >= 1")
        if not (self.dt > 0.0):
            raise ConfigError("grid.dt: must be > 0")

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n_samples - 1) * self.dt

    @property
    def span(self) -> float:
        return (self.n_samples - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def midpoints(self) -> "TimeGrid":
        """Grid of the n-1 interval midpoints, used to sample drives per step."""
        if self.n_samples < 2:
            raise ConfigError("grid.n_samples: need >= 2 samples to take midpoints")
        return TimeGrid(self.n_samples - 1, self.dt, self.t0 + 0.5 * self.dt)

    @classmethod
    def from_span(cls, t_max: float, dt: float, t0: float = 0.0) -> "TimeGrid":
        """Grid covering [t0, t0+t_max] with spacing dt (t_max rounded to a step)."""
        if not (t_max > 0.0):
            raise ConfigError("grid.t_max_fs: must be > 0")
        if not (dt > 0.0):
            raise ConfigError("grid.dt_fs: must be > 0")
        n_steps = int(round(t_max / dt))
        if n_steps < 1:
            raise ConfigError("grid.t_max_fs: shorter than one step dt")
        return cls(n_steps + 1, dt, t0)

    @classmethod
    def from_times(cls, times: np.ndarray, rtol: float = 1e-9) -> "TimeGrid":
        """Validate that ``times`` is uniform and wrap it; reject otherwise."""
        t = np.asarray(times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ConfigError("grid: need a 1-D array of >= 2 times")
        steps = np.diff(t)
        dt = steps[0]
        if dt <= 0 or not np.allclose(steps, dt, rtol=rtol, atol=0.0):
            raise ConfigError("grid: times must be uniformly spaced and increasing")
        return cls(t.size, float(dt), float(t[0]))
