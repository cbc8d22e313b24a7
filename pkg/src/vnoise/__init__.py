"""Stochastic simulation of a closed V system driven by noisy CW light.

Two uncorrelated white-noise pumps leave the excited states incoherent while
equilibrating all populations to 1/3; two uncorrelated collisionally
broadened CW lasers generate a transient excited-state coherence that grows
as the excited-state splitting shrinks relative to the field coherence time.
"""

from .ensemble import (
    ConvergenceReport,
    DriveScenario,
    EnsembleConfig,
    EnsembleResult,
    convergence_report,
    run_ensemble,
)
from .errors import ConfigError, NumericalGuardError
from .fields import (
    CorrelationSeries,
    FieldParams,
    FieldRealization,
    NoiseModel,
    estimate_cross_correlation,
    estimate_g1,
    sample_field,
)
from .grids import TimeGrid
from .series import ObservableSeries
from .vsystem import (
    CarrierScheme,
    CouplingScheme,
    DriveConfig,
    VSystemParams,
    build_hamiltonian,
    coherence_fraction,
    ground_state,
    hamiltonian_path,
    propagate,
    purity,
)
from .whitenoise import PumpRates, WhiteNoiseState, rate_rhs, solve_white_noise, steady_state

__version__ = "0.1.0"

__all__ = [
    "CarrierScheme",
    "ConfigError",
    "ConvergenceReport",
    "CorrelationSeries",
    "CouplingScheme",
    "DriveConfig",
    "DriveScenario",
    "EnsembleConfig",
    "EnsembleResult",
    "FieldParams",
    "FieldRealization",
    "NoiseModel",
    "NumericalGuardError",
    "ObservableSeries",
    "PumpRates",
    "TimeGrid",
    "VSystemParams",
    "WhiteNoiseState",
    "build_hamiltonian",
    "coherence_fraction",
    "convergence_report",
    "estimate_cross_correlation",
    "estimate_g1",
    "ground_state",
    "hamiltonian_path",
    "propagate",
    "purity",
    "rate_rhs",
    "run_ensemble",
    "sample_field",
    "solve_white_noise",
    "steady_state",
    "__version__",
]
