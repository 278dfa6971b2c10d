"""Maronna robust scatter estimation with random-matrix deterministic equivalents."""

__version__ = "0.1.0"

from .datagen import ObservationSet, generate_mixing, generate_observations
from .equivalents import (
    EquivalentResult,
    degenerate_delta,
    solve_chi_gamma_hat,
    solve_chi_gamma_infinity,
    solve_delta_system,
    solve_e_system,
    solve_eta,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ModelWarning,
    NumericalError,
    RobScatterError,
    ValidationError,
)
from .estimator import ScatterResult, assemble_S_hat, extract_q, solve_maronna
from .harness import ExperimentConfig, MsePoint, run_equivalence_diagnostics, run_mse_experiment
from .measures import DiscreteMeasure, empirical, point_mass, spectral_measure
from .weights import WeightFamily

__all__ = [
    "__version__",
    "ObservationSet",
    "generate_mixing",
    "generate_observations",
    "EquivalentResult",
    "degenerate_delta",
    "solve_chi_gamma_hat",
    "solve_chi_gamma_infinity",
    "solve_delta_system",
    "solve_e_system",
    "solve_eta",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "ModelWarning",
    "NumericalError",
    "RobScatterError",
    "ValidationError",
    "ScatterResult",
    "assemble_S_hat",
    "extract_q",
    "solve_maronna",
    "ExperimentConfig",
    "MsePoint",
    "run_equivalence_diagnostics",
    "run_mse_experiment",
    "DiscreteMeasure",
    "empirical",
    "point_mass",
    "spectral_measure",
    "WeightFamily",
]
