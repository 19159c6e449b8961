"""Spin market model on small networks: agents balance a local-majority
pull against a global-minority penalty under synchronous heat-bath updates.
The package builds the lattice topologies and their random depletions, runs
reproducible simulations, extracts ordered-regime intervals from the
tracked-site field, and fits the transition statistics (survival curves,
exponential rates, ANOVA/Tukey-Kramer, power laws)."""

__version__ = "0.1.0"

from .dynamics import (ModelParams, Trajectory, flip_probability, local_field,
                       run, step_synchronous)
from .errors import (ConfigError, DegenerateFitError, DepletionError,
                     DomainError, InsufficientDataError, SpinMarketError,
                     TopologyError)
from .experiment import (ExperimentConfig, ExperimentReport, ModelSpec,
                         default_models, emit_plot_data, load_config,
                         run_experiment)
from .network import (Network, build_moore_torus, build_ring,
                      build_von_neumann_torus, eliminate_random_in_links)
from .phase import (OrderedInterval, PhaseStats, extract_ordered_intervals,
                    phase_stats)
from .rng import Xoshiro256, derive_seed, mix64
from .stats import (AnovaResult, ExponentialFit, PowerLawFit, SurvivalCurve,
                    TukeyResult, anova_one_way, exponentiality_check,
                    fit_exponential_rate, fit_power_law,
                    studentized_range_quantile, survival_function,
                    tukey_kramer)

__all__ = [
    "__version__",
    "ModelParams", "Trajectory", "flip_probability", "local_field", "run",
    "step_synchronous",
    "ConfigError", "DegenerateFitError", "DepletionError", "DomainError",
    "InsufficientDataError", "SpinMarketError", "TopologyError",
    "ExperimentConfig", "ExperimentReport", "ModelSpec", "default_models",
    "emit_plot_data", "load_config", "run_experiment",
    "Network", "build_moore_torus", "build_ring", "build_von_neumann_torus",
    "eliminate_random_in_links",
    "OrderedInterval", "PhaseStats", "extract_ordered_intervals", "phase_stats",
    "Xoshiro256", "derive_seed", "mix64",
    "AnovaResult", "ExponentialFit", "PowerLawFit", "SurvivalCurve",
    "TukeyResult", "anova_one_way", "exponentiality_check",
    "fit_exponential_rate", "fit_power_law", "studentized_range_quantile",
    "survival_function", "tukey_kramer",
]
