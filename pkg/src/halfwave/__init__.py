"""Solitary waves of the one-dimensional half-wave equation.

Ground states, linearized spectra, modulation decompositions, and
multi-soliton stability experiments for

    i u_t - D u + |u|^{p-1} u = 0,   D = |xi|,   1 < p < 3,

on a periodic box, with spectral discretization throughout.
"""

from .evolution import EvolutionError, Trajectory, conservation_report, evolve, step
from .experiments import (
    CutoffSpec,
    RunSettings,
    StabilityReport,
    cutoff_field,
    experiment_cutoff,
    get_family,
    initial_data,
    run_single_wave_stability,
    run_two_wave_stability,
)
from .grid import Field, Grid, make_grid
from .ground_state import (
    ConvergenceError,
    GroundState,
    GroundStateFamily,
    solve_ground_state,
)
from .linearized import (
    apply_linearized,
    constrained_min_eigenvalue,
    localized_weight,
    quadratic_form_H0,
    quadratic_form_HK,
)
from .modulation import (
    Decomposition,
    DecompositionError,
    WaveParams,
    decompose,
    initial_guess,
    modulation_rates,
    track,
)
from .spectral import (
    conserved_quantities,
    fractional_derivative,
    half_wave,
    l2_norm,
    sobolev_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CutoffSpec",
    "Decomposition",
    "DecompositionError",
    "EvolutionError",
    "Field",
    "Grid",
    "GroundState",
    "GroundStateFamily",
    "RunSettings",
    "StabilityReport",
    "Trajectory",
    "WaveParams",
    "apply_linearized",
    "conservation_report",
    "conserved_quantities",
    "constrained_min_eigenvalue",
    "cutoff_field",
    "decompose",
    "evolve",
    "experiment_cutoff",
    "fractional_derivative",
    "get_family",
    "half_wave",
    "initial_data",
    "initial_guess",
    "l2_norm",
    "localized_weight",
    "make_grid",
    "modulation_rates",
    "quadratic_form_H0",
    "quadratic_form_HK",
    "run_single_wave_stability",
    "run_two_wave_stability",
    "sobolev_norm",
    "solve_ground_state",
    "step",
    "track",
    "__version__",
]
