"""recurflow: recurrence analysis for nonautonomously forced 2-D flow.

A library plus CLI that integrates the incompressible Navier-Stokes equations
on the 2pi-periodic torus under time-dependent forcing and examines the
result with the vocabulary of nonautonomous dynamics: translation (shift)
orbits of the forcing in the compact-open topology, epsilon-shift sets and
inclusion lengths, Poisson return times, and skew-product trajectories whose
base is the driven forcing and whose fiber is the flow.  The headline
experiments look for recurrent solutions under recurrent forcing and Poisson
stable solutions under Poisson stable forcing.
"""

from .signals import (AnalyticSignal, CompactOpenMetricParams, CoverageError,
                      SampledPath, TimeGrid, compact_open_distance, evaluate,
                      seminorm_dn, translate, window_grid)
from .recurrence import (ClassifyParams, EquicontinuityProbe, OmegaLimitSample,
                         RecurrenceReport, ReturnTimes, ShiftSet,
                         boundedness_scan, classify, classify_from_evidence,
                         equicontinuity_probe, inclusion_length,
                         omega_limit_sample, poisson_return_times, shift_set)
from .nse2d import (BlowUpError, ForcingField, NonFiniteStateError,
                    SolverConfig, SpectralField, Trajectory, bilinear_term,
                    energy, enstrophy, inner_product, kolmogorov_field,
                    leray_project, load_trajectory, random_divfree_field,
                    save_trajectory, solve, step, stokes_apply)
from .skewprod import (CocycleCheckReport, CocycleState, HullElement,
                       SearchResult, SkewTrajectory, cocycle_check, drive,
                       poisson_stable_solution_search,
                       recurrent_solution_search, skew_trajectory)
from .config import ConfigError, ExperimentConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # signals
    "AnalyticSignal", "CompactOpenMetricParams", "CoverageError", "SampledPath",
    "TimeGrid", "compact_open_distance", "evaluate", "seminorm_dn", "translate",
    "window_grid",
    # recurrence
    "ClassifyParams", "EquicontinuityProbe", "OmegaLimitSample",
    "RecurrenceReport", "ReturnTimes", "ShiftSet", "boundedness_scan",
    "classify", "classify_from_evidence", "equicontinuity_probe",
    "inclusion_length", "omega_limit_sample", "poisson_return_times",
    "shift_set",
    # nse2d
    "BlowUpError", "ForcingField", "NonFiniteStateError", "SolverConfig",
    "SpectralField", "Trajectory", "bilinear_term", "energy", "enstrophy",
    "inner_product", "kolmogorov_field", "leray_project", "load_trajectory",
    "random_divfree_field", "save_trajectory", "solve", "step", "stokes_apply",
    # skewprod
    "CocycleCheckReport", "CocycleState", "HullElement", "SearchResult",
    "SkewTrajectory", "cocycle_check", "drive",
    "poisson_stable_solution_search", "recurrent_solution_search",
    "skew_trajectory",
    # config
    "ConfigError", "ExperimentConfig", "parse_config",
]
