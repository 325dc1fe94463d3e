"""Load-aware informative path planning toolkit.

Thin Python surface over the C++ core: scenario generation and I/O, the
exact load-aware planner with its enumeration oracle, the classical and
greedy baselines, posterior-variance evaluation, and the integer-model
export/validation pipeline.
"""

from ._lipp import (
    EnergyParams,
    Kernel,
    Plan,
    Scenario,
    SolveReport,
    assignment_json,
    distance_bound,
    export_miqp,
    generate_scenario,
    optimal_llse,
    path_energy,
    posterior_variance,
    prior_variance,
    run_cli,
    solve_cipp,
    solve_greedy,
    solve_lipp,
    validate_file,
)

__all__ = [
    "EnergyParams",
    "Kernel",
    "Plan",
    "Scenario",
    "SolveReport",
    "assignment_json",
    "distance_bound",
    "export_miqp",
    "generate_scenario",
    "optimal_llse",
    "path_energy",
    "posterior_variance",
    "prior_variance",
    "run_cli",
    "solve_cipp",
    "solve_greedy",
    "solve_lipp",
    "validate_file",
]

__version__ = "0.1.0"
