from .riccati import (
    CostMatrices,
    LqrSolution,
    solve_dare,
    solve_lqr,
    optimal_average_cost,
    controllability_matrix,
    ln_stability,
    perturbed_initial_controller,
)
from .regret import RegretRecord, stage_costs, regret
from .exploration import (
    EpochConfig,
    EpochState,
    ExplorationResult,
    run_epoch_doubling,
    calibrate_sigma,
)

__all__ = [
    "CostMatrices",
    "LqrSolution",
    "solve_dare",
    "solve_lqr",
    "optimal_average_cost",
    "controllability_matrix",
    "ln_stability",
    "perturbed_initial_controller",
    "RegretRecord",
    "stage_costs",
    "regret",
    "EpochConfig",
    "EpochState",
    "ExplorationResult",
    "run_epoch_doubling",
    "calibrate_sigma",
]
