from .least_squares import (
    EstimationResult,
    least_squares,
    estimation_error,
    estimation_errors,
    normal_equation_residual,
)
from .recursive import RecursiveState, recursive_estimate, trajectory_stream, final_estimate
from .bounds import (
    BoundReport,
    martingale_bound,
    self_normalized_statistic,
    deterministic_gram_upper_bound,
    theorem_bound,
    cross_term_tau,
    input_cross_power,
)

__all__ = [
    "EstimationResult",
    "least_squares",
    "estimation_error",
    "estimation_errors",
    "normal_equation_residual",
    "RecursiveState",
    "recursive_estimate",
    "trajectory_stream",
    "final_estimate",
    "BoundReport",
    "martingale_bound",
    "self_normalized_statistic",
    "deterministic_gram_upper_bound",
    "theorem_bound",
    "cross_term_tau",
    "input_cross_power",
]
