from .scenario import ScenarioConfig, RunSummary, summarize
from .service import ExperimentService, JobOutcome
from .experiments import (
    run_estimation_sweep,
    run_regret_experiment,
    run_lower_bound,
    run_actuator_demo,
    run_bode_sweep,
    run_scenario,
)

__all__ = [
    "ScenarioConfig",
    "RunSummary",
    "summarize",
    "ExperimentService",
    "JobOutcome",
    "run_estimation_sweep",
    "run_regret_experiment",
    "run_lower_bound",
    "run_actuator_demo",
    "run_bode_sweep",
    "run_scenario",
]
