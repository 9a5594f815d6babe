from .config import Config
from .errors import ToolkitError, ConfigError, NumericalError
from .dynamics import LinearSystem, companion_system, simulate
from .control import CostMatrices, EpochConfig, run_epoch_doubling, solve_dare
from .harness import ScenarioConfig, ExperimentService, run_scenario

__all__ = [
    "Config",
    "ToolkitError",
    "ConfigError",
    "NumericalError",
    "LinearSystem",
    "companion_system",
    "simulate",
    "CostMatrices",
    "EpochConfig",
    "run_epoch_doubling",
    "solve_dare",
    "ScenarioConfig",
    "ExperimentService",
    "run_scenario",
]
