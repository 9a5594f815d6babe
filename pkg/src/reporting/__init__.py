from .events import EpochCompleted, ControllerRetained, ReplicationFailed, ExperimentFinished
from .reporter import ProgressFormatter, ProgressReporter

__all__ = [
    "EpochCompleted",
    "ControllerRetained",
    "ReplicationFailed",
    "ExperimentFinished",
    "ProgressFormatter",
    "ProgressReporter",
]
