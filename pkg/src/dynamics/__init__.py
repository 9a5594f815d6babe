from .system import LinearSystem, companion_system
from .unmodeled import (
    UnmodeledMap,
    NoUnmodeled,
    HighPassNonlinearity,
    LinearFilterMap,
    unmodeled_step,
    hp_frequency_response,
)
from .simulate import Trajectory, Plant, simulate, open_loop, linear_feedback

__all__ = [
    "LinearSystem",
    "companion_system",
    "UnmodeledMap",
    "NoUnmodeled",
    "HighPassNonlinearity",
    "LinearFilterMap",
    "unmodeled_step",
    "hp_frequency_response",
    "Trajectory",
    "Plant",
    "simulate",
    "open_loop",
    "linear_feedback",
]
