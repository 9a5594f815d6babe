from dataclasses import dataclass, field
from typing import List, Optional


@dataclass
class EpochCompleted:
    label: str
    epoch: int
    length: int
    amplitude_cap: float
    err_A: float
    err_B: float
    closed_loop_radius: float
    status: str  # "updated", "rank_deficient" or "not_stabilizable"


@dataclass
class ControllerRetained:
    label: str
    epoch: int
    reason: str


@dataclass
class ReplicationFailed:
    label: str
    replication: int
    error_message: str
    step: Optional[int] = None


@dataclass
class ExperimentFinished:
    command: str
    replications: int
    failures: int
    elapsed: float
    outputs: List[str] = field(default_factory=list)
