from dataclasses import dataclass
from typing import Union

import numpy as np

from .riccati import CostMatrices
from ..dynamics.simulate import Trajectory
from ..errors import DimensionMismatch


@dataclass(frozen=True)
class RegretRecord:
    costs: np.ndarray  # c_k = x_kᵀQx_k + u_kᵀRu_k
    baseline: np.ndarray  # per-step J_* (constant) or paired optimal-controller cost
    regret: np.ndarray  # Regret(1..T)

    @property
    def J_star(self) -> float:
        return float(self.baseline.mean()) if self.baseline.size else 0.0

    @property
    def length(self) -> int:
        return self.costs.size

    def at(self, T: int) -> float:
        """Regret(T); Regret(0) = 0."""
        return 0.0 if T == 0 else float(self.regret[T - 1])

    def between(self, T1: int, T2: int) -> float:
        return float(np.sum(self.costs[T1:T2] - self.baseline[T1:T2]))


def stage_costs(traj: Trajectory, costs: CostMatrices) -> np.ndarray:
    if costs.Q.shape[0] != traj.n or costs.R.shape[0] != traj.m:
        raise DimensionMismatch(f"Cost matrices do not match n={traj.n}, m={traj.m}")
    x = traj.states[:-1]
    u = traj.inputs
    return np.einsum("ki,ij,kj->k", x, costs.Q, x) + np.einsum("ki,ij,kj->k", u, costs.R, u)


def regret(traj: Trajectory, costs: CostMatrices, J_star: Union[float, np.ndarray]) -> RegretRecord:
    """Running Σ_{k≤T}(c_k − J_*); ``J_star`` may be a per-step baseline cost sequence."""
    per_step = stage_costs(traj, costs)
    baseline = np.broadcast_to(np.asarray(J_star, dtype=float), per_step.shape).copy()
    return RegretRecord(costs=per_step, baseline=baseline, regret=np.cumsum(per_step - baseline))
