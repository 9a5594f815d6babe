from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from ..dynamics.simulate import Trajectory
from ..errors import NonConvergence


@dataclass(frozen=True)
class RecursiveState:
    theta: np.ndarray
    gamma: float
    error: np.ndarray  # e_k = θ_kᵀφ_k − y_k
    normalization: float  # 𝒩_k = 1 + φ_kᵀφ_k


def recursive_estimate(
    stream: Iterable[tuple[np.ndarray, np.ndarray]],
    gamma: float,
    theta0: Optional[np.ndarray] = None,
) -> Iterator[RecursiveState]:
    """Normalized gradient estimator θ_{k+1} = θ_k − γ φ_k (θ_kᵀφ_k − y_k)ᵀ / (1 + φ_kᵀφ_k).

    ``theta`` has shape ``(p, q)`` for p regressors and q-dimensional targets;
    scalar targets keep a ``(p,)`` vector. Yields the state after every update.
    """
    if not 0.0 < gamma < 2.0:
        raise ValueError(f"gamma must lie in (0, 2), got {gamma}")

    theta = None if theta0 is None else np.array(theta0, dtype=float)
    for phi, y in stream:
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        y = np.asarray(y, dtype=float)
        if theta is None:
            theta = np.zeros((phi.size,) + y.shape)

        error = np.tensordot(phi, theta, axes=(0, 0)) - y
        normalization = 1.0 + float(phi @ phi)
        theta = theta - gamma * np.multiply.outer(phi, error) / normalization
        if not np.all(np.isfinite(theta)):
            raise NonConvergence("Recursive estimate diverged")
        yield RecursiveState(theta=theta.copy(), gamma=gamma, error=error, normalization=normalization)


def trajectory_stream(traj: Trajectory, passes: int = 1) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """(φ_k, x_{k+1}) pairs of a trajectory, repeated ``passes`` times."""
    phis = traj.regressors()
    targets = traj.states[1:]
    for _ in range(passes):
        yield from zip(phis, targets)


def final_estimate(states: Iterable[RecursiveState]) -> RecursiveState:
    last = None
    for last in states:
        pass
    if last is None:
        raise ValueError("Recursive estimator received no data")
    return last
