from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..dynamics.simulate import Trajectory
from ..dynamics.system import LinearSystem
from ..errors import DimensionMismatch, RankDeficient
from ..numerics.linalg import operator_norm, symmetric_extremes

RANK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class EstimationResult:
    A_hat: np.ndarray
    B_hat: np.ndarray
    gram: np.ndarray  # Y_T = Σ φ_k φ_kᵀ
    sample_count: int

    @property
    def theta(self) -> np.ndarray:
        """Stacked solution [Âᵀ; B̂ᵀ], shape ``(n+m, n)``."""
        return np.vstack([self.A_hat.T, self.B_hat.T])

    def as_system(self, sigma: float = 0.0) -> LinearSystem:
        return LinearSystem(self.A_hat, self.B_hat, sigma)


def least_squares(traj: Trajectory) -> EstimationResult:
    """argmin_{A,B} Σ ‖x_{k+1} − A x_k − B u_k‖² via pivoted QR on the stacked regressors."""
    n, m, T = traj.n, traj.m, traj.length
    phis = traj.regressors()
    targets = traj.states[1:]
    gram = phis.T @ phis

    if T < n + m:
        raise RankDeficient(f"{T} samples cannot determine {n + m} regressor coefficients")
    lambda_min, _ = symmetric_extremes(gram)
    trace = float(np.trace(gram))
    if trace <= 0.0 or lambda_min < RANK_TOLERANCE * trace:
        raise RankDeficient(f"Regressor Gram matrix is rank deficient (lambda_min={lambda_min:.3e}, trace={trace:.3e})")

    q, r, perm = scipy.linalg.qr(phis, mode="economic", pivoting=True)
    solution = scipy.linalg.solve_triangular(r, q.T @ targets)
    theta = np.empty_like(solution)
    theta[perm] = solution

    return EstimationResult(A_hat=theta[:n].T.copy(), B_hat=theta[n:].T.copy(), gram=gram, sample_count=T)


def normal_equation_residual(result: EstimationResult, traj: Trajectory) -> float:
    phis = traj.regressors()
    return operator_norm(result.gram @ result.theta - phis.T @ traj.states[1:])


def estimation_error(result: EstimationResult, truth: LinearSystem) -> float:
    """max(‖Â − A‖, ‖B̂ − B‖) in operator norm."""
    if result.A_hat.shape != truth.A.shape or result.B_hat.shape != truth.B.shape:
        raise DimensionMismatch(
            f"Estimate shapes {result.A_hat.shape}/{result.B_hat.shape} "
            f"do not match truth {truth.A.shape}/{truth.B.shape}"
        )
    return max(operator_norm(result.A_hat - truth.A), operator_norm(result.B_hat - truth.B))


def estimation_errors(result: EstimationResult, truth: LinearSystem) -> tuple[float, float]:
    estimation_error(result, truth)
    return operator_norm(result.A_hat - truth.A), operator_norm(result.B_hat - truth.B)
