from dataclasses import dataclass

import numpy as np

from ..dynamics.system import LinearSystem
from ..errors import DimensionMismatch, NoStabilizingController, NotStabilizable
from ..numerics.linalg import operator_norm, sigma_min, spectral_radius, symmetric_extremes
from ..numerics.rng import RngSpec
from ..utils.logger import get_logger

logger = get_logger(__name__)

DARE_TOLERANCE = 1e-10
DARE_MAX_ITER = 100_000
DIVERGENCE_LIMIT = 1e12
MAX_PERTURB_RETRIES = 10


@dataclass(frozen=True)
class CostMatrices:
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.array(self.Q, dtype=float))
        R = np.atleast_2d(np.array(self.R, dtype=float))
        for name, M in (("Q", Q), ("R", R)):
            if M.shape[0] != M.shape[1]:
                raise DimensionMismatch(f"{name} must be square, got {M.shape}")
            if not np.allclose(M, M.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
        if symmetric_extremes(Q)[0] < -1e-12:
            raise ValueError("Q must be positive semidefinite")
        if symmetric_extremes(R)[0] <= 0.0:
            raise ValueError("R must be positive definite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @classmethod
    def scaled_identity(cls, n: int, m: int, q: float = 1.0, r: float = 1.0) -> "CostMatrices":
        return cls(q * np.eye(n), r * np.eye(m))

    def stage_cost(self, x: np.ndarray, u: np.ndarray) -> float:
        return float(x @ self.Q @ x + u @ self.R @ u)


@dataclass(frozen=True)
class LqrSolution:
    P: np.ndarray
    K: np.ndarray
    J_star: float
    riccati_residual: float
    iterations: int = 0
    closed_loop_radius: float = 0.0


def riccati_update(A, B, Q, R, P) -> np.ndarray:
    BtPA = B.T @ P @ A
    return A.T @ P @ A - BtPA.T @ np.linalg.solve(R + B.T @ P @ B, BtPA) + Q


def lqr_gain(A, B, R, P) -> np.ndarray:
    return -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)


def solve_dare(
    A,
    B,
    Q,
    R,
    tol: float = DARE_TOLERANCE,
    max_iter: int = DARE_MAX_ITER,
    sigma: float = 0.0,
) -> LqrSolution:
    """Value iteration P ← AᵀPA − AᵀPB(R + BᵀPB)^{-1}BᵀPA + Q from P₀ = Q.

    Stops once the relative change drops below ``tol``; divergence, a
    non-stabilizing gain or an exhausted budget mean the pair is not
    stabilizable (for the given costs).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    B = B.reshape(-1, 1) if B.ndim == 1 else np.atleast_2d(B)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if B.shape[0] != A.shape[0] or Q.shape != A.shape or R.shape != (B.shape[1], B.shape[1]):
        raise DimensionMismatch(f"Incompatible shapes A{A.shape} B{B.shape} Q{Q.shape} R{R.shape}")

    P = Q.copy()
    for iteration in range(1, max_iter + 1):
        P_next = riccati_update(A, B, Q, R, P)
        P_next = 0.5 * (P_next + P_next.T)
        norm_next = operator_norm(P_next)
        if not np.isfinite(norm_next) or norm_next > DIVERGENCE_LIMIT:
            raise NotStabilizable(f"Riccati iteration diverged after {iteration} iterations (||P||={norm_next:.3e})")

        change = operator_norm(P_next - P)
        P = P_next
        if change <= tol * max(1.0, norm_next):
            break
    else:
        raise NotStabilizable(f"Riccati iteration did not converge in {max_iter} iterations")

    K = lqr_gain(A, B, R, P)
    radius = spectral_radius(A + B @ K)
    if radius >= 1.0:
        raise NotStabilizable(f"Converged gain does not stabilize the pair (closed-loop radius {radius:.4f})")

    residual = operator_norm(riccati_update(A, B, Q, R, P) - P)
    return LqrSolution(
        P=P,
        K=K,
        J_star=optimal_average_cost(P, sigma),
        riccati_residual=residual,
        iterations=iteration,
        closed_loop_radius=radius,
    )


def solve_lqr(system: LinearSystem, costs: CostMatrices, **kwargs) -> LqrSolution:
    return solve_dare(system.A, system.B, costs.Q, costs.R, sigma=system.sigma, **kwargs)


def optimal_average_cost(P, sigma: float) -> float:
    """J_* = σ² tr(P), the average cost of the optimal controller under N(0, σ²I) noise."""
    return float(sigma**2 * np.trace(np.atleast_2d(P)))


def controllability_matrix(A, B, ell: int) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    B = B.reshape(-1, 1) if B.ndim == 1 else np.atleast_2d(B)
    blocks = [B]
    for _ in range(ell - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def ln_stability(A, B, ell: int) -> float:
    """ν = σ_min([B, AB, …, A^{ℓ-1}B])."""
    if ell < 1:
        raise ValueError(f"ell must be at least 1, got {ell}")
    return sigma_min(controllability_matrix(A, B, ell))


def perturbed_initial_controller(
    truth: LinearSystem,
    costs: CostMatrices,
    perturb_scale: float,
    rng: RngSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """K⁰ from an LQR design on a model whose bottom row of A is Gaussian-perturbed.

    The perturbation is redrawn at half the scale until K⁰ stabilizes the true
    plant. Returns ``(K0, A_hat0)``.
    """
    generator = rng.generator()
    scale = perturb_scale

    for attempt in range(MAX_PERTURB_RETRIES + 1):
        A_hat = truth.A.copy()
        A_hat[-1, :] += scale * generator.standard_normal(truth.n)
        try:
            K0 = solve_dare(A_hat, truth.B, costs.Q, costs.R).K
        except NotStabilizable:
            logger.debug(f"Perturbed model not stabilizable at scale {scale:.3g}, retrying")
        else:
            radius = spectral_radius(truth.closed_loop(K0))
            if radius < 1.0:
                return K0, A_hat
            logger.debug(f"K0 leaves true closed loop at radius {radius:.4f} (scale {scale:.3g}), retrying")
        scale /= 2.0

    raise NoStabilizingController(f"No stabilizing initial controller after {MAX_PERTURB_RETRIES} retries")
