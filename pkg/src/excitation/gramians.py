from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch
from ..numerics.linalg import symmetric_extremes
from ..numerics.spectral import as_sequence

EXCITATION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ExcitationReport:
    lambda_min: float
    lambda_max: float
    start: int
    span: int
    verdict: bool

    @property
    def rho1(self) -> float:
        return self.lambda_min

    @property
    def rho2(self) -> float:
        return self.lambda_max

    @property
    def window(self) -> tuple[int, int]:
        return self.start, self.span


def finite_excitation_check(phis, start: int = 0, tolerance: float = EXCITATION_TOLERANCE) -> ExcitationReport:
    """Eigen-extremes of Σ φ_k φ_kᵀ over the given window of regressors."""
    values = as_sequence(phis).astype(float)
    gram = values.T @ values
    lambda_min, lambda_max = symmetric_extremes(gram)
    lambda_min = max(lambda_min, 0.0)
    return ExcitationReport(lambda_min, lambda_max, start, values.shape[0] - 1, lambda_min > tolerance)


def gramian(A, k: int) -> np.ndarray:
    """Γ_k(A) = Σ_{i=0}^{k} A^i (A^i)ᵀ."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    return controllability_gramian(A, np.eye(A.shape[0]), k)


def controllability_gramian(A, B, k: int) -> np.ndarray:
    """Γ_k(A, B) = Σ_{i=0}^{k} A^i B Bᵀ (A^i)ᵀ."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    B = B.reshape(-1, 1) if B.ndim == 1 else np.atleast_2d(B)
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")

    total = np.zeros((A.shape[0], A.shape[0]))
    power_b = B.copy()
    for _ in range(k + 1):
        total += power_b @ power_b.T
        power_b = A @ power_b
    return total
