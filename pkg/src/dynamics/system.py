from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from ..numerics.linalg import as_matrix, spectral_radius


@dataclass(frozen=True)
class LinearSystem:
    """The modeled plant x_{k+1} = A x_k + B u_k + η_k with η_k ~ N(0, σ² I)."""

    A: np.ndarray
    B: np.ndarray
    sigma: float = 0.0
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        A = as_matrix(self.A)
        B = np.asarray(self.B, dtype=float)
        B = as_matrix(B.reshape(-1, 1) if B.ndim == 1 else B)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "n", A.shape[0])
        object.__setattr__(self, "m", B.shape[1])

    @property
    def d(self) -> int:
        return self.n + self.m

    @property
    def spectral_radius(self) -> float:
        return spectral_radius(self.A)

    def with_sigma(self, sigma: float) -> "LinearSystem":
        return LinearSystem(self.A, self.B, sigma)

    def closed_loop(self, K) -> np.ndarray:
        return self.A + self.B @ np.atleast_2d(K)

    def __repr__(self):
        return f"LinearSystem(n={self.n}, m={self.m}, sigma={self.sigma}, rho={self.spectral_radius:.4f})"


def companion_system(coeffs: Sequence[float], sigma: float = 0.0) -> LinearSystem:
    """Control canonical form: ones on the superdiagonal, ``coeffs`` as the bottom row, B = e_n."""
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    n = coeffs.size
    if n < 1:
        raise ValueError("companion_system needs at least one coefficient")

    A = np.eye(n, k=1)
    A[-1, :] = coeffs
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    return LinearSystem(A, B, sigma)
