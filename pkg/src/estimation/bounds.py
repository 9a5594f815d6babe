import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..dynamics.simulate import Trajectory
from ..dynamics.system import LinearSystem
from ..errors import DimensionMismatch, NonPositiveDefinite
from ..excitation.gramians import controllability_gramian, gramian
from ..excitation.spectral_lines import InformationMatrix
from ..numerics.linalg import operator_norm
from ..numerics.spectral import as_sequence, dft_all


@dataclass(frozen=True)
class BoundReport:
    ideal_term: float
    unmodeled_term: float
    T: int
    sigma_min: float

    @property
    def total(self) -> float:
        return self.ideal_term + self.unmodeled_term


def _logdet_positive(matrix: np.ndarray, name: str) -> float:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    try:
        chol = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as e:
        raise NonPositiveDefinite(f"{name} is not positive definite") from e
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def martingale_bound(gram_plus_V, V, sigma: float, delta: float, d: int) -> float:
    """σ √(8d log(5 det(Ȳ)^{1/(2d)} det(V)^{-1/(2d)} / δ^{1/d})) for Ȳ = Σφφᵀ + V."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    logdet_y = _logdet_positive(gram_plus_V, "Y_T + V")
    logdet_v = _logdet_positive(V, "V")

    log_argument = math.log(5.0) + (logdet_y - logdet_v) / (2.0 * d) - math.log(delta) / d
    return sigma * math.sqrt(8.0 * d * log_argument)


def self_normalized_statistic(phis, noises, V) -> float:
    """‖Ȳ_T^{-1/2} S_T‖ with S_T = Σ φ_k η_kᵀ and Ȳ_T = Σ φ_k φ_kᵀ + V."""
    phis = np.asarray(phis, dtype=float)
    phis = phis.reshape(-1, 1) if phis.ndim == 1 else phis
    noises = np.asarray(noises, dtype=float)
    noises = noises.reshape(-1, 1) if noises.ndim == 1 else noises

    y_bar = phis.T @ phis + np.atleast_2d(V)
    s_t = phis.T @ noises
    try:
        chol = np.linalg.cholesky(y_bar)
    except np.linalg.LinAlgError as e:
        raise NonPositiveDefinite("Y_T + V is not positive definite") from e
    # ‖L^{-1} S‖ equals ‖Ȳ^{-1/2} S‖ since both are square roots of Sᵀ Ȳ^{-1} S
    whitened = np.linalg.solve(chol, s_t)
    return operator_norm(whitened)


def deterministic_gram_upper_bound(system: LinearSystem, T: int, u_M: float, delta: float) -> float:
    """(σ²T tr Γ_{T-1}(A) + T u_M² tr Γ_{T-1}(A, B) + T u_M²) / δ."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    k = max(T - 1, 0)
    state_noise = system.sigma**2 * T * float(np.trace(gramian(system.A, k)))
    input_drive = T * u_M**2 * float(np.trace(controllability_gramian(system.A, system.B, k)))
    return (state_noise + input_drive + T * u_M**2) / delta


def theorem_bound(info: InformationMatrix, traj: Trajectory, T: Optional[int] = None) -> BoundReport:
    """Estimation-error bound with unit constants: ideal √(1/(Tσ²)) plus the unmodeled DFT cross terms.

    φ̄ is the normalized regressor DFT (1/T)·φ(e^{j2πk/T}); w enters unnormalized.
    """
    T = traj.length if T is None else T
    window = traj.window(0, T)
    sigma_min = info.sigma_min

    if sigma_min == 0.0:
        return BoundReport(math.inf, math.inf, T, 0.0)

    ideal = math.sqrt(1.0 / (T * sigma_min**2))

    w_spectrum = dft_all(window.unmodeled)
    if not np.any(w_spectrum):
        return BoundReport(ideal, 0.0, T, sigma_min)

    phi_bar = dft_all(window.regressors()) / T
    cross = sum(
        operator_norm(np.outer(phi_bar[k], w_spectrum[k])) + np.linalg.norm(w_spectrum[k]) / math.sqrt(T)
        for k in range(T)
    )
    return BoundReport(ideal, float(cross) / (T * sigma_min**2), T, sigma_min)


def cross_term_tau(traj: Trajectory) -> float:
    """‖Σ_k ((1/T) u(e^{j2πk/T})) ((1/T) w(e^{j2πk/T}))ᴴ‖, the input/unmodeled cross power."""
    return input_cross_power(traj.inputs, traj.unmodeled)


def input_cross_power(inputs, unmodeled) -> float:
    """τ from raw input and unmodeled records of equal length, no state needed."""
    u = as_sequence(inputs)
    w = as_sequence(unmodeled)
    if u.shape[0] != w.shape[0]:
        raise DimensionMismatch(f"{u.shape[0]} inputs but {w.shape[0]} unmodeled samples")
    T = u.shape[0]
    u_spectrum = dft_all(u) / T
    w_spectrum = dft_all(w) / T
    return operator_norm(u_spectrum.T @ w_spectrum.conj())
