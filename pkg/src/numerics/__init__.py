from .linalg import complex_solve, sigma_min, spectral_radius, operator_norm, is_schur_stable
from .spectral import dft, dft_all, lag_autocorrelation
from .rng import RngSpec, gaussian_stream, gaussian_draws

__all__ = [
    "complex_solve",
    "sigma_min",
    "spectral_radius",
    "operator_norm",
    "is_schur_stable",
    "dft",
    "dft_all",
    "lag_autocorrelation",
    "RngSpec",
    "gaussian_stream",
    "gaussian_draws",
]
