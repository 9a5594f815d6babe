import numpy as np
import scipy.linalg

from ..errors import DimensionMismatch, NonConvergence, SingularMatrix

PIVOT_TOLERANCE = 1e-14


def as_matrix(values, dtype=float) -> np.ndarray:
    matrix = np.atleast_2d(np.array(values, dtype=dtype))
    if matrix.ndim != 2:
        raise DimensionMismatch(f"Expected a matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite")
    return matrix


def operator_norm(M) -> float:
    matrix = np.atleast_2d(np.asarray(M))
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, ord=2))


def complex_solve(M, rhs) -> np.ndarray:
    """Solve ``M X = rhs`` for square complex ``M`` using partial-pivot LU.

    A pivot smaller than ``1e-14 * ||M||`` is reported as ``SingularMatrix``
    rather than returning an inflated solution.
    """
    matrix = np.atleast_2d(np.asarray(M, dtype=complex))
    rhs_arr = np.asarray(rhs, dtype=complex)
    vector_rhs = rhs_arr.ndim == 1
    rhs_mat = rhs_arr.reshape(-1, 1) if vector_rhs else rhs_arr

    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"complex_solve needs a square matrix, got {matrix.shape}")
    if rhs_mat.shape[0] != matrix.shape[0]:
        raise DimensionMismatch(f"rhs has {rhs_mat.shape[0]} rows, matrix has {matrix.shape[0]}")

    scale = operator_norm(matrix)
    if scale == 0.0:
        raise SingularMatrix("Matrix is identically zero")

    lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_TOLERANCE * scale:
        raise SingularMatrix(f"Pivot {pivots.min():.3e} below {PIVOT_TOLERANCE:.0e}*||M|| = {scale:.3e}")

    solution = scipy.linalg.lu_solve((lu, piv), rhs_mat)
    return solution.ravel() if vector_rhs else solution


def singular_values(M) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(M))
    if matrix.size == 0:
        raise DimensionMismatch("Matrix must be nonempty")
    return np.linalg.svd(matrix, compute_uv=False)


def sigma_min(M) -> float:
    # smallest of the min(rows, cols) singular values; rank-deficient input gives ~0
    return float(singular_values(M).min())


def eigenvalues(A) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(A, dtype=float))
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch(f"Eigenvalues need a square matrix, got {matrix.shape}")
    try:
        return np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as e:
        raise NonConvergence(f"Eigenvalue iteration did not converge: {e}") from e


def spectral_radius(A) -> float:
    values = eigenvalues(A)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values)))


def is_schur_stable(A) -> bool:
    return spectral_radius(A) < 1.0


def symmetric_extremes(S) -> tuple[float, float]:
    values = np.linalg.eigvalsh(np.atleast_2d(np.asarray(S, dtype=float)))
    return float(values[0]), float(values[-1])
