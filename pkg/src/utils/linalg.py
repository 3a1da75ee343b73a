"""
Small dense linear-algebra helpers built on symmetric factorizations.
"""
from typing import Optional

import numpy as np
import scipy.linalg


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """Return (M + M^T) / 2."""
    return 0.5 * (matrix + matrix.T)


def relative_asymmetry(matrix: np.ndarray) -> float:
    """Largest |M - M^T| entry relative to the largest |M| entry."""
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.T))) / scale


def spd_cholesky(matrix: np.ndarray, rel_tol: float = 1e-10,
                 scale: Optional[float] = None) -> Optional[np.ndarray]:
    """
    Lower Cholesky factor of a symmetric matrix, or None if it is not
    positive definite.

    A pivot counts as positive only when it exceeds ``rel_tol * scale``;
    ``scale`` defaults to trace(M)/n.
    """
    n = matrix.shape[0]
    if scale is None:
        scale = float(np.trace(matrix)) / n
    if not np.all(np.isfinite(matrix)) or scale <= 0.0:
        return None
    try:
        factor = scipy.linalg.cholesky(matrix, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError:
        return None
    pivots = np.diag(factor) ** 2
    if np.min(pivots) <= rel_tol * scale:
        return None
    return factor


def is_positive_semidefinite(matrix: np.ndarray, rel_tol: float = 1e-12) -> bool:
    eigenvalues = np.linalg.eigvalsh(matrix)
    bound = rel_tol * max(float(np.max(np.abs(eigenvalues))), 1.0)
    return bool(np.min(eigenvalues) >= -bound)


def inverse_from_cholesky(factor: np.ndarray) -> np.ndarray:
    """Symmetric inverse of L L^T given its lower factor L."""
    identity = np.eye(factor.shape[0])
    return symmetrize(scipy.linalg.cho_solve((factor, True), identity, check_finite=False))


def logdet_from_cholesky(factor: np.ndarray) -> float:
    return float(2.0 * np.sum(np.log(np.diag(factor))))


def spd_inverse(matrix: np.ndarray, rel_tol: float = 1e-10) -> Optional[np.ndarray]:
    """Inverse of a positive definite matrix, None when the factorization fails."""
    factor = spd_cholesky(matrix, rel_tol)
    if factor is None:
        return None
    return inverse_from_cholesky(factor)


def max_congruence_eigenvalue(weight: np.ndarray, covariance_factor: np.ndarray) -> float:
    """
    Largest eigenvalue of S^T W S where S is a Cholesky factor of a covariance.

    This equals lambda_max(W Sigma) and is finite for singular W, which lets
    conditions of the form W^-1 - Sigma/tau > 0 be tested as
    lambda_max < tau without inverting W.
    """
    congruence = symmetrize(covariance_factor.T @ weight @ covariance_factor)
    return float(np.max(np.linalg.eigvalsh(congruence)))
