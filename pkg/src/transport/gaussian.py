"""Closed-form L² transport distance between Gaussian laws (an upper bound for W1)."""

import numpy as np
from scipy.linalg import sqrtm

from utils.error_handling import DimensionMismatchError, SolverInputError

_PSD_TOL = 1e-10


def _check_covariance(cov: np.ndarray, name: str) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1]:
        raise SolverInputError(f"{name} must be square, got {cov.shape}")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if not np.allclose(cov, cov.T, atol=_PSD_TOL * scale):
        raise SolverInputError(f"{name} is not symmetric")
    if np.min(np.linalg.eigvalsh(cov)) < -_PSD_TOL * scale:
        raise SolverInputError(f"{name} is not positive semidefinite")
    return 0.5 * (cov + cov.T)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    root = sqrtm(mat)
    return np.real(root)


def w_gaussian(mean1, cov1, mean2, cov2) -> float:
    """
    √(|m₁ - m₂|² + Tr(C₁ + C₂ - 2(C₂^{1/2} C₁ C₂^{1/2})^{1/2})).
    """
    m1 = np.atleast_1d(np.asarray(mean1, dtype=float))
    m2 = np.atleast_1d(np.asarray(mean2, dtype=float))
    c1 = _check_covariance(cov1, "cov1")
    c2 = _check_covariance(cov2, "cov2")
    d = m1.size
    for got, what in ((m2.size, "mean2"), (c1.shape[0], "cov1"), (c2.shape[0], "cov2")):
        if got != d:
            raise DimensionMismatchError(d, got, what)
    root2 = _psd_sqrt(c2)
    cross = _psd_sqrt(root2 @ c1 @ root2)
    bures = float(np.trace(c1 + c2 - 2.0 * cross))
    diff = m1 - m2
    return float(np.sqrt(max(float(diff @ diff) + bures, 0.0)))
