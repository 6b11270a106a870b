"""Pearson cross-correlations with periodic coordinates embedded on the circle."""

import math

import numpy as np


def torus_embedding(x: np.ndarray) -> np.ndarray:
    """(sin 2πx_i, cos 2πx_i) for each coordinate: shape (n, 2d)."""
    x = np.atleast_2d(x)
    angle = 2.0 * math.pi * x
    return np.concatenate([np.sin(angle), np.cos(angle)], axis=1)


def cross_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Correlation matrix between columns of a (n, p) and b (n, q), shape (p, q)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] != b.shape[0]:
        raise ValueError("cross_correlation needs the same number of rows")
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    sa = np.sqrt(np.sum(ac * ac, axis=0))
    sb = np.sqrt(np.sum(bc * bc, axis=0))
    denom = np.outer(sa, sb)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = (ac.T @ bc) / denom
    # constant columns carry no dependence
    return np.where(denom > 0, corr, 0.0)
