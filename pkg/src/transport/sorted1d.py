"""
One-Dimensional Transport
Sorted matching on the line, best cyclic shift of the sorted matching on
the circle T^1, and circle W1 against a tabulated density.
"""

from typing import Optional

import numpy as np

from core.model import TabulatedDensity
from transport.measures import EmpiricalMeasure, OTMethod, OTResult, Space, check_compatible
from utils.error_handling import SolverInputError

# offsets evaluated per vectorized block
_SHIFT_BLOCK = 256


def _circle_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = np.abs(a - b)
    return np.minimum(diff, 1.0 - diff)


def _scalar_samples(values) -> np.ndarray:
    if isinstance(values, EmpiricalMeasure):
        return values.scalar()
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise SolverInputError(f"sorted 1D transport needs scalar samples, got shape {arr.shape}")
    return arr


def w1_line(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.sort(_scalar_samples(a)), np.sort(_scalar_samples(b))
    if a.size != b.size:
        raise SolverInputError(f"Sample counts differ ({a.size} vs {b.size})")
    return float(np.mean(np.abs(a - b)))


def w1_circle(a: np.ndarray, b: np.ndarray):
    """
    Circle W1 of two equal-size samples in [0, 1).

    Scans all n cyclic offsets of the sorted matching; returns (value, offset)
    where sorted a[i] is matched with sorted b[(i + offset) % n].
    """
    a = np.sort(np.mod(_scalar_samples(a), 1.0))
    b = np.sort(np.mod(_scalar_samples(b), 1.0))
    n = a.size
    if b.size != n:
        raise SolverInputError(f"Sample counts differ ({n} vs {b.size})")
    best, best_k = np.inf, 0
    base = np.arange(n)
    for start in range(0, n, _SHIFT_BLOCK):
        shifts = np.arange(start, min(start + _SHIFT_BLOCK, n))
        idx = (base[None, :] + shifts[:, None]) % n
        costs = _circle_gap(a[None, :], b[idx]).mean(axis=1)
        k = int(np.argmin(costs))
        if costs[k] < best:
            best, best_k = float(costs[k]), int(shifts[k])
    return best, best_k


def w1_sorted_1d(mu, nu, periodic: Optional[bool] = None) -> OTResult:
    """
    Exact W1 for scalar samples.

    EmpiricalMeasure inputs choose the geometry from their tag: position
    measures live on T^1, velocity measures on R. Raw arrays default to R
    unless periodic=True.
    """
    if isinstance(mu, EmpiricalMeasure) and isinstance(nu, EmpiricalMeasure):
        check_compatible(mu, nu)
        if periodic is None:
            periodic = mu.space == Space.POSITION
    a, b = _scalar_samples(mu), _scalar_samples(nu)
    if periodic:
        value, offset = w1_circle(a, b)
        a_s, b_s = np.sort(np.mod(a, 1.0)), np.sort(np.mod(b, 1.0))
        pairs = _circle_gap(a_s, np.roll(b_s, -offset))
        return OTResult(
            value=value, method=OTMethod.SORTED1D, pair_costs=pairs, extra={"offset": offset}
        )
    pairs = np.abs(np.sort(a) - np.sort(b))
    return OTResult(value=w1_line(a, b), method=OTMethod.SORTED1D, pair_costs=pairs)


def w1_to_density_1d(sample, density: TabulatedDensity) -> float:
    """
    Circle W1 between an empirical sample and a tabulated density on T^1.

    Uses W1 = min_α ∫ |F_n - G - α| with α the median of F_n - G, both
    CDFs evaluated at the grid nodes.
    """
    x = np.sort(np.mod(_scalar_samples(sample), 1.0))
    nodes = np.asarray(density.grid, dtype=float)
    emp = np.searchsorted(x, nodes, side="right") / x.size
    ref = np.concatenate([[0.0], density.cdf()[:-1]]) / max(density.mass(), 1e-300)
    diff = emp - ref
    return float(np.mean(np.abs(diff - np.median(diff))))
