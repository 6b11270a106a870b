"""
Torus Geometry
Points on the unit torus T^d = R^d / Z^d, velocities in R^d, and the
product metric r((x, y), (z, w)) = dist(x, z) + |y - w| used by every
Wasserstein estimate.

All containers accept a leading batch shape: coords has shape (..., d).
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from utils.error_handling import DimensionMismatchError

__all__ = [
    "TorusPoint",
    "Velocity",
    "PhaseState",
    "wrap",
    "torus_dist",
    "phase_dist",
    "torus_cost_matrix",
    "euclidean_cost_matrix",
    "phase_cost_matrix",
]


def _as_coords(values: ArrayLike) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def wrap(values: ArrayLike) -> np.ndarray:
    """Reduce raw coordinates mod 1 into [0, 1)."""
    arr = _as_coords(values)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap() received non-finite coordinates")
    out = np.mod(arr, 1.0)
    # np.mod(-tiny, 1.0) rounds to exactly 1.0
    out[out >= 1.0] = 0.0
    return out


@dataclass(frozen=True)
class TorusPoint:
    """Position on the unit torus, stored as its canonical representative."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", wrap(self.coords))

    @property
    def d(self) -> int:
        return self.coords.shape[-1]

    def __len__(self) -> int:
        return 1 if self.coords.ndim == 1 else self.coords.shape[0]


@dataclass(frozen=True)
class Velocity:
    """Velocity in R^d."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _as_coords(self.coords)
        if not np.all(np.isfinite(arr)):
            raise ValueError("Velocity has non-finite entries")
        object.__setattr__(self, "coords", arr)

    @property
    def d(self) -> int:
        return self.coords.shape[-1]


@dataclass(frozen=True)
class PhaseState:
    """Position-velocity pair on T^d x R^d."""

    position: TorusPoint
    velocity: Velocity

    def __post_init__(self):
        if self.position.d != self.velocity.d:
            raise DimensionMismatchError(self.position.d, self.velocity.d, "velocity")

    @classmethod
    def from_arrays(cls, x: ArrayLike, y: ArrayLike) -> "PhaseState":
        return cls(TorusPoint(np.asarray(x, dtype=float)), Velocity(np.asarray(y, dtype=float)))

    @property
    def d(self) -> int:
        return self.position.d

    @property
    def x(self) -> np.ndarray:
        return self.position.coords

    @property
    def y(self) -> np.ndarray:
        return self.velocity.coords


def _coords_of(obj) -> np.ndarray:
    if isinstance(obj, (TorusPoint, Velocity)):
        return obj.coords
    return _as_coords(obj)


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(a.shape[-1], b.shape[-1])


def _minimal_image(diff: np.ndarray) -> np.ndarray:
    return diff - np.round(diff)


def torus_dist(a, b) -> np.ndarray:
    """
    Euclidean length of the componentwise minimal-image difference.

    Accepts TorusPoint or raw arrays (raw values need not be wrapped).
    Returns a float for single points, an array for batches.
    """
    ca, cb = _coords_of(a), _coords_of(b)
    _check_dims(ca, cb)
    dist = np.linalg.norm(_minimal_image(ca - cb), axis=-1)
    return float(dist) if np.ndim(dist) == 0 else dist


def phase_dist(p, q) -> np.ndarray:
    """torus_dist of positions plus Euclidean norm of the velocity difference."""
    if isinstance(p, PhaseState) and isinstance(q, PhaseState):
        xa, ya, xb, yb = p.x, p.y, q.x, q.y
    else:
        (xa, ya), (xb, yb) = p, q
        xa, ya, xb, yb = map(_as_coords, (xa, ya, xb, yb))
    _check_dims(xa, xb)
    _check_dims(ya, yb)
    dist = np.linalg.norm(_minimal_image(xa - xb), axis=-1) + np.linalg.norm(ya - yb, axis=-1)
    return float(dist) if np.ndim(dist) == 0 else dist


def torus_cost_matrix(xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Pairwise torus distances between rows of xs (n, d) and zs (m, d)."""
    xs, zs = np.atleast_2d(xs), np.atleast_2d(zs)
    _check_dims(xs, zs)
    sq = np.zeros((xs.shape[0], zs.shape[0]))
    for k in range(xs.shape[1]):
        diff = _minimal_image(xs[:, k, None] - zs[None, :, k])
        sq += diff * diff
    return np.sqrt(sq)


def euclidean_cost_matrix(ys: np.ndarray, ws: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances between rows of ys (n, d) and ws (m, d)."""
    ys, ws = np.atleast_2d(ys), np.atleast_2d(ws)
    _check_dims(ys, ws)
    sq = np.zeros((ys.shape[0], ws.shape[0]))
    for k in range(ys.shape[1]):
        diff = ys[:, k, None] - ws[None, :, k]
        sq += diff * diff
    return np.sqrt(sq)


def phase_cost_matrix(
    xs: np.ndarray, ys: np.ndarray, zs: np.ndarray, ws: np.ndarray
) -> np.ndarray:
    """Pairwise product-metric distances between phase clouds (xs, ys) and (zs, ws)."""
    return torus_cost_matrix(xs, zs) + euclidean_cost_matrix(ys, ws)
