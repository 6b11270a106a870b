"""
Empirical Measures and Transport Results
Equal-weight point clouds on phase space, the torus or velocity space,
and the value/certificate record every solver returns.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from core.geometry import (
    euclidean_cost_matrix,
    phase_cost_matrix,
    torus_cost_matrix,
    wrap,
)
from utils.error_handling import DimensionMismatchError, SolverInputError


class Space(str, Enum):
    PHASE = "phase"
    POSITION = "position"
    VELOCITY = "velocity"


class OTMethod(str, Enum):
    AUTO = "auto"
    ASSIGNMENT = "assignment"
    SORTED1D = "sorted1d"
    SINKHORN = "sinkhorn"


def _as_cloud(values: Optional[np.ndarray], name: str) -> Optional[np.ndarray]:
    if values is None:
        return None
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise SolverInputError(f"{name} must have shape (n, d), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SolverInputError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class EmpiricalMeasure:
    """
    Uniform measure (1/n) Σ δ_{p_i}.

    Phase measures carry both x and y; position measures only x (wrapped
    into [0,1)^d); velocity measures only y.
    """

    space: Space
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        x = _as_cloud(self.x, "positions")
        y = _as_cloud(self.y, "velocities")
        needs_x = self.space in (Space.PHASE, Space.POSITION)
        needs_y = self.space in (Space.PHASE, Space.VELOCITY)
        if needs_x != (x is not None) or needs_y != (y is not None):
            raise SolverInputError(f"Inconsistent arrays for a {self.space.value} measure")
        if x is not None and y is not None:
            if x.shape[0] != y.shape[0]:
                raise SolverInputError("positions and velocities differ in sample count")
            if x.shape[1] != y.shape[1]:
                raise DimensionMismatchError(x.shape[1], y.shape[1], "velocity block")
        if x is not None:
            x = wrap(x)
        n = (x if x is not None else y).shape[0]
        if n < 1:
            raise SolverInputError("An empirical measure needs at least one point")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def phase(cls, x: np.ndarray, y: np.ndarray) -> "EmpiricalMeasure":
        return cls(Space.PHASE, x=x, y=y)

    @classmethod
    def positions(cls, x: np.ndarray) -> "EmpiricalMeasure":
        return cls(Space.POSITION, x=x)

    @classmethod
    def velocities(cls, y: np.ndarray) -> "EmpiricalMeasure":
        return cls(Space.VELOCITY, y=y)

    @property
    def n(self) -> int:
        return (self.x if self.x is not None else self.y).shape[0]

    @property
    def d(self) -> int:
        return (self.x if self.x is not None else self.y).shape[1]

    def __len__(self) -> int:
        return self.n

    def position_marginal(self) -> "EmpiricalMeasure":
        if self.x is None:
            raise SolverInputError("velocity measure has no position marginal")
        return EmpiricalMeasure.positions(self.x)

    def velocity_marginal(self) -> "EmpiricalMeasure":
        if self.y is None:
            raise SolverInputError("position measure has no velocity marginal")
        return EmpiricalMeasure.velocities(self.y)

    def scalar(self) -> np.ndarray:
        """Samples of a one-dimensional position or velocity measure as a flat array."""
        if self.space == Space.PHASE or self.d != 1:
            raise SolverInputError("scalar samples need a 1-dimensional position or velocity measure")
        return (self.x if self.x is not None else self.y)[:, 0]

    def take(self, idx: np.ndarray) -> "EmpiricalMeasure":
        """Sub-measure on the given point indices (also used to permute)."""
        idx = np.asarray(idx)
        return EmpiricalMeasure(
            self.space,
            x=None if self.x is None else self.x[idx],
            y=None if self.y is None else self.y[idx],
        )

    def subsample(self, n: int, rng: np.random.Generator) -> "EmpiricalMeasure":
        """n points drawn without replacement."""
        if n > self.n:
            raise SolverInputError(f"Cannot subsample {n} points from {self.n}")
        return self.take(np.sort(rng.choice(self.n, size=n, replace=False)))

    def cost_matrix(self, other: "EmpiricalMeasure") -> np.ndarray:
        """Ground-cost matrix under the metric of the shared space tag."""
        check_compatible(self, other, equal_n=False)
        if self.space == Space.PHASE:
            return phase_cost_matrix(self.x, self.y, other.x, other.y)
        if self.space == Space.POSITION:
            return torus_cost_matrix(self.x, other.x)
        return euclidean_cost_matrix(self.y, other.y)


def check_compatible(
    mu: EmpiricalMeasure, nu: EmpiricalMeasure, equal_n: bool = True
) -> None:
    if mu.space != nu.space:
        raise SolverInputError(
            f"Cannot transport a {mu.space.value} measure onto a {nu.space.value} measure"
        )
    if mu.d != nu.d:
        raise DimensionMismatchError(mu.d, nu.d, "measure")
    if equal_n and mu.n != nu.n:
        raise SolverInputError(
            f"Sample counts differ ({mu.n} vs {nu.n}); subsample to a common size first"
        )


@dataclass
class OTResult:
    """
    Estimated transport cost.

    `permutation` certifies assignment values: point i of the first measure
    is matched with point permutation[i] of the second. Sinkhorn results
    carry the regularization, iteration count and primal-dual gap instead.
    """

    value: float
    method: OTMethod
    permutation: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    iterations: Optional[int] = None
    dual_gap: Optional[float] = None
    pair_costs: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)
