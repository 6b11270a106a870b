"""Exact W1 between equal-size empirical measures as an optimal assignment."""

from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from config.config import get_config
from transport.measures import EmpiricalMeasure, OTMethod, OTResult, check_compatible
from utils.error_handling import SolverInputError
from utils.logger import get_logger

logger = get_logger(__name__)


def w1_exact(
    mu: EmpiricalMeasure, nu: EmpiricalMeasure, max_n: Optional[int] = None
) -> OTResult:
    """
    Minimum mean ground cost over couplings of two n-point uniform measures.

    For equal weights the optimal coupling is a permutation, so this is the
    linear assignment problem; the returned permutation certifies the value.
    """
    check_compatible(mu, nu)
    limit = max_n if max_n is not None else get_config().solver.exact_max_n
    if mu.n > limit:
        raise SolverInputError(
            f"n={mu.n} exceeds the exact solver limit {limit}; use sorted1d or sinkhorn"
        )
    cost = mu.cost_matrix(nu)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(mu.n, dtype=np.intp)
    perm[rows] = cols
    matched = cost[rows, cols]
    value = float(matched.mean())
    logger.debug(f"assignment W1 on {mu.space.value} space: n={mu.n}, value={value:.6g}")
    return OTResult(
        value=value, method=OTMethod.ASSIGNMENT, permutation=perm, pair_costs=matched
    )


def assignment_cost(cost: np.ndarray, permutation: np.ndarray) -> float:
    """Mean cost of matching row i with column permutation[i]."""
    n = cost.shape[0]
    return float(cost[np.arange(n), np.asarray(permutation)].mean())
