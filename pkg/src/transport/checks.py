"""
Solver Selection and Consistency Checks
Method dispatch for W1 estimates, the marginal inequality
W(position marginals) ≤ W(joints), and the same-law bias floor.
"""

from typing import Optional, Tuple, Union

from config.config import get_config
from transport.exact import w1_exact
from transport.measures import EmpiricalMeasure, OTMethod, OTResult, Space, check_compatible
from transport.sinkhorn import w1_sinkhorn
from transport.sorted1d import w1_sorted_1d
from utils.error_handling import MarginalInequalityError, SolverInputError
from utils.logger import get_logger

logger = get_logger(__name__)

# slack for floating-point summation order between the two optima
_INEQUALITY_SLACK = 1e-12


def resolve_method(mu: EmpiricalMeasure, method: Union[OTMethod, str] = OTMethod.AUTO) -> OTMethod:
    method = OTMethod(method)
    if method != OTMethod.AUTO:
        if method == OTMethod.SORTED1D and (mu.space == Space.PHASE or mu.d != 1):
            raise SolverInputError("sorted1d needs a 1-dimensional position or velocity measure")
        return method
    if mu.space != Space.PHASE and mu.d == 1:
        return OTMethod.SORTED1D
    if mu.n <= get_config().solver.exact_max_n:
        return OTMethod.ASSIGNMENT
    return OTMethod.SINKHORN


def estimate_w1(
    mu: EmpiricalMeasure,
    nu: EmpiricalMeasure,
    method: Union[OTMethod, str] = OTMethod.AUTO,
    epsilon: Optional[float] = None,
) -> OTResult:
    check_compatible(mu, nu)
    chosen = resolve_method(mu, method)
    if chosen == OTMethod.SORTED1D:
        return w1_sorted_1d(mu, nu)
    if chosen == OTMethod.SINKHORN:
        return w1_sinkhorn(mu, nu, epsilon=epsilon, relative=True) if epsilon else w1_sinkhorn(mu, nu)
    return w1_exact(mu, nu)


def marginal_inequality_check(
    joint_mu: EmpiricalMeasure, joint_nu: EmpiricalMeasure
) -> Tuple[float, float]:
    """(W1 of position marginals, W1 of joints), both from the exact solver."""
    if joint_mu.space != Space.PHASE or joint_nu.space != Space.PHASE:
        raise SolverInputError("marginal inequality needs phase-space measures")
    w_joint = w1_exact(joint_mu, joint_nu).value
    w_marginal = w1_exact(joint_mu.position_marginal(), joint_nu.position_marginal()).value
    if w_marginal > w_joint + _INEQUALITY_SLACK:
        raise MarginalInequalityError(
            f"position-marginal W1 {w_marginal:.12g} exceeds joint W1 {w_joint:.12g}"
        )
    return w_marginal, w_joint


def self_distance(
    first: EmpiricalMeasure,
    second: EmpiricalMeasure,
    method: Union[OTMethod, str] = OTMethod.AUTO,
) -> float:
    """
    Bias floor: W1 between two independent samples of one law.

    Any distance estimate at the same n is only resolved above this value.
    """
    floor = estimate_w1(first, second, method).value
    logger.debug(f"bias floor on {first.space.value} space at n={first.n}: {floor:.4g}")
    return floor
