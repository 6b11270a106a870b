"""Wasserstein-1 estimation between empirical measures."""

from .checks import estimate_w1, marginal_inequality_check, self_distance
from .exact import w1_exact
from .gaussian import w_gaussian
from .measures import EmpiricalMeasure, OTMethod, OTResult, Space
from .sinkhorn import w1_sinkhorn
from .sorted1d import w1_sorted_1d, w1_to_density_1d

__all__ = [
    "EmpiricalMeasure",
    "OTMethod",
    "OTResult",
    "Space",
    "estimate_w1",
    "marginal_inequality_check",
    "self_distance",
    "w1_exact",
    "w_gaussian",
    "w1_sinkhorn",
    "w1_sorted_1d",
    "w1_to_density_1d",
]
