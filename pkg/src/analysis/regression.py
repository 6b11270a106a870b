"""
Log-Log Regression
Ordinary least squares of log(value) on log(γ), with a bootstrap
confidence interval for the slope when replicate estimates are available.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.bootstrap import resampling_generator, percentile_interval
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class LogLogFit:
    slope: float
    intercept: float
    residuals: np.ndarray
    slope_ci: Optional[Tuple[float, float]] = None
    excluded: List[float] = field(default_factory=list)

    def predict(self, gamma: np.ndarray) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(gamma, dtype=float) ** self.slope


def fit_loglog(rows: Sequence[Tuple[float, float]]) -> LogLogFit:
    """
    Fit log(value) = intercept + slope·log(γ).

    Needs at least three rows with positive γ and value.
    """
    if len(rows) < 3:
        raise ValueError(f"Need at least 3 points for a log-log fit, got {len(rows)}")
    g = np.array([r[0] for r in rows], dtype=float)
    v = np.array([r[1] for r in rows], dtype=float)
    if np.any(g <= 0) or np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("log-log fit requires positive finite values")
    lg, lv = np.log(g), np.log(v)
    design = np.column_stack([np.ones_like(lg), lg])
    coef, *_ = np.linalg.lstsq(design, lv, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    residuals = lv - (intercept + slope * lg)
    return LogLogFit(slope=slope, intercept=intercept, residuals=residuals)


def bootstrap_slope_ci(
    replicates: Dict[float, np.ndarray],
    n_resamples: int = 200,
    level: float = 0.95,
    seed: int = 0,
) -> Tuple[float, float]:
    """
    Percentile CI of the slope: resample replicate estimates within each γ,
    refit on the resampled means.
    """
    gammas = sorted(replicates)
    rng = resampling_generator(seed, (0x510E,))
    slopes = []
    for _ in range(n_resamples):
        rows = []
        for g in gammas:
            reps = np.asarray(replicates[g], dtype=float)
            pick = reps[rng.integers(0, len(reps), size=len(reps))]
            rows.append((g, float(pick.mean())))
        try:
            slopes.append(fit_loglog(rows).slope)
        except ValueError:
            continue
    if not slopes:
        return (float("nan"), float("nan"))
    return percentile_interval(np.array(slopes), level)
