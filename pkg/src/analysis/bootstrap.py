"""
Bootstrap Standard Errors
Resampling with replacement from a fixed Philox stream so that every
reported SE is reproducible from the run seed.
"""

from typing import Callable, Optional, Tuple

import numpy as np

DEFAULT_RESAMPLES = 200

# Stream tag separating bootstrap draws from simulation noise
BOOTSTRAP_TAG = 0xB007


def resampling_generator(seed: int, stream: Tuple[int, ...]) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed), BOOTSTRAP_TAG, *stream]).generate_state(
        2, dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def bootstrap_distribution(
    values: np.ndarray,
    statistic: Callable[[np.ndarray], float] = np.mean,
    n_resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
    stream: Tuple[int, ...] = (),
) -> np.ndarray:
    """Statistic evaluated on n_resamples row-resamples of values."""
    values = np.asarray(values)
    n = values.shape[0]
    if n < 2:
        return np.full(n_resamples, statistic(values) if n else np.nan)
    rng = resampling_generator(seed, stream)
    idx = rng.integers(0, n, size=(n_resamples, n))
    return np.array([statistic(values[row]) for row in idx])


def bootstrap_se(
    values: np.ndarray,
    statistic: Callable[[np.ndarray], float] = np.mean,
    n_resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
    stream: Tuple[int, ...] = (),
) -> float:
    """Bootstrap standard error of statistic(values)."""
    dist = bootstrap_distribution(values, statistic, n_resamples, seed, stream)
    return float(np.std(dist, ddof=1)) if len(dist) > 1 else float("nan")


def mean_and_se(
    values: np.ndarray,
    n_resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
    stream: Tuple[int, ...] = (),
) -> Tuple[float, float]:
    values = np.asarray(values, dtype=float)
    return float(values.mean()), bootstrap_se(values, np.mean, n_resamples, seed, stream)


def percentile_interval(
    dist: np.ndarray, level: float = 0.95
) -> Tuple[float, float]:
    """Equal-tailed percentile interval of a bootstrap distribution."""
    alpha = 0.5 * (1.0 - level)
    low, high = np.quantile(np.asarray(dist), [alpha, 1.0 - alpha])
    return float(low), float(high)


def combined_se(*ses: Optional[float]) -> float:
    """sqrt of the sum of squared standard errors, ignoring missing ones."""
    return float(np.sqrt(sum(s * s for s in ses if s is not None and np.isfinite(s))))
