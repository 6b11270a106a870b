"""
Stationary Sampling
Empirical versions of the kinetic invariant law μ_γ and of the overdamped
tensor target μ_O ⊗ N(0, Σ²), with moment and position/velocity
independence diagnostics.

Two provenances are supported. "many-replicas-terminal" runs independent
replicas from x ~ U(T^d), y ~ N(0, Σ²) through the burn-in and keeps the
final states. "single-long-trajectory-thinned" runs a few long chains,
discards the burn-in and keeps every stride-th state.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from analysis.bootstrap import DEFAULT_RESAMPLES, mean_and_se
from analysis.correlation import cross_correlation, torus_embedding
from core.model import ModelSpec
from core.sde import (
    INIT_TAG,
    VELOCITY_TAG,
    IntegratorConfig,
    NoisePath,
    Scheme,
    initial_state,
    philox_generator,
    simulate_overdamped,
    simulate_trajectory,
)
from transport.measures import EmpiricalMeasure, Space
from utils.logger import get_logger

logger = get_logger(__name__)

KINETIC_TAG = 0x5A01
OVERDAMPED_TAG = 0x5A02

# velocity autocorrelation targeted between retained states
STRIDE_AUTOCORRELATION = 0.2

# relaxation time of the overdamped position process assumed by the burn-in rule
OVERDAMPED_RELAXATION = 2.0


class Provenance(str, Enum):
    TRAJECTORY = "single-long-trajectory-thinned"
    REPLICAS = "many-replicas-terminal"


class SamplingConfig(BaseModel):
    """How stationary samples are produced."""

    provenance: Provenance = Provenance.REPLICAS
    scheme: Scheme = Scheme.OU_SPLITTING
    h0: float = Field(default=1e-3, gt=0)
    step_factor: float = Field(default=0.5, gt=0)
    burn_time: Optional[float] = Field(default=None, gt=0)
    chains: int = Field(default=8, ge=1)
    overdamped_h: float = Field(default=2e-4, gt=0)
    overdamped_burn_time: float = Field(default=10.0, gt=0)
    overdamped_stride_time: float = Field(default=0.5, gt=0)
    batch: int = Field(default=512, ge=1)

    def kinetic_step(self, gamma: float) -> float:
        return IntegratorConfig.step_for_gamma(gamma, self.h0, self.step_factor)

    def kinetic_burn_time(self, gamma: float) -> float:
        """Physical time max(10, 10/γ, γ·τ_O) unless fixed explicitly."""
        if self.burn_time is not None:
            return self.burn_time
        return max(10.0, 10.0 / gamma, gamma * OVERDAMPED_RELAXATION)

    def kinetic_stride(self, gamma: float) -> int:
        """Steps between retained states so that e^{-γ·stride·h} ≤ 0.2."""
        h = self.kinetic_step(gamma)
        return max(1, math.ceil(math.log(1.0 / STRIDE_AUTOCORRELATION) / (gamma * h)))


@dataclass
class StationarySample:
    measure: EmpiricalMeasure
    provenance: Provenance
    ess: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.measure.n

    @property
    def x(self) -> Optional[np.ndarray]:
        return self.measure.x

    @property
    def y(self) -> Optional[np.ndarray]:
        return self.measure.y


def _batch_sizes(n: int, batch: int) -> List[int]:
    sizes = []
    while n > 0:
        sizes.append(min(batch, n))
        n -= sizes[-1]
    return sizes


def _map_batches(fn: Callable, jobs: Sequence, threads: int) -> list:
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(fn, jobs))
    return [fn(job) for job in jobs]


def _lag1_autocorrelation(series: np.ndarray) -> float:
    """Pooled lag-1 autocorrelation of records shaped (n_records, chains, d)."""
    if series.shape[0] < 3:
        return float("nan")
    centred = series - series.mean(axis=0)
    num = np.sum(centred[1:] * centred[:-1])
    den = np.sum(centred * centred)
    return float(num / den) if den > 0 else 0.0


def _effective_size(n: int, rho: float) -> float:
    if not np.isfinite(rho):
        return float(n)
    rho = min(max(rho, 0.0), 0.999)
    return n * (1.0 - rho) / (1.0 + rho)


def _interleave(records: np.ndarray, n: int) -> np.ndarray:
    """(n_records, chains, d) -> first n rows of the chain-major flattening."""
    return np.swapaxes(records, 0, 1).reshape(-1, records.shape[-1])[:n]


def _kinetic_replicas(m: ModelSpec, n: int, cfg: SamplingConfig, seed: int, stream, threads):
    h = cfg.kinetic_step(m.gamma)
    n_steps = max(1, int(round(cfg.kinetic_burn_time(m.gamma) / h)))
    icfg = IntegratorConfig(scheme=cfg.scheme, h=h, horizon=n_steps * h, thin=n_steps)

    def run(job):
        b, size = job
        tag = (KINETIC_TAG, *stream, b)
        init = initial_state(m, size, seed, *tag)
        traj = simulate_trajectory(m, icfg, init, NoisePath(seed, tag, h, n_steps, size, m.d))
        return traj.final_x, traj.final_y

    parts = _map_batches(run, list(enumerate(_batch_sizes(n, cfg.batch))), threads)
    x = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    return x, y, {"h": h, "burn_time": n_steps * h}


def _kinetic_trajectory(m: ModelSpec, n: int, cfg: SamplingConfig, seed: int, stream):
    h = cfg.kinetic_step(m.gamma)
    chains = min(cfg.chains, n)
    per_chain = math.ceil(n / chains)
    stride = cfg.kinetic_stride(m.gamma)
    burn_steps = int(round(cfg.kinetic_burn_time(m.gamma) / h))
    total = burn_steps + per_chain * stride
    icfg = IntegratorConfig(
        scheme=cfg.scheme, h=h, horizon=total * h, burn_in=burn_steps / total, thin=stride
    )
    tag = (KINETIC_TAG, *stream, 0x7A)
    init = initial_state(m, chains, seed, *tag)
    traj = simulate_trajectory(m, icfg, init, NoisePath(seed, tag, h, total, chains, m.d))
    rho = _lag1_autocorrelation(traj.velocities)
    x = _interleave(traj.positions, n)
    y = _interleave(traj.velocities, n)
    return x, y, {"h": h, "burn_time": burn_steps * h, "stride": stride, "lag1_velocity": rho}


def sample_mu_gamma(
    m: ModelSpec,
    n: int,
    cfg: Optional[SamplingConfig] = None,
    seed: int = 0,
    stream: Sequence[int] = (),
    threads: int = 1,
) -> StationarySample:
    """Phase-space sample of the kinetic invariant law; deterministic given (m, n, cfg, seed, stream)."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    cfg = cfg or SamplingConfig()
    logger.info(f"Sampling mu_gamma: gamma={m.gamma}, n={n}, provenance={cfg.provenance.value}")
    if cfg.provenance == Provenance.REPLICAS:
        x, y, diag = _kinetic_replicas(m, n, cfg, seed, tuple(stream), threads)
        ess = float(n)
    else:
        x, y, diag = _kinetic_trajectory(m, n, cfg, seed, tuple(stream))
        ess = _effective_size(n, diag["lag1_velocity"])
    return StationarySample(EmpiricalMeasure.phase(x, y), cfg.provenance, ess, diag)


def sample_mu_O(
    m: ModelSpec,
    n: int,
    cfg: Optional[SamplingConfig] = None,
    seed: int = 0,
    stream: Sequence[int] = (),
    threads: int = 1,
) -> StationarySample:
    """Position sample of the overdamped invariant law."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    cfg = cfg or SamplingConfig()
    stream = tuple(stream)
    h = cfg.overdamped_h
    burn_steps = max(1, int(round(cfg.overdamped_burn_time / h)))

    if cfg.provenance == Provenance.REPLICAS:
        icfg = IntegratorConfig(h=h, horizon=burn_steps * h, thin=burn_steps)

        def run(job):
            b, size = job
            tag = (OVERDAMPED_TAG, *stream, b)
            init = philox_generator(seed, *tag, INIT_TAG).random((size, m.d))
            return simulate_overdamped(
                m, icfg, init, NoisePath(seed, tag, h, burn_steps, size, m.d)
            ).final_x

        x = np.concatenate(
            _map_batches(run, list(enumerate(_batch_sizes(n, cfg.batch))), threads)
        )
        ess, diag = float(n), {"h": h, "burn_time": burn_steps * h}
    else:
        chains = min(cfg.chains, n)
        per_chain = math.ceil(n / chains)
        stride = max(1, int(round(cfg.overdamped_stride_time / h)))
        total = burn_steps + per_chain * stride
        icfg = IntegratorConfig(h=h, horizon=total * h, burn_in=burn_steps / total, thin=stride)
        tag = (OVERDAMPED_TAG, *stream, 0x7A)
        init = philox_generator(seed, *tag, INIT_TAG).random((chains, m.d))
        traj = simulate_overdamped(m, icfg, init, NoisePath(seed, tag, h, total, chains, m.d))
        rho = _lag1_autocorrelation(np.cos(2.0 * math.pi * traj.positions))
        x = _interleave(traj.positions, n)
        ess = _effective_size(n, rho)
        diag = {"h": h, "burn_time": burn_steps * h, "stride": stride, "lag1_position": rho}
    return StationarySample(EmpiricalMeasure.positions(x), cfg.provenance, ess, diag)


def gaussian_velocities(m: ModelSpec, n: int, seed: int, stream: Sequence[int] = ()) -> np.ndarray:
    """n independent draws of N(0, Σ²) on their own sub-seed."""
    rng = philox_generator(seed, VELOCITY_TAG, *stream)
    return rng.standard_normal((n, m.d)) @ m.sigma.sigma.T


def sample_mu_O_tensor_gauss(
    m: ModelSpec,
    n: int,
    cfg: Optional[SamplingConfig] = None,
    seed: int = 0,
    stream: Sequence[int] = (),
    threads: int = 1,
) -> StationarySample:
    """Positions from the overdamped process, velocities drawn independently from N(0, Σ²)."""
    positions = sample_mu_O(m, n, cfg, seed, stream, threads)
    y = gaussian_velocities(m, n, seed, stream)
    return StationarySample(
        EmpiricalMeasure.phase(positions.x, y),
        positions.provenance,
        positions.ess,
        dict(positions.diagnostics),
    )


# ============================================================================
# Diagnostics
# ============================================================================


class Verdict(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"
    INCONCLUSIVE = "inconclusive"


@dataclass
class IndependenceReport:
    """Correlations between (sin 2πx_i, cos 2πx_i) and y_j, shape (2d, d)."""

    statistics: np.ndarray
    threshold: float
    n: int

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.statistics)))

    @property
    def within_threshold(self) -> bool:
        return self.max_abs <= self.threshold

    @property
    def verdict(self) -> Verdict:
        return Verdict.INDEPENDENT if self.within_threshold else Verdict.DEPENDENT

    def dependence_verdict(self) -> Verdict:
        """For models expected to couple x and y: DEPENDENT if detected, else INCONCLUSIVE."""
        if self.within_threshold:
            logger.warning(
                f"Position/velocity dependence not detected at n={self.n} "
                f"(max |corr| {self.max_abs:.4f} <= {self.threshold:.4f}); inconclusive"
            )
            return Verdict.INCONCLUSIVE
        return Verdict.DEPENDENT


def independence_diagnostic(sample: Union[StationarySample, EmpiricalMeasure]) -> IndependenceReport:
    measure = sample.measure if isinstance(sample, StationarySample) else sample
    if measure.space != Space.PHASE:
        raise ValueError("independence diagnostic needs a phase-space sample")
    stats = cross_correlation(torus_embedding(measure.x), measure.y)
    return IndependenceReport(stats, 3.0 / math.sqrt(measure.n), measure.n)


@dataclass
class MomentReport:
    estimate: float
    se: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.estimate <= self.bound + 3.0 * self.se


def second_moment_bound(m: ModelSpec) -> float:
    """2 Tr(Σ²) + ‖F‖∞² / γ²."""
    return 2.0 * m.sigma.trace_sq + (m.force.sup_norm / m.gamma) ** 2


def moment_check(
    sample: StationarySample,
    m: ModelSpec,
    n_resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> MomentReport:
    """Estimate of E|Y|² with bootstrap SE against 2Tr(Σ²) + ‖F‖∞²/γ²."""
    sq = np.sum(sample.y * sample.y, axis=1)
    est, se = mean_and_se(sq, n_resamples, seed, (0x3E,))
    return MomentReport(est, se, second_moment_bound(m))


def velocity_moments(
    sample: StationarySample, n_resamples: int = DEFAULT_RESAMPLES, seed: int = 0
) -> Dict[str, np.ndarray]:
    """Componentwise velocity mean and covariance with bootstrap SEs."""
    y = sample.y
    d = y.shape[1]
    mean = np.empty(d)
    mean_se = np.empty(d)
    for i in range(d):
        mean[i], mean_se[i] = mean_and_se(y[:, i], n_resamples, seed, (0x31, i))
    cov = np.atleast_2d(np.cov(y, rowvar=False))
    cov_se = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            centred = (y[:, i] - mean[i]) * (y[:, j] - mean[j])
            _, cov_se[i, j] = mean_and_se(centred, n_resamples, seed, (0x32, i, j))
            cov_se[j, i] = cov_se[i, j]
    return {"mean": mean, "mean_se": mean_se, "cov": cov, "cov_se": cov_se}


# ============================================================================
# Persistence
# ============================================================================


def _column_labels(d: int, space: Space) -> List[str]:
    labels = []
    if space in (Space.PHASE, Space.POSITION):
        labels += [f"x{i}" for i in range(d)]
    if space in (Space.PHASE, Space.VELOCITY):
        labels += [f"y{i}" for i in range(d)]
    return labels


def _as_matrix(measure: EmpiricalMeasure) -> np.ndarray:
    blocks = [b for b in (measure.x, measure.y) if b is not None]
    return np.concatenate(blocks, axis=1)


def save_sample(sample: Union[StationarySample, EmpiricalMeasure], path: Union[str, Path]) -> Path:
    """
    Write a sample as .npy (rows = replicas, columns x0..x{d-1}, y0..y{d-1})
    or as long-format CSV with columns replica, coordinate, value.
    """
    measure = sample.measure if isinstance(sample, StationarySample) else sample
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = _as_matrix(measure)
    if path.suffix == ".npy":
        np.save(path, matrix)
        return path
    labels = _column_labels(measure.d, measure.space)
    frame = pd.DataFrame(matrix, columns=labels)
    frame.insert(0, "replica", np.arange(measure.n))
    long = frame.melt(id_vars="replica", var_name="coordinate", value_name="value")
    long["coordinate"] = pd.Categorical(long["coordinate"], categories=labels, ordered=True)
    long = long.sort_values(["replica", "coordinate"], kind="stable")
    long.to_csv(path, index=False, float_format="%.17g")
    return path


def load_sample(path: Union[str, Path], space: Union[Space, str] = Space.PHASE) -> EmpiricalMeasure:
    path = Path(path)
    space = Space(space)
    if path.suffix == ".npy":
        matrix = np.load(path)
    else:
        long = pd.read_csv(path, float_precision="round_trip")
        wide = long.pivot(index="replica", columns="coordinate", values="value")
        ordered = sorted(wide.columns, key=lambda c: (c[0], int(c[1:])))
        matrix = wide[ordered].to_numpy()
    if space == Space.PHASE:
        d = matrix.shape[1] // 2
        return EmpiricalMeasure.phase(matrix[:, :d], matrix[:, d:])
    if space == Space.POSITION:
        return EmpiricalMeasure.positions(matrix)
    return EmpiricalMeasure.velocities(matrix)
