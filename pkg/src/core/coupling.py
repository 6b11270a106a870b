"""
Anticipative Coupling of the Kinetic and Overdamped Processes

On one Brownian path B, run the Langevin process to physical time γt,
accumulate the OU functional

    A_s = √(2γ) Σ e^{-γ² s} ∫_0^{γs} e^{γr} dB_r,

and integrate on the macroscopic clock s ∈ [0, t]

    dW_s = F(W_s) ds + √2 dZ_s,   Z_s = Σ B^γ_s - h_t(s) A_t,

with B^γ_s = B_{γs}/√γ, next to the plain overdamped reference X̄
driven by B^γ. Pass 1 stores the bin sums of B; pass 2 needs A_t, which
depends on the whole path, so W cannot be integrated online.

The √(2γ) prefactor (rather than √2) makes both the pathwise decomposition
of Y_{γs} and the covariance Σ²(1 - e^{-2γ²t}) hold.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from analysis.bootstrap import DEFAULT_RESAMPLES, bootstrap_se, mean_and_se
from analysis.correlation import cross_correlation, torus_embedding
from core.geometry import torus_dist
from core.model import DiffusionMatrix, ForceKind, ModelSpec
from core.sde import (
    IntegratorConfig,
    LangevinIntegrator,
    NoisePath,
    initial_state,
    simulate_trajectory,
)
from utils.error_handling import MisalignedBinsError, NotApplicableError
from utils.logger import get_logger

logger = get_logger(__name__)

COUPLING_TAG = 0xC0DE


class CouplingConfig(BaseModel):
    """Macroscopic horizon t, damping γ, macroscopic step δ and replica count R."""

    t: float = Field(default=1.0, gt=0)
    gamma: float = Field(gt=0)
    delta: float = Field(default=1e-2, gt=0)
    replicas: int = Field(default=2000, ge=2)
    h0: float = Field(default=1e-3, gt=0)
    step_factor: float = Field(default=0.5, gt=0)
    batch: int = Field(default=512, ge=1)

    @model_validator(mode="after")
    def _check_alignment(self) -> "CouplingConfig":
        ratio = self.t / self.delta
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
            raise MisalignedBinsError(f"delta={self.delta} does not divide t={self.t}")
        return self

    @property
    def n_bins(self) -> int:
        return int(round(self.t / self.delta))

    @property
    def steps_per_bin(self) -> int:
        """Microsteps per bin: γδ/h rounded up so that h ≤ min(h0, c/γ)."""
        h_rule = IntegratorConfig.step_for_gamma(self.gamma, self.h0, self.step_factor)
        return max(1, int(math.ceil(self.gamma * self.delta / h_rule - 1e-9)))

    @property
    def h(self) -> float:
        """Microscopic step, chosen so that γδ is an exact multiple of it."""
        return self.gamma * self.delta / self.steps_per_bin

    @property
    def n_micro(self) -> int:
        return self.n_bins * self.steps_per_bin


class OUAccumulator:
    """
    Discrete A: A ← e^{-γh}A + √(1 - e^{-2γh}) Σ ΔB/√h, i.e. the velocity
    OU substep of the splitting with zero force and zero start.
    """

    def __init__(
        self,
        gamma: float,
        h: float,
        sigma: DiffusionMatrix,
        shape: Tuple[int, int],
        record_every: Optional[int] = None,
    ):
        self.decay = math.exp(-gamma * h)
        self.scale = math.sqrt(-math.expm1(-2.0 * gamma * h) / h)
        self.sigma_t = sigma.sigma.T
        self.value = np.zeros(shape)
        self.steps = 0
        self.record_every = record_every
        self.path: List[np.ndarray] = [self.value.copy()] if record_every else []

    def update(self, dB: np.ndarray) -> None:
        self.value = self.decay * self.value + self.scale * (dB @ self.sigma_t)
        self.steps += 1
        if self.record_every and self.steps % self.record_every == 0:
            self.path.append(self.value.copy())


def accumulate_A(
    increments: Iterable[np.ndarray],
    gamma: float,
    h: float,
    sigma: DiffusionMatrix,
    expected_steps: Optional[int] = None,
) -> np.ndarray:
    """A at physical time (number of increments)·h from the given increments."""
    acc: Optional[OUAccumulator] = None
    for dB in increments:
        dB = np.atleast_2d(dB)
        if acc is None:
            acc = OUAccumulator(gamma, h, sigma, dB.shape)
        acc.update(dB)
    if acc is None:
        return np.zeros(sigma.d)
    if expected_steps is not None and acc.steps != expected_steps:
        raise MisalignedBinsError(
            f"Got {acc.steps} increments, expected {expected_steps} aligned with the integrator"
        )
    return acc.value


def h_weight(s, t: float, gamma: float):
    """
    h_t(s) = (2/γ)(e^{-γ²(t-s)} - e^{-γ²t}) / (1 - e^{-2γ²t}), written as
    (2/γ) e^{-γ²(t-s)} (1 - e^{-γ²s}) / (1 - e^{-2γ²t}) with expm1 so that it
    neither cancels nor overflows for large γ²t.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < -1e-12 * t) or np.any(s_arr > t * (1 + 1e-12)):
        raise ValueError(f"s must lie in [0, {t}]")
    s_arr = np.clip(s_arr, 0.0, t)
    g2 = gamma * gamma
    out = (
        (2.0 / gamma)
        * np.exp(-g2 * (t - s_arr))
        * (-np.expm1(-g2 * s_arr))
        / (-np.expm1(-2.0 * g2 * t))
    )
    return float(out) if out.ndim == 0 else out


def _integrate_macro(
    m: ModelSpec,
    cc: CouplingConfig,
    bin_sums: np.ndarray,
    x0: np.ndarray,
    A_t: Optional[np.ndarray],
) -> np.ndarray:
    if bin_sums.shape[0] != cc.n_bins:
        raise MisalignedBinsError(
            f"Expected {cc.n_bins} macroscopic bins, got {bin_sums.shape[0]}"
        )
    delta = cc.delta
    sqrt2 = math.sqrt(2.0)
    inv_sqrt_gamma = 1.0 / math.sqrt(cc.gamma)
    sigma_t = m.sigma.sigma.T
    grid = np.arange(cc.n_bins + 1) * delta
    grid[-1] = cc.t
    dh = np.diff(h_weight(grid, cc.t, cc.gamma)) if A_t is not None else None

    w = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    path = np.empty((cc.n_bins + 1,) + w.shape)
    path[0] = w
    for j in range(cc.n_bins):
        dZ = (bin_sums[j] * inv_sqrt_gamma) @ sigma_t
        if A_t is not None:
            dZ = dZ - dh[j] * A_t
        w = w + delta * m.force(w) + sqrt2 * dZ
        w = w - np.floor(w)
        w[w >= 1.0] = 0.0
        path[j + 1] = w
    return path


def integrate_W(
    m: ModelSpec,
    cc: CouplingConfig,
    bin_sums: np.ndarray,
    A_t: np.ndarray,
    x0: np.ndarray,
) -> np.ndarray:
    """
    Euler-Maruyama path of W on the macroscopic grid, shape (n_bins + 1, batch, d).

    ΔZ = Σ ΔB^γ - Δh·A_t, with ΔB^γ = (bin sum of microscopic ΔB)/√γ and Δh
    taken exactly from h_weight at the bin endpoints.
    """
    return _integrate_macro(m, cc, bin_sums, x0, np.atleast_2d(A_t))


def integrate_reference(
    m: ModelSpec, cc: CouplingConfig, bin_sums: np.ndarray, x0: np.ndarray
) -> np.ndarray:
    """Overdamped X̄ driven by B^γ on the same bins, without the A-correction."""
    return _integrate_macro(m, cc, bin_sums, x0, None)


@dataclass(frozen=True)
class CouplingRecord:
    """Joint terminal data of one replica."""

    x: np.ndarray
    y: np.ndarray
    A: np.ndarray
    W: np.ndarray
    x_bar: np.ndarray
    e1: float
    e2: float
    e3: float


@dataclass
class CouplingSummary:
    gamma: float
    t: float
    replicas: int
    e1_mean: float
    e1_se: float
    e2_mean: float
    e2_se: float
    e3_mean: float
    e3_se: float
    e2_bound: float
    cov_A: np.ndarray
    cov_A_se: np.ndarray
    cov_A_target: np.ndarray
    corr_WA: np.ndarray
    gaussian_tail: float

    @property
    def max_abs_corr(self) -> float:
        return float(np.max(np.abs(self.corr_WA)))

    @property
    def corr_threshold(self) -> float:
        return 3.0 / math.sqrt(self.replicas)

    def as_row(self) -> Dict[str, float]:
        return {
            "gamma": self.gamma,
            "t": self.t,
            "R": self.replicas,
            "e1_mean": self.e1_mean,
            "e1_se": self.e1_se,
            "e2_mean": self.e2_mean,
            "e2_se": self.e2_se,
            "e3_mean": self.e3_mean,
            "e3_se": self.e3_se,
            "e2_bound": self.e2_bound,
            "cov_A_trace": float(np.trace(self.cov_A)),
            "cov_A_target_trace": float(np.trace(self.cov_A_target)),
            "max_abs_corr_WA": self.max_abs_corr,
            "gaussian_tail": self.gaussian_tail,
        }


@dataclass
class CouplingEnsemble:
    """Terminal coupling data for all replicas, rows in replica order."""

    model: ModelSpec
    config: CouplingConfig
    x: np.ndarray
    y: np.ndarray
    y0: np.ndarray
    A: np.ndarray
    W: np.ndarray
    x_bar: np.ndarray

    @property
    def e1(self) -> np.ndarray:
        return torus_dist(self.x, self.W)

    @property
    def e2(self) -> np.ndarray:
        return np.linalg.norm(self.y - self.A, axis=-1)

    @property
    def e3(self) -> np.ndarray:
        return torus_dist(self.x_bar, self.W)

    def __len__(self) -> int:
        return self.x.shape[0]

    def records(self) -> List[CouplingRecord]:
        e1, e2, e3 = self.e1, self.e2, self.e3
        return [
            CouplingRecord(
                self.x[i], self.y[i], self.A[i], self.W[i], self.x_bar[i],
                float(e1[i]), float(e2[i]), float(e3[i]),
            )
            for i in range(len(self))
        ]

    def summary(self, n_resamples: int = DEFAULT_RESAMPLES, seed: int = 0) -> CouplingSummary:
        m, cc = self.model, self.config
        R = len(self)
        e1_mean, e1_se = mean_and_se(self.e1, n_resamples, seed, (1,))
        e2_mean, e2_se = mean_and_se(self.e2, n_resamples, seed, (2,))
        e3_mean, e3_se = mean_and_se(self.e3, n_resamples, seed, (3,))

        cov_A = np.atleast_2d(np.cov(self.A, rowvar=False))
        d = m.d
        cov_se = np.zeros((d, d))
        for i in range(d):
            for j in range(i, d):
                pair = np.column_stack([self.A[:, i], self.A[:, j]])
                cov_se[i, j] = cov_se[j, i] = bootstrap_se(
                    pair,
                    lambda rows: float(np.cov(rows, rowvar=False)[0, 1]),
                    n_resamples,
                    seed,
                    (4, i, j),
                )

        return CouplingSummary(
            gamma=m.gamma,
            t=cc.t,
            replicas=R,
            e1_mean=e1_mean,
            e1_se=e1_se,
            e2_mean=e2_mean,
            e2_se=e2_se,
            e3_mean=e3_mean,
            e3_se=e3_se,
            e2_bound=e2_bound(m, cc.t, float(np.mean(np.linalg.norm(self.y0, axis=-1)))),
            cov_A=cov_A,
            cov_A_se=cov_se,
            cov_A_target=A_covariance(m.sigma, m.gamma, cc.t),
            corr_WA=cross_correlation(torus_embedding(self.W), self.A),
            gaussian_tail=gaussian_tail_bound(m.sigma, m.gamma, cc.t),
        )


def A_covariance(sigma: DiffusionMatrix, gamma: float, t: float) -> np.ndarray:
    """Σ²(1 - e^{-2γ²t})."""
    return sigma.sigma_sq * (-math.expm1(-2.0 * gamma * gamma * t))


def e2_bound(m: ModelSpec, t: float, mean_abs_y0: float) -> float:
    """E|Y₀| e^{-γ²t} + ‖F‖_∞/γ."""
    return mean_abs_y0 * math.exp(-m.gamma * m.gamma * t) + m.force.sup_norm / m.gamma


def gaussian_tail_bound(sigma: DiffusionMatrix, gamma: float, t: float) -> float:
    """√Tr(Σ²)·(1 - √(1 - e^{-2γ²t})), the L² distance from L(A_t) to N(0, Σ²)."""
    return math.sqrt(sigma.trace_sq) * (1.0 - math.sqrt(-math.expm1(-2.0 * gamma * gamma * t)))


def _run_batch(
    m: ModelSpec, cc: CouplingConfig, seed: int, stream: Tuple[int, ...], size: int
) -> Dict[str, np.ndarray]:
    h = cc.h
    init = initial_state(m, size, seed, *stream)
    noise = NoisePath(seed, stream, h, cc.n_micro, size, m.d)
    acc = OUAccumulator(m.gamma, h, m.sigma, (size, m.d))
    cfg = IntegratorConfig(h=h, horizon=cc.n_micro * h, burn_in=0.0, thin=cc.n_micro)

    # pass 1: Langevin to physical time γt, storing bin sums and A_t
    traj = simulate_trajectory(
        m, cfg, init, noise, bin_steps=cc.steps_per_bin, on_increment=acc.update
    )
    # pass 2: W and the reference on the macroscopic clock
    w_path = integrate_W(m, cc, traj.bin_sums, acc.value, init.x)
    ref_path = integrate_reference(m, cc, traj.bin_sums, init.x)
    return {
        "x": traj.final_x,
        "y": traj.final_y,
        "y0": np.atleast_2d(init.y),
        "A": acc.value,
        "W": w_path[-1],
        "x_bar": ref_path[-1],
    }


def run_coupling(
    m: ModelSpec,
    cc: CouplingConfig,
    seed: int,
    stream: Sequence[int] = (),
    threads: int = 1,
) -> CouplingEnsemble:
    """
    Simulate cc.replicas coupled replicas in batches of cc.batch.

    Batch b uses noise stream (COUPLING_TAG, *stream, b); results are
    concatenated in batch order, so the ensemble does not depend on threads.
    """
    if abs(m.gamma - cc.gamma) > 1e-12 * cc.gamma:
        raise ValueError(f"Model gamma {m.gamma} differs from coupling gamma {cc.gamma}")
    sizes = []
    remaining = cc.replicas
    while remaining > 0:
        sizes.append(min(cc.batch, remaining))
        remaining -= sizes[-1]
    streams = [(COUPLING_TAG, *stream, b) for b in range(len(sizes))]

    logger.info(
        f"Coupling gamma={cc.gamma}: R={cc.replicas}, h={cc.h:.3g}, "
        f"{cc.n_bins} bins x {cc.steps_per_bin} microsteps"
    )
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(
                executor.map(lambda args: _run_batch(m, cc, seed, *args), zip(streams, sizes))
            )
    else:
        parts = [_run_batch(m, cc, seed, s, n) for s, n in zip(streams, sizes)]

    merged = {key: np.concatenate([p[key] for p in parts], axis=0) for key in parts[0]}
    return CouplingEnsemble(model=m, config=cc, **merged)


# ============================================================================
# Pathwise decomposition of Y for constant forces
# ============================================================================


def constant_force_term(eta: np.ndarray, gamma: float, h: float, k: int) -> np.ndarray:
    """
    Force contribution to Y after k splitting steps with F ≡ η:
    η (h/2)(1 + q)(1 - q^k)/(1 - q), q = e^{-γh}. Tends to (η/γ)(1 - e^{-γkh}) as h → 0.
    """
    q = math.exp(-gamma * h)
    return np.asarray(eta, dtype=float) * (
        0.5 * h * (1.0 + q) * (-math.expm1(-gamma * h * k)) / (-math.expm1(-gamma * h))
    )


def pathwise_identity_residual(
    m: ModelSpec, h: float, n_steps: int, paths: int, seed: int
) -> float:
    """
    max over paths and steps of |Y_k - e^{-γkh}Y₀ - force term - A_k| for a
    constant force, with A accumulated on the integrator's own increments.
    """
    if m.force.kind != ForceKind.CONSTANT:
        raise NotApplicableError("pathwise identity needs a constant force")
    init = initial_state(m, paths, seed, 0x1D)
    noise = NoisePath(seed, (0x1D,), h, n_steps, paths, m.d)
    integrator = LangevinIntegrator(m, h)
    acc = OUAccumulator(m.gamma, h, m.sigma, (paths, m.d))
    x, y = np.atleast_2d(init.x).copy(), np.atleast_2d(init.y).copy()
    y0 = y.copy()
    worst = 0.0
    for k, dB in enumerate(noise, start=1):
        acc.update(dB)
        x, y = integrator.step(x, y, dB)
        predicted = (
            math.exp(-m.gamma * h * k) * y0
            + constant_force_term(m.force.eta, m.gamma, h, k)
            + acc.value
        )
        worst = max(worst, float(np.max(np.abs(y - predicted))))
    return worst
