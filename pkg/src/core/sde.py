"""
SDE Integrators
Kinetic Langevin (OU-exact splitting or Euler-Maruyama) and overdamped
Euler-Maruyama steps, driven by reproducible counter-based Brownian
increments.

Noise layout: a NoisePath is keyed by (seed, stream) where the stream
identifies a replica batch. Increments are produced in chunks of
CHUNK_STEPS steps; chunk c comes from a Philox generator whose counter
starts at c, so any step can be regenerated without replaying the ones
before it.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from core.geometry import PhaseState, TorusPoint
from core.model import ModelSpec
from utils.error_handling import NoiseExhaustedError, NonFiniteStateError
from utils.logger import get_logger

logger = get_logger(__name__)

CHUNK_STEPS = 256

# Stream tags keep initial conditions and velocity draws off the increment streams
INIT_TAG = 0x1A17
VELOCITY_TAG = 0x7E10


def philox_key(seed: int, *stream: int) -> np.ndarray:
    """128-bit Philox key derived from the seed and stream coordinates."""
    return np.random.SeedSequence([int(seed), *map(int, stream)]).generate_state(
        2, dtype=np.uint64
    )


def philox_generator(seed: int, *stream: int, counter: int = 0) -> np.random.Generator:
    """Generator positioned at block `counter` of the (seed, stream) Philox sequence."""
    bit_gen = np.random.Philox(
        key=philox_key(seed, *stream),
        counter=np.array([0, 0, 0, counter], dtype=np.uint64),
    )
    return np.random.Generator(bit_gen)


class NoisePath:
    """
    Brownian increments ΔB_k ~ N(0, h·I) for a batch of replicas.

    Each increment has shape (batch, d). Reading past n_steps raises
    NoiseExhaustedError.
    """

    def __init__(
        self,
        seed: int,
        stream: Sequence[int],
        h: float,
        n_steps: int,
        batch: int,
        d: int,
    ):
        if h <= 0:
            raise ValueError(f"Step must be positive, got {h}")
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        self.h = float(h)
        self.n_steps = int(n_steps)
        self.batch = int(batch)
        self.d = int(d)
        self._sqrt_h = math.sqrt(self.h)
        self._cached_chunk: Optional[int] = None
        self._cached: Optional[np.ndarray] = None

    def chunk(self, c: int) -> np.ndarray:
        """Increments of steps [c*CHUNK_STEPS, (c+1)*CHUNK_STEPS)."""
        if self._cached_chunk == c:
            return self._cached
        rng = philox_generator(self.seed, *self.stream, counter=c)
        block = rng.standard_normal((CHUNK_STEPS, self.batch, self.d)) * self._sqrt_h
        self._cached_chunk, self._cached = c, block
        return block

    def increment(self, k: int) -> np.ndarray:
        if not 0 <= k < self.n_steps:
            raise NoiseExhaustedError(f"Step {k} outside noise path of {self.n_steps} steps")
        c, r = divmod(k, CHUNK_STEPS)
        return self.chunk(c)[r]

    def __iter__(self) -> Iterator[np.ndarray]:
        for c in range((self.n_steps + CHUNK_STEPS - 1) // CHUNK_STEPS):
            block = self.chunk(c)
            stop = min(CHUNK_STEPS, self.n_steps - c * CHUNK_STEPS)
            for r in range(stop):
                yield block[r]

    def bin_sums(self, steps_per_bin: int) -> np.ndarray:
        """Partial sums over consecutive bins of steps_per_bin increments."""
        acc = BinAccumulator(steps_per_bin, self.n_steps // steps_per_bin, self.batch, self.d)
        for dB in self:
            if acc.complete:
                break
            acc.add(dB)
        return acc.sums


class BinAccumulator:
    """Running sums of increments over macroscopic bins, in step order."""

    def __init__(self, steps_per_bin: int, n_bins: int, batch: int, d: int):
        if steps_per_bin < 1:
            raise ValueError("steps_per_bin must be >= 1")
        self.steps_per_bin = steps_per_bin
        self.n_bins = n_bins
        self.sums = np.zeros((n_bins, batch, d))
        self._step = 0

    def add(self, dB: np.ndarray) -> None:
        b = self._step // self.steps_per_bin
        if b < self.n_bins:
            self.sums[b] += dB
        self._step += 1

    @property
    def complete(self) -> bool:
        return self._step >= self.n_bins * self.steps_per_bin


class Scheme(str, Enum):
    OU_SPLITTING = "ou_splitting"
    EULER_MARUYAMA = "euler_maruyama"


class IntegratorConfig(BaseModel):
    """Step size, horizon, burn-in fraction and thinning stride."""

    scheme: Scheme = Scheme.OU_SPLITTING
    h: float = Field(gt=0)
    horizon: float = Field(gt=0)
    burn_in: float = Field(default=0.0, ge=0.0, lt=1.0)
    thin: int = Field(default=1, ge=1)

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.h))

    @property
    def kept_steps(self) -> int:
        return int(math.floor((1.0 - self.burn_in) * self.n_steps + 1e-9))

    @property
    def burn_steps(self) -> int:
        return self.n_steps - self.kept_steps

    @property
    def n_records(self) -> int:
        return self.kept_steps // self.thin

    @classmethod
    def step_for_gamma(cls, gamma: float, h0: float = 1e-3, c: float = 0.5) -> float:
        """h = min(h0, c/γ)."""
        return min(h0, c / gamma)

    @classmethod
    def for_gamma(
        cls,
        gamma: float,
        horizon: float,
        h0: float = 1e-3,
        c: float = 0.5,
        **kwargs,
    ) -> "IntegratorConfig":
        return cls(h=cls.step_for_gamma(gamma, h0, c), horizon=horizon, **kwargs)


def _check_finite(step: int, *arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.isfinite(arr).all():
            raise NonFiniteStateError(step)


def _wrap(x: np.ndarray) -> np.ndarray:
    out = x - np.floor(x)
    out[out >= 1.0] = 0.0
    return out


class LangevinIntegrator:
    """
    One-step map of dX = Y dt, dY = F(X)dt - γY dt + √(2γ)Σ dB.

    OU splitting: half kick, half drift, exact OU flow, half drift, half kick.
    The OU substep uses ξ = ΔB/√h, so it is unconditionally stable in γh.
    """

    def __init__(self, m: ModelSpec, h: float, scheme: Scheme = Scheme.OU_SPLITTING):
        self.m = m
        self.h = float(h)
        self.scheme = Scheme(scheme)
        self.decay = math.exp(-m.gamma * self.h)
        self.ou_scale = math.sqrt(-math.expm1(-2.0 * m.gamma * self.h) / self.h)
        self.em_scale = math.sqrt(2.0 * m.gamma)
        self.sigma_t = m.sigma.sigma.T

    def step(self, x: np.ndarray, y: np.ndarray, dB: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        h, force = self.h, self.m.force
        if self.scheme is Scheme.EULER_MARUYAMA:
            x_new = x + h * y
            y_new = y + h * (force(x) - self.m.gamma * y) + self.em_scale * (dB @ self.sigma_t)
            return _wrap(x_new), y_new
        y = y + 0.5 * h * force(x)
        x = x + 0.5 * h * y
        y = self.decay * y + self.ou_scale * (dB @ self.sigma_t)
        x = _wrap(x + 0.5 * h * y)
        y = y + 0.5 * h * force(x)
        return x, y


def langevin_step(m: ModelSpec, p: PhaseState, dB: np.ndarray, h: float) -> PhaseState:
    """One OU-splitting step; deterministic given (p, ΔB, h)."""
    if h <= 0:
        raise ValueError(f"Step must be positive, got {h}")
    x, y = LangevinIntegrator(m, h).step(p.x, p.y, np.asarray(dB, dtype=float))
    _check_finite(0, x, y)
    return PhaseState.from_arrays(x, y)


def overdamped_step(m: ModelSpec, z, dB: np.ndarray, h: float) -> TorusPoint:
    """Euler-Maruyama: z ← wrap(z + hF(z) + √2 Σ ΔB)."""
    if h <= 0:
        raise ValueError(f"Step must be positive, got {h}")
    coords = z.coords if isinstance(z, TorusPoint) else np.asarray(z, dtype=float)
    out = coords + h * m.force(coords) + math.sqrt(2.0) * (np.asarray(dB) @ m.sigma.sigma.T)
    _check_finite(0, out)
    return TorusPoint(out)


@dataclass
class Trajectory:
    """Thinned states after burn-in, shape (n_records, batch, d), plus the final state."""

    positions: np.ndarray
    velocities: Optional[np.ndarray]
    times: np.ndarray
    final_x: np.ndarray
    final_y: Optional[np.ndarray]
    bin_sums: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.positions.shape[0]


def _run(
    n_steps: int,
    cfg: IntegratorConfig,
    noise: NoisePath,
    advance: Callable[[np.ndarray], Tuple[np.ndarray, Optional[np.ndarray]]],
    shape: Tuple[int, int],
    with_velocity: bool,
    bin_steps: Optional[int],
    on_increment: Optional[Callable[[np.ndarray], None]],
):
    if noise.n_steps < n_steps:
        raise NoiseExhaustedError(
            f"Noise path has {noise.n_steps} steps, horizon needs {n_steps}"
        )
    n_rec = cfg.n_records
    positions = np.empty((n_rec,) + shape)
    velocities = np.empty((n_rec,) + shape) if with_velocity else None
    times = np.empty(n_rec)
    bins = (
        BinAccumulator(bin_steps, n_steps // bin_steps, *shape) if bin_steps else None
    )
    burn, stride = cfg.burn_steps, cfg.thin
    rec = 0
    x = y = None
    for k, dB in enumerate(noise):
        if k >= n_steps:
            break
        if bins is not None:
            bins.add(dB)
        if on_increment is not None:
            on_increment(dB)
        x, y = advance(dB)
        if not np.isfinite(x).all() or (y is not None and not np.isfinite(y).all()):
            raise NonFiniteStateError(k + 1)
        done = k + 1 - burn
        if done > 0 and done % stride == 0 and rec < n_rec:
            positions[rec] = x
            if with_velocity:
                velocities[rec] = y
            times[rec] = (k + 1) * cfg.h
            rec += 1
    return positions[:rec], (velocities[:rec] if with_velocity else None), times[:rec], x, y, (
        bins.sums if bins is not None else None
    )


def simulate_trajectory(
    m: ModelSpec,
    cfg: IntegratorConfig,
    init: PhaseState,
    noise: NoisePath,
    bin_steps: Optional[int] = None,
    on_increment: Optional[Callable[[np.ndarray], None]] = None,
) -> Trajectory:
    """
    Integrate the kinetic SDE over cfg.horizon from a (batched) initial state.

    Records floor((1 - burn_in)·T/(thin·h)) states. With bin_steps, also
    returns partial sums of the driving increments over macroscopic bins.
    on_increment sees every increment before the step that consumes it.
    """
    integrator = LangevinIntegrator(m, cfg.h, cfg.scheme)
    x = np.atleast_2d(init.x).astype(float, copy=True)
    y = np.atleast_2d(init.y).astype(float, copy=True)
    state = [x, y]

    def advance(dB):
        state[0], state[1] = integrator.step(state[0], state[1], dB)
        return state[0], state[1]

    n_steps = cfg.n_steps
    positions, velocities, times, _, _, sums = _run(
        n_steps, cfg, noise, advance, x.shape, True, bin_steps, on_increment
    )
    logger.debug(
        f"Langevin trajectory: gamma={m.gamma}, h={cfg.h:.3g}, steps={n_steps}, "
        f"records={len(times)}, batch={x.shape[0]}"
    )
    return Trajectory(positions, velocities, times, state[0], state[1], sums)


def simulate_overdamped(
    m: ModelSpec,
    cfg: IntegratorConfig,
    init: np.ndarray,
    noise: NoisePath,
    bin_steps: Optional[int] = None,
) -> Trajectory:
    """Euler-Maruyama for dZ = F(Z)dt + √2 Σ dB over cfg.horizon."""
    z = [np.atleast_2d(np.asarray(init, dtype=float)).copy()]
    sqrt2_sigma_t = math.sqrt(2.0) * m.sigma.sigma.T
    h = cfg.h

    def advance(dB):
        z[0] = _wrap(z[0] + h * m.force(z[0]) + dB @ sqrt2_sigma_t)
        return z[0], None

    positions, _, times, _, _, sums = _run(
        cfg.n_steps, cfg, noise, advance, z[0].shape, False, bin_steps, None
    )
    return Trajectory(positions, None, times, z[0], None, sums)


def initial_state(m: ModelSpec, n: int, seed: int, *stream: int) -> PhaseState:
    """x uniform on T^d, y ~ N(0, Σ²)."""
    rng = philox_generator(seed, INIT_TAG, *stream)
    x = rng.random((n, m.d))
    y = rng.standard_normal((n, m.d)) @ m.sigma.sigma.T
    return PhaseState.from_arrays(x, y)
