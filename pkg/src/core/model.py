"""
Langevin Model Definitions
Force fields (finite trigonometric polynomials plus constants), diffusion
matrices, the kinetic generator, the stationary Fokker-Planck residual,
and the closed-form stationary densities of the equilibrium and
space-homogeneous cases.
"""

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import cumulative_trapezoid

from core.geometry import PhaseState
from utils.error_handling import (
    DimensionMismatchError,
    GridTooCoarseError,
    MissingEvaluatorError,
    NotApplicableError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi

# Default torus quadrature resolution per dimension
DEFAULT_TORUS_NODES = 64


@dataclass(frozen=True)
class DiffusionMatrix:
    """Constant symmetric positive definite Σ with cached Σ², Σ⁻¹, Tr(Σ²), det Σ."""

    sigma: np.ndarray
    sigma_sq: np.ndarray = field(init=False, repr=False)
    sigma_inv: np.ndarray = field(init=False, repr=False)
    sigma_inv_sq: np.ndarray = field(init=False, repr=False)
    trace_sq: float = field(init=False, repr=False)
    det: float = field(init=False, repr=False)

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if s.shape[0] != s.shape[1]:
            raise ValueError(f"Sigma must be square, got shape {s.shape}")
        if not np.allclose(s, s.T, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise ValueError("Sigma must be symmetric")
        eig = np.linalg.eigvalsh(s)
        if eig.min() <= 0:
            raise ValueError(f"Sigma must be positive definite, min eigenvalue {eig.min():.3e}")
        s = 0.5 * (s + s.T)
        inv = np.linalg.inv(s)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "sigma_sq", s @ s)
        object.__setattr__(self, "sigma_inv", inv)
        object.__setattr__(self, "sigma_inv_sq", inv @ inv)
        object.__setattr__(self, "trace_sq", float(np.trace(s @ s)))
        object.__setattr__(self, "det", float(np.linalg.det(s)))

    @classmethod
    def identity(cls, d: int) -> "DiffusionMatrix":
        return cls(np.eye(d))

    @classmethod
    def from_spec(cls, value, d: int) -> "DiffusionMatrix":
        """Build from a scalar (multiple of I), a diagonal list, or a full matrix."""
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            return cls(float(arr) * np.eye(d))
        if arr.ndim == 1:
            return cls(np.diag(arr))
        return cls(arr)

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    def is_isotropic(self) -> bool:
        return np.allclose(self.sigma, self.sigma[0, 0] * np.eye(self.d))


@dataclass(frozen=True)
class TrigPolynomial:
    """
    U(x) = sum_m a_m cos(2π k_m·x) + b_m sin(2π k_m·x) with integer wave vectors k_m.
    """

    wavevectors: np.ndarray
    cos_coefs: np.ndarray
    sin_coefs: np.ndarray

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.wavevectors, dtype=float))
        if not np.allclose(k, np.round(k)):
            raise ValueError("Wave vectors must be integer for 1-periodicity")
        a = np.asarray(self.cos_coefs, dtype=float).reshape(-1)
        b = np.asarray(self.sin_coefs, dtype=float).reshape(-1)
        if not (k.shape[0] == a.shape[0] == b.shape[0]):
            raise ValueError("Wave vectors and coefficients must have matching lengths")
        object.__setattr__(self, "wavevectors", np.round(k))
        object.__setattr__(self, "cos_coefs", a)
        object.__setattr__(self, "sin_coefs", b)

    @classmethod
    def zero(cls, d: int) -> "TrigPolynomial":
        return cls(np.zeros((0, d)), np.zeros(0), np.zeros(0))

    @classmethod
    def from_terms(cls, terms: Iterable[dict], d: int) -> "TrigPolynomial":
        """Build from [{"k": [..], "cos": a, "sin": b}, ...]."""
        terms = list(terms)
        if not terms:
            return cls.zero(d)
        ks, a, b = [], [], []
        for term in terms:
            k = list(term["k"]) if not np.isscalar(term["k"]) else [term["k"]]
            if len(k) != d:
                raise DimensionMismatchError(d, len(k), "wave vector")
            ks.append(k)
            a.append(term.get("cos", 0.0))
            b.append(term.get("sin", 0.0))
        return cls(np.array(ks, dtype=float), np.array(a), np.array(b))

    @property
    def d(self) -> int:
        return self.wavevectors.shape[1]

    @property
    def is_zero(self) -> bool:
        nonconstant = np.any(self.wavevectors != 0, axis=1)
        return not np.any(
            nonconstant & ((self.cos_coefs != 0) | (self.sin_coefs != 0))
        )

    def _phase(self, x: np.ndarray) -> np.ndarray:
        return TWO_PI * (np.asarray(x, dtype=float) @ self.wavevectors.T)

    def value(self, x: np.ndarray) -> np.ndarray:
        ph = self._phase(x)
        return np.cos(ph) @ self.cos_coefs + np.sin(ph) @ self.sin_coefs

    def gradient(self, x: np.ndarray) -> np.ndarray:
        ph = self._phase(x)
        weights = -np.sin(ph) * self.cos_coefs + np.cos(ph) * self.sin_coefs
        return TWO_PI * (weights @ self.wavevectors)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        ph = self._phase(x)
        weights = np.cos(ph) * self.cos_coefs + np.sin(ph) * self.sin_coefs
        outer = np.einsum("mi,mj->mij", self.wavevectors, self.wavevectors)
        return -(TWO_PI**2) * np.einsum("...m,mij->...ij", weights, outer)

    def gradient_bound(self) -> float:
        """Upper bound on sup |∇U|: sum_m 2π |k_m| sqrt(a_m² + b_m²)."""
        amp = np.hypot(self.cos_coefs, self.sin_coefs)
        return float(TWO_PI * np.sum(np.linalg.norm(self.wavevectors, axis=1) * amp))


class ForceKind(str, Enum):
    GRADIENT = "gradient"
    CONSTANT = "constant"
    MIXED = "mixed"


@dataclass(frozen=True)
class ForceField:
    """
    F(x) = -M ∇U(x) + η + τ F̃(x).

    M is Σ² for the gradient and mixed kinds built by the factories below.
    F̃ is J∇V for d >= 2 (J antisymmetric) and a constant c for d = 1.
    """

    kind: ForceKind
    potential: TrigPolynomial
    metric: np.ndarray
    eta: np.ndarray
    tau: float = 0.0
    rotation: Optional[np.ndarray] = None
    rotation_potential: Optional[TrigPolynomial] = None
    perturbation_constant: Optional[np.ndarray] = None
    supplied_bound: Optional[float] = None

    def __post_init__(self):
        d = self.potential.d
        object.__setattr__(self, "metric", np.atleast_2d(np.asarray(self.metric, dtype=float)))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float).reshape(d))
        if self.metric.shape != (d, d):
            raise DimensionMismatchError(d, self.metric.shape[0], "force metric")
        if self.rotation is not None:
            J = np.asarray(self.rotation, dtype=float)
            if not np.allclose(J, -J.T):
                raise ValueError("Rotation matrix J must be antisymmetric")
            object.__setattr__(self, "rotation", J)
        if self.perturbation_constant is not None:
            object.__setattr__(
                self,
                "perturbation_constant",
                np.asarray(self.perturbation_constant, dtype=float).reshape(d),
            )

    @property
    def d(self) -> int:
        return self.potential.d

    def _perturbation(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.rotation is not None and self.rotation_potential is not None:
            return self.rotation_potential.gradient(x) @ self.rotation.T
        if self.perturbation_constant is not None:
            return np.broadcast_to(self.perturbation_constant, x.shape).copy()
        return np.zeros_like(x)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = -(self.potential.gradient(x) @ self.metric.T) + self.eta
        if self.tau != 0.0:
            out = out + self.tau * self._perturbation(x)
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """DF(x) with entries ∂F_i/∂x_j, shape (..., d, d)."""
        jac = -np.einsum("ik,...kj->...ij", self.metric, self.potential.hessian(x))
        if self.tau != 0.0 and self.rotation is not None and self.rotation_potential is not None:
            jac = jac + self.tau * np.einsum(
                "ik,...kj->...ij", self.rotation, self.rotation_potential.hessian(x)
            )
        return jac

    @property
    def sup_norm(self) -> float:
        """Computable bound on ‖F‖_∞, or the supplied one."""
        if self.supplied_bound is not None:
            return float(self.supplied_bound)
        bound = np.linalg.norm(self.metric, 2) * self.potential.gradient_bound()
        bound += np.linalg.norm(self.eta)
        if self.tau != 0.0:
            if self.rotation is not None and self.rotation_potential is not None:
                bound += abs(self.tau) * np.linalg.norm(self.rotation, 2) * (
                    self.rotation_potential.gradient_bound()
                )
            elif self.perturbation_constant is not None:
                bound += abs(self.tau) * np.linalg.norm(self.perturbation_constant)
        return float(bound)


@dataclass(frozen=True)
class ModelSpec:
    """Force field F, diffusion Σ and damping γ of the kinetic Langevin SDE."""

    force: ForceField
    sigma: DiffusionMatrix
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.force.d != self.sigma.d:
            raise DimensionMismatchError(self.force.d, self.sigma.d, "diffusion matrix")

    @property
    def d(self) -> int:
        return self.force.d

    def with_gamma(self, gamma: float) -> "ModelSpec":
        return replace(self, gamma=float(gamma))


def gradient_model(
    potential: TrigPolynomial, sigma: DiffusionMatrix, gamma: float
) -> ModelSpec:
    """Equilibrium model F = -Σ²∇U."""
    force = ForceField(ForceKind.GRADIENT, potential, sigma.sigma_sq, np.zeros(potential.d))
    return ModelSpec(force, sigma, gamma)


def constant_model(eta: Sequence[float], sigma: DiffusionMatrix, gamma: float) -> ModelSpec:
    """Space-homogeneous model F ≡ η."""
    d = sigma.d
    force = ForceField(ForceKind.CONSTANT, TrigPolynomial.zero(d), sigma.sigma_sq, np.asarray(eta))
    return ModelSpec(force, sigma, gamma)


def mixed_model(
    potential: TrigPolynomial,
    eta: Sequence[float],
    sigma: DiffusionMatrix,
    gamma: float,
    tau: float = 0.0,
    rotation_potential: Optional[TrigPolynomial] = None,
    rotation: Optional[np.ndarray] = None,
    perturbation_constant: Optional[Sequence[float]] = None,
    metric: Optional[np.ndarray] = None,
) -> ModelSpec:
    """
    F = -M∇U + η + τ F̃ with M = Σ² unless overridden.

    Defaults for F̃: J∇V with J the standard rotation in the first two
    coordinates (d >= 2), the constant 1 in d = 1.
    """
    d = potential.d
    if tau != 0.0:
        if d >= 2 and rotation_potential is not None:
            if rotation is None:
                rotation = np.zeros((d, d))
                rotation[0, 1], rotation[1, 0] = -1.0, 1.0
        elif perturbation_constant is None:
            perturbation_constant = np.ones(d)
    force = ForceField(
        ForceKind.MIXED,
        potential,
        sigma.sigma_sq if metric is None else metric,
        np.asarray(eta, dtype=float),
        tau=float(tau),
        rotation=rotation if rotation_potential is not None else None,
        rotation_potential=rotation_potential,
        perturbation_constant=perturbation_constant,
    )
    return ModelSpec(force, sigma, gamma)


def decoupled_model(
    d: int, drift: float, potential_terms: Iterable[dict], gamma: float
) -> ModelSpec:
    """
    Σ = I, η = drift·e₁ and U independent of x₁: the first coordinate is
    space-homogeneous and the others are at equilibrium, so μ_γ is a tensor product.
    """
    if d < 2:
        raise ValueError("decoupled configuration needs d >= 2")
    potential = TrigPolynomial.from_terms(potential_terms, d)
    if np.any(potential.wavevectors[:, 0] != 0):
        raise ValueError("decoupled potential must not depend on the first coordinate")
    eta = np.zeros(d)
    eta[0] = drift
    return mixed_model(potential, eta, DiffusionMatrix.identity(d), gamma)


def oscillator_chain_model(
    potential: TrigPolynomial, sigma: DiffusionMatrix, gamma: float
) -> ModelSpec:
    """F = -∇U with anisotropic Σ: non-equilibrium although F is conservative."""
    return mixed_model(
        potential, np.zeros(potential.d), sigma, gamma, metric=np.eye(potential.d)
    )


# ============================================================================
# Generator and stationary residual
# ============================================================================


@dataclass(frozen=True)
class SmoothFunction:
    """Test function f(x, y) with derivative evaluators; all take batched (x, y)."""

    value: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    grad_x: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    grad_y: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    hess_y: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise MissingEvaluatorError(f"Missing evaluators: {', '.join(missing)}")


@dataclass(frozen=True)
class DensityCandidate(SmoothFunction):
    """Candidate log-density H for a stationary density proportional to e^{-H}."""

    def finite_difference_error(
        self, x: np.ndarray, y: np.ndarray, eps: float = 1e-5
    ) -> float:
        """Largest discrepancy between the evaluators and central differences of H."""
        self.require("value", "grad_x", "grad_y", "hess_y")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        d = x.shape[-1]
        errs = []
        gx, gy, hy = self.grad_x(x, y), self.grad_y(x, y), self.hess_y(x, y)
        for i in range(d):
            e = np.zeros(d)
            e[i] = eps
            fd_x = (self.value(x + e, y) - self.value(x - e, y)) / (2 * eps)
            fd_y = (self.value(x, y + e) - self.value(x, y - e)) / (2 * eps)
            fd_hy = (self.grad_y(x, y + e) - self.grad_y(x, y - e)) / (2 * eps)
            errs.append(np.max(np.abs(fd_x - gx[..., i])))
            errs.append(np.max(np.abs(fd_y - gy[..., i])))
            errs.append(np.max(np.abs(fd_hy - hy[..., :, i])))
        return float(max(errs))


def _split(p) -> tuple:
    if isinstance(p, PhaseState):
        return p.x, p.y
    x, y = p
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def apply_generator(m: ModelSpec, f: SmoothFunction, p) -> np.ndarray:
    """Lf = y·∇ₓf + (F(x) - γy)·∇ᵧf + γ Σ²:∇²ᵧf evaluated at p (batched)."""
    f.require("grad_x", "grad_y", "hess_y")
    x, y = _split(p)
    drift = m.force(x) - m.gamma * y
    out = np.sum(y * f.grad_x(x, y), axis=-1)
    out = out + np.sum(drift * f.grad_y(x, y), axis=-1)
    out = out + m.gamma * np.einsum("ij,...ij->...", m.sigma.sigma_sq, f.hess_y(x, y))
    return out


def stationarity_residual(m: ModelSpec, h: DensityCandidate, p) -> np.ndarray:
    """
    y·∇ₓH + (F - γy)·∇ᵧH + γd + γ|Σ∇ᵧH|² - γ Σ²:∇²ᵧH.

    Vanishes everywhere iff e^{-H} (normalized) is the stationary density.
    """
    h.require("grad_x", "grad_y", "hess_y")
    x, y = _split(p)
    gy = h.grad_y(x, y)
    drift = m.force(x) - m.gamma * y
    sgy = gy @ m.sigma.sigma.T
    out = np.sum(y * h.grad_x(x, y), axis=-1) + np.sum(drift * gy, axis=-1)
    out = out + m.gamma * m.d + m.gamma * np.sum(sgy * sgy, axis=-1)
    out = out - m.gamma * np.einsum("ij,...ij->...", m.sigma.sigma_sq, h.hess_y(x, y))
    return out


# ============================================================================
# Closed forms
# ============================================================================


class EquilibriumDensity(NamedTuple):
    density: DensityCandidate
    normalization: float
    torus_integral: float
    nodes: int


def torus_grid(d: int, nodes: int) -> np.ndarray:
    """Uniform tensor grid on T^d, shape (nodes**d, d)."""
    axis = np.arange(nodes) / nodes
    return np.array(list(itertools.product(axis, repeat=d))) if d > 1 else axis[:, None]


def torus_integral(fn: Callable[[np.ndarray], np.ndarray], d: int, nodes: int) -> float:
    """Trapezoid rule on T^d (spectrally accurate for smooth periodic integrands)."""
    return float(np.mean(fn(torus_grid(d, nodes))))


def _gradient_dot_eta_vanishes(m: ModelSpec, nodes: int) -> bool:
    if not np.any(m.force.eta):
        return True
    grid = torus_grid(m.d, min(nodes, 32))
    dots = m.force.potential.gradient(grid) @ m.force.eta
    return bool(np.max(np.abs(dots)) <= 1e-10 * max(1.0, m.force.sup_norm))


def equilibrium_density(m: ModelSpec, nodes: int = DEFAULT_TORUS_NODES) -> EquilibriumDensity:
    """
    H(x, y) = U(x) + |Σ⁻¹(y - η/γ)|²/2 with Z = (2π)^{d/2} det Σ ∫ e^{-U}.

    Applies to the gradient and constant kinds, and to the mixed kind when
    τ = 0, M = Σ² and ∇U·η = 0.
    """
    force = m.force
    if force.kind == ForceKind.MIXED:
        if force.tau != 0.0:
            raise NotApplicableError("closed form requires tau = 0")
        if not np.allclose(force.metric, m.sigma.sigma_sq):
            raise NotApplicableError("closed form requires F = -Σ²∇U + η")
        if not _gradient_dot_eta_vanishes(m, nodes):
            raise NotApplicableError("closed form requires ∇U·η = 0")

    U = force.potential
    shift = force.eta / m.gamma
    inv_sq = m.sigma.sigma_inv_sq

    def value(x, y):
        u = np.asarray(y, dtype=float) - shift
        return U.value(x) + 0.5 * np.einsum("...i,ij,...j->...", u, inv_sq, u)

    def grad_x(x, y):
        return U.gradient(x)

    def grad_y(x, y):
        return (np.asarray(y, dtype=float) - shift) @ inv_sq.T

    def hess_y(x, y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(inv_sq, y.shape + (m.d,)).copy()

    integral = torus_integral(lambda g: np.exp(-U.value(g)), m.d, nodes)
    Z = (TWO_PI) ** (m.d / 2) * m.sigma.det * integral
    logger.debug(f"Equilibrium normalization Z={Z:.12g} with {nodes}^{m.d} torus nodes")
    return EquilibriumDensity(
        DensityCandidate(value=value, grad_x=grad_x, grad_y=grad_y, hess_y=hess_y),
        Z,
        integral,
        nodes,
    )


def integrate_density(
    h: DensityCandidate,
    m: ModelSpec,
    nodes: int = 32,
    hermite_nodes: int = 24,
) -> float:
    """
    ∫∫ e^{-H} by torus trapezoid x tensor Gauss-Hermite in velocity.

    Velocities are centred at η/γ and scaled by Σ. Cost is (nodes*hermite_nodes)^d.
    """
    h.require("value")
    d = m.d
    u1, w1 = hermegauss(hermite_nodes)
    u = np.array(list(itertools.product(u1, repeat=d)))
    w = np.prod(np.array(list(itertools.product(w1, repeat=d))), axis=1)
    y = m.force.eta / m.gamma + u @ m.sigma.sigma.T
    grid = torus_grid(d, nodes)
    total = 0.0
    for x in grid:
        xs = np.broadcast_to(x, y.shape)
        integrand = np.exp(-h.value(xs, y) + 0.5 * np.sum(u * u, axis=1))
        total += float(np.sum(w * integrand))
    return total / len(grid) * m.sigma.det


def nonequilibrium_certificate(m: ModelSpec, nodes: int = 32) -> float:
    """
    Largest entry of the antisymmetric part of Σ⁻²·DF over a torus grid.

    Zero iff Σ⁻²F is locally a gradient on the grid; a positive value
    certifies that the model is not at equilibrium.
    """
    grid = torus_grid(m.d, nodes)
    jac = np.einsum("ik,...kj->...ij", m.sigma.sigma_inv_sq, m.force.jacobian(grid))
    anti = 0.5 * (jac - np.swapaxes(jac, -1, -2))
    return float(np.max(np.abs(anti))) if anti.size else 0.0


@dataclass(frozen=True)
class TabulatedDensity:
    """Density on a uniform periodic grid of T^1."""

    grid: np.ndarray
    density: np.ndarray
    flux: float
    residual: float

    @property
    def dx(self) -> float:
        return 1.0 / len(self.grid)

    def cdf(self) -> np.ndarray:
        """CDF at the right end of each grid cell."""
        return np.cumsum(self.density) * self.dx

    def mass(self) -> float:
        return float(np.sum(self.density) * self.dx)


def overdamped_density_1d(
    m: ModelSpec, nodes: int = 4096, tol: float = 1e-3
) -> TabulatedDensity:
    """
    Stationary density of dZ = F(Z)dt + √2 σ dB on T^1.

    Constant-flux construction: with Φ(x) = -∫₀ˣ F/σ², the periodic
    solution is p(x) ∝ e^{-Φ(x)} ∫ₓ^{x+1} e^{Φ(y)} dy. The flux
    J = Fp - σ²p' is checked to be constant to `tol` (relative).
    """
    if m.d != 1:
        raise DimensionMismatchError(1, m.d, "overdamped_density_1d")
    s2 = float(m.sigma.sigma_sq[0, 0])
    grid = np.arange(nodes) / nodes
    fine = np.arange(2 * nodes + 1) / nodes
    drift = m.force(fine[:, None])[:, 0]
    phi = -cumulative_trapezoid(drift / s2, fine, initial=0.0)
    shift = phi.max()
    c = cumulative_trapezoid(np.exp(phi - shift), fine, initial=0.0)
    inner = c[nodes : 2 * nodes] - c[:nodes]
    log_p = -phi[:nodes] + np.log(inner)
    p = np.exp(log_p - log_p.max())
    p /= np.sum(p) / nodes

    f_grid = drift[:nodes]
    dp = (np.roll(p, -1) - np.roll(p, 1)) * (nodes / 2.0)
    flux = f_grid * p - s2 * dp
    scale = max(np.max(np.abs(f_grid * p)), s2 * np.max(np.abs(dp)), 1e-300)
    residual = float(np.max(np.abs(flux - flux.mean())) / scale)
    if residual > tol:
        raise GridTooCoarseError(residual, tol, nodes)
    return TabulatedDensity(grid, p, float(flux.mean()), residual)
