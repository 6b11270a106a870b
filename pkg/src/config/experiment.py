"""
Experiment Configuration
YAML experiment files validated by pydantic models. Unknown keys are
rejected at every level so that a typo fails before an expensive run.
"""

import hashlib
import json
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.coupling import CouplingConfig
from core.model import (
    DiffusionMatrix,
    ModelSpec,
    TrigPolynomial,
    constant_model,
    decoupled_model,
    gradient_model,
    mixed_model,
    oscillator_chain_model,
)
from core.sampling import Provenance, SamplingConfig
from core.sde import Scheme
from transport.measures import OTMethod
from utils.error_handling import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelKind(str, Enum):
    GRADIENT = "gradient"
    CONSTANT = "constant"
    MIXED = "mixed"
    DECOUPLED = "decoupled"
    OSCILLATOR_CHAIN = "oscillator_chain"


class FourierTerm(_Strict):
    """One term a·cos(2πk·x) + b·sin(2πk·x)."""

    k: Union[int, List[int]]
    cos: float = 0.0
    sin: float = 0.0

    def as_dict(self) -> dict:
        return {"k": self.k, "cos": self.cos, "sin": self.sin}


class ModelBlock(_Strict):
    kind: ModelKind = ModelKind.MIXED
    dimension: int = Field(default=1, ge=1)
    sigma: Union[float, List[float], List[List[float]]] = 1.0
    potential: List[FourierTerm] = Field(default_factory=list)
    eta: Optional[List[float]] = None
    tau: float = 0.0
    perturbation: List[FourierTerm] = Field(default_factory=list)
    J: Optional[List[List[float]]] = None
    perturbation_constant: Optional[List[float]] = None
    force_bound: Optional[float] = Field(default=None, gt=0)

    def _eta(self) -> np.ndarray:
        if self.eta is None:
            return np.zeros(self.dimension)
        if len(self.eta) != self.dimension:
            raise ValueError(f"eta has {len(self.eta)} entries for dimension {self.dimension}")
        return np.asarray(self.eta, dtype=float)

    def build(self, gamma: float) -> ModelSpec:
        """ModelSpec at damping γ."""
        d = self.dimension
        sigma = DiffusionMatrix.from_spec(self.sigma, d)
        U = TrigPolynomial.from_terms([t.as_dict() for t in self.potential], d)
        if self.kind == ModelKind.GRADIENT:
            m = gradient_model(U, sigma, gamma)
        elif self.kind == ModelKind.CONSTANT:
            m = constant_model(self._eta(), sigma, gamma)
        elif self.kind == ModelKind.DECOUPLED:
            m = decoupled_model(d, float(self._eta()[0]), [t.as_dict() for t in self.potential], gamma)
        elif self.kind == ModelKind.OSCILLATOR_CHAIN:
            m = oscillator_chain_model(U, sigma, gamma)
        else:
            V = (
                TrigPolynomial.from_terms([t.as_dict() for t in self.perturbation], d)
                if self.perturbation
                else None
            )
            m = mixed_model(
                U,
                self._eta(),
                sigma,
                gamma,
                tau=self.tau,
                rotation_potential=V,
                rotation=None if self.J is None else np.asarray(self.J, dtype=float),
                perturbation_constant=self.perturbation_constant,
            )
        if self.force_bound is not None:
            m = replace(m, force=replace(m.force, supplied_bound=self.force_bound))
        return m


class IntegratorBlock(_Strict):
    scheme: Scheme = Scheme.OU_SPLITTING
    provenance: Provenance = Provenance.REPLICAS
    h0: float = Field(default=1e-3, gt=0)
    step_factor: float = Field(default=0.5, gt=0)
    burn_time: Optional[float] = Field(default=None, gt=0)
    chains: int = Field(default=8, ge=1)
    batch: Optional[int] = Field(default=None, ge=1)


class OverdampedBlock(_Strict):
    h: float = Field(default=2e-4, gt=0)
    burn_time: float = Field(default=10.0, gt=0)
    stride_time: float = Field(default=0.5, gt=0)


class CouplingBlock(_Strict):
    t: float = Field(default=1.0, gt=0)
    delta: float = Field(default=1e-2, gt=0)
    replicas: int = Field(default=2000, ge=2)
    h0: float = Field(default=1e-3, gt=0)
    step_factor: float = Field(default=0.5, gt=0)
    batch: Optional[int] = Field(default=None, ge=1)


class SampleFormat(str, Enum):
    CSV = "csv"
    NPY = "npy"


class OutputBlock(_Strict):
    directory: Optional[str] = None
    prefix: str = ""
    save_samples: bool = False
    sample_format: SampleFormat = SampleFormat.CSV


class ExperimentConfig(_Strict):
    name: str = "experiment"
    model: ModelBlock = Field(default_factory=ModelBlock)
    gammas: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    n: int = Field(default=4096, ge=1)
    repetitions: int = Field(default=1, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    ot_method: OTMethod = OTMethod.AUTO
    sinkhorn_epsilon: float = Field(default=0.005, gt=0)
    integrator: IntegratorBlock = Field(default_factory=IntegratorBlock)
    overdamped: OverdampedBlock = Field(default_factory=OverdampedBlock)
    coupling: CouplingBlock = Field(default_factory=CouplingBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @field_validator("gammas")
    @classmethod
    def _positive_gammas(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("gammas must not be empty")
        if any(g <= 0 for g in value):
            raise ValueError("gammas must be positive")
        if len(set(value)) != len(value):
            raise ValueError("gammas must be distinct")
        return sorted(value)

    def model_at(self, gamma: float) -> ModelSpec:
        return self.model.build(gamma)

    def sampling_config(self, batch: int) -> SamplingConfig:
        ib, ob = self.integrator, self.overdamped
        return SamplingConfig(
            provenance=ib.provenance,
            scheme=ib.scheme,
            h0=ib.h0,
            step_factor=ib.step_factor,
            burn_time=ib.burn_time,
            chains=ib.chains,
            overdamped_h=ob.h,
            overdamped_burn_time=ob.burn_time,
            overdamped_stride_time=ob.stride_time,
            batch=ib.batch or batch,
        )

    def coupling_config(self, gamma: float, batch: int) -> CouplingConfig:
        cb = self.coupling
        return CouplingConfig(
            t=cb.t,
            gamma=gamma,
            delta=cb.delta,
            replicas=cb.replicas,
            h0=cb.h0,
            step_factor=cb.step_factor,
            batch=cb.batch or batch,
        )

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_errors(exc: ValidationError) -> List[str]:
    return [
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in exc.errors()
    ]


def parse_experiment(data: Optional[dict], source: str = "<config>") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as e:
        errors = _format_errors(e)
        raise ConfigError(f"Invalid experiment config {source}", errors) from e


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a YAML experiment file."""
    path = Path(path).expanduser()
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse YAML in {path}: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"Top level of {path} must be a mapping")
    cfg = parse_experiment(data, str(path))
    logger.info(f"Loaded experiment '{cfg.name}' from {path} (hash {cfg.config_hash()[:12]})")
    return cfg
