"""
Stationary Sampling Run
Draws μ̂_γ for every configured γ and the overdamped target μ̂_O⊗g once,
summarizes each sample and optionally persists the point clouds.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from config.experiment import ExperimentConfig
from core.model import ModelSpec, equilibrium_density
from core.sampling import (
    StationarySample,
    independence_diagnostic,
    load_sample,
    moment_check,
    sample_mu_gamma,
    sample_mu_O_tensor_gauss,
    save_sample,
    velocity_moments,
)
from experiments.sweep import TARGET_STREAM, gamma_key
from transport.measures import Space
from utils.error_handling import NotApplicableError, SampleRoundTripError
from utils.logger import get_logger
from utils.metrics import Timer

logger = get_logger(__name__)

SAMPLE_COLUMNS = [
    "law",
    "gamma",
    "n",
    "provenance",
    "ess",
    "velocity_mean",
    "velocity_var",
    "second_moment",
    "second_moment_se",
    "second_moment_bound",
    "max_abs_corr",
    "corr_threshold",
    "independence",
]

# torus nodes for the closed-form applicability test; Z itself is unused
PRODUCT_LAW_NODES = 8


@dataclass
class SimulationResult:
    rows: List[Dict] = field(default_factory=list)
    samples: Dict[str, StationarySample] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)


def _product_law_expected(m: ModelSpec) -> bool:
    """True when the invariant law has the closed product form, so x and y are independent."""
    try:
        equilibrium_density(m, nodes=PRODUCT_LAW_NODES)
    except NotApplicableError:
        return False
    return True


def _save_checked(sample: StationarySample, path: Path) -> Path:
    """Write a cloud and read it back; the stored rows must equal the sampled ones."""
    path = save_sample(sample, path)
    loaded = load_sample(path, Space.PHASE)
    if not (np.array_equal(loaded.x, sample.x) and np.array_equal(loaded.y, sample.y)):
        raise SampleRoundTripError(f"{path} does not read back to the sampled cloud")
    logger.debug(f"Saved {sample.n} points to {path}")
    return path


def _summary_row(
    label: str,
    gamma: float,
    sample: StationarySample,
    cfg: ExperimentConfig,
    seed: int,
    product: bool,
) -> Dict:
    m = cfg.model_at(gamma)
    mom = velocity_moments(sample, seed=seed)
    moment = moment_check(sample, m, seed=seed)
    indep = independence_diagnostic(sample)
    return {
        "law": label,
        "gamma": gamma,
        "n": sample.n,
        "provenance": sample.provenance.value,
        "ess": sample.ess,
        # trace-normalised summaries keep the column set fixed across d
        "velocity_mean": float(np.linalg.norm(mom["mean"])),
        "velocity_var": float(np.trace(mom["cov"]) / sample.y.shape[1]),
        "second_moment": moment.estimate,
        "second_moment_se": moment.se,
        "second_moment_bound": moment.bound,
        "max_abs_corr": indep.max_abs,
        "corr_threshold": indep.threshold,
        "independence": (
            indep.verdict if product else indep.dependence_verdict()
        ).value,
    }


def simulate(
    cfg: ExperimentConfig,
    seed: int,
    threads: int = 1,
    batch: int = 512,
    sample_dir: Optional[Path] = None,
) -> SimulationResult:
    """Sample every law of the experiment; write clouds when output.save_samples is set."""
    scfg = cfg.sampling_config(batch)
    result = SimulationResult()

    with Timer("simulate.target", log=True, samples=cfg.n):
        base = cfg.model_at(cfg.gammas[0])
        target = sample_mu_O_tensor_gauss(base, cfg.n, scfg, seed, (TARGET_STREAM, 0), threads)
    result.samples["overdamped"] = target
    row = _summary_row("overdamped_x_gauss", cfg.gammas[0], target, cfg, seed, product=True)
    row["gamma"] = float("nan")
    result.rows.append(row)

    for gamma in cfg.gammas:
        with Timer(f"simulate.gamma_{gamma:g}", log=True, samples=cfg.n):
            m = cfg.model_at(gamma)
            sample = sample_mu_gamma(m, cfg.n, scfg, seed, (gamma_key(gamma), 0), threads)
        result.samples[f"gamma_{gamma:g}"] = sample
        result.rows.append(
            _summary_row("kinetic", gamma, sample, cfg, seed, product=_product_law_expected(m))
        )
        logger.info(f"gamma={gamma}: ESS {sample.ess:.0f} of {sample.n}")

    if cfg.output.save_samples and sample_dir is not None:
        suffix = f".{cfg.output.sample_format.value}"
        for label, sample in result.samples.items():
            result.files.append(_save_checked(sample, Path(sample_dir) / f"{cfg.name}_{label}{suffix}"))
    return result
