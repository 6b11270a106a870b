"""
Coupling Diagnostics
Drives the anticipative coupling over the γ list and checks the bounds it
is built to satisfy.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from analysis.regression import LogLogFit, fit_loglog
from config.experiment import ExperimentConfig
from core.coupling import CouplingSummary, pathwise_identity_residual, run_coupling
from core.model import ForceKind
from experiments.models import CheckResult, ValidationReport
from experiments.sweep import gamma_key
from utils.error_handling import report_failures
from utils.logger import get_logger
from utils.metrics import Timer

logger = get_logger(__name__)

# required decay exponent of E dist(X_{γt}, W_t)
E1_SLOPE_LIMIT = -0.8

IDENTITY_TOL = 1e-10
IDENTITY_STEPS = 2000
IDENTITY_PATHS = 100

COUPLING_COLUMNS = [
    "gamma",
    "t",
    "R",
    "e1_mean",
    "e1_se",
    "e2_mean",
    "e2_se",
    "e3_mean",
    "e3_se",
    "e2_bound",
    "cov_A_trace",
    "cov_A_target_trace",
    "max_abs_corr_WA",
    "gaussian_tail",
]

COUPLING_FIT_COLUMNS = ["quantity", "slope", "intercept", "points"]


@dataclass
class CouplingReport:
    summaries: List[CouplingSummary]
    fits: Dict[str, Optional[LogLogFit]] = field(default_factory=dict)
    checks: ValidationReport = field(default_factory=lambda: ValidationReport("coupling"))

    def rows(self) -> List[Dict[str, float]]:
        return [s.as_row() for s in self.summaries]

    def fit_rows(self) -> List[Dict[str, float]]:
        return [
            {
                "quantity": name,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "points": len(fit.residuals),
            }
            for name, fit in sorted(self.fits.items())
            if fit is not None
        ]


def _check_summary(s: CouplingSummary) -> List[CheckResult]:
    tag = f"[gamma={s.gamma}]"
    cov_dev = np.abs(s.cov_A - s.cov_A_target)
    cov_lim = 3.0 * s.cov_A_se
    return [
        CheckResult(
            f"e2 bound {tag}",
            s.e2_mean <= s.e2_bound + 3.0 * s.e2_se,
            f"E|Y - A| = {s.e2_mean:.4g} ± {s.e2_se:.2g}, bound {s.e2_bound:.4g}",
            s.e2_mean,
            s.e2_bound + 3.0 * s.e2_se,
        ),
        CheckResult(
            f"A covariance {tag}",
            bool(np.all(cov_dev <= cov_lim)),
            f"trace {np.trace(s.cov_A):.4g} vs {np.trace(s.cov_A_target):.4g}",
            float(np.max(cov_dev)),
            float(np.min(cov_lim)),
        ),
        CheckResult(
            f"W/A independence {tag}",
            s.max_abs_corr <= s.corr_threshold,
            f"max |corr| {s.max_abs_corr:.4g}",
            s.max_abs_corr,
            s.corr_threshold,
        ),
    ]


def _fit(summaries: List[CouplingSummary], attr: str) -> Optional[LogLogFit]:
    points = [(s.gamma, getattr(s, attr)) for s in summaries if getattr(s, attr) > 0]
    if len(points) < 3:
        return None
    return fit_loglog(points)


def run_coupling_diagnostics(
    cfg: ExperimentConfig,
    seed: int,
    threads: int = 1,
    batch: int = 512,
    n_resamples: int = 200,
) -> CouplingReport:
    """Coupling errors e₁, e₂, e₃ with SEs per γ, their fitted slopes and bound checks."""
    summaries = []
    for gamma in cfg.gammas:
        m = cfg.model_at(gamma)
        cc = cfg.coupling_config(gamma, batch)
        with Timer(f"coupling.gamma_{gamma:g}", log=True, samples=cc.replicas):
            ensemble = run_coupling(m, cc, seed, (gamma_key(gamma),), threads)
            summaries.append(ensemble.summary(n_resamples, seed))

    report = CouplingReport(summaries)
    for s in summaries:
        for check in _check_summary(s):
            report.checks.add(check)

    for attr in ("e1_mean", "e2_mean", "e3_mean"):
        report.fits[attr] = _fit(summaries, attr)
    e1_fit = report.fits["e1_mean"]
    if e1_fit is not None:
        logger.info(f"e1 slope {e1_fit.slope:.3f}")
        report.checks.add(
            CheckResult(
                "e1 slope",
                e1_fit.slope <= E1_SLOPE_LIMIT,
                f"log-log slope of E dist(X, W) = {e1_fit.slope:.3f}",
                e1_fit.slope,
                E1_SLOPE_LIMIT,
            )
        )
    else:
        logger.warning("Fewer than 3 gamma values: e1 slope not checked")

    if cfg.model_at(cfg.gammas[0]).force.kind == ForceKind.CONSTANT:
        for gamma in cfg.gammas:
            report.checks.add(check_pathwise_identity(cfg, gamma, seed, batch))
    return report


@report_failures("pathwise identity")
def check_pathwise_identity(cfg: ExperimentConfig, gamma: float, seed: int, batch: int) -> CheckResult:
    """Y minus its decayed start and force part equals the accumulated OU noise, step by step."""
    m = cfg.model_at(gamma)
    h = cfg.coupling_config(gamma, batch).h
    worst = pathwise_identity_residual(m, h, IDENTITY_STEPS, IDENTITY_PATHS, seed)
    return CheckResult(
        f"pathwise identity [gamma={gamma}]",
        worst <= IDENTITY_TOL,
        f"max residual {worst:.3e} over {IDENTITY_STEPS} steps",
        worst,
        IDENTITY_TOL,
    )
