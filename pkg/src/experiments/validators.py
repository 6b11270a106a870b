"""
Closed-Form Validators
Equilibrium and space-homogeneous models have explicit invariant laws;
these validators compare simulated samples against them. Each sub-check is
isolated, so one failure never hides the others.
"""

import itertools
import math
from typing import Optional

import numpy as np
from scipy import stats

from analysis.bootstrap import bootstrap_se
from config.experiment import ExperimentConfig
from core.model import (
    ForceKind,
    ModelSpec,
    equilibrium_density,
    integrate_density,
    overdamped_density_1d,
    stationarity_residual,
    torus_grid,
)
from core.sampling import (
    StationarySample,
    independence_diagnostic,
    moment_check,
    sample_mu_gamma,
    sample_mu_O_tensor_gauss,
    velocity_moments,
)
from experiments.models import CheckResult, ValidationReport
from experiments.sweep import FLOOR_STREAM, TARGET_STREAM, analytic_distance, gamma_key
from transport.checks import estimate_w1, self_distance
from transport.sorted1d import w1_to_density_1d
from utils.error_handling import NotApplicableError, report_failures
from utils.logger import get_logger
from utils.metrics import track_performance

logger = get_logger(__name__)

# velocity half-width of the residual grid, in units of the diagonal of Σ
RESIDUAL_VELOCITY_SPAN = 5.0


def _residual_nodes(d: int) -> int:
    return {1: 64, 2: 16}.get(d, 6)


@report_failures("position marginal")
def check_position_marginal(sample: StationarySample, m: ModelSpec, tol: float) -> CheckResult:
    if m.d != 1:
        return CheckResult("position marginal", True, "skipped: quadrature reference needs d = 1")
    density = overdamped_density_1d(m)
    w = w1_to_density_1d(sample.x, density)
    return CheckResult("position marginal", w <= tol, f"W1 to quadrature density {w:.4g}", w, tol)


@report_failures("velocity mean")
def check_velocity_mean(sample: StationarySample, expected: np.ndarray, seed: int) -> CheckResult:
    mom = velocity_moments(sample, seed=seed)
    dev = np.abs(mom["mean"] - expected)
    limit = 3.0 * mom["mean_se"]
    return CheckResult(
        "velocity mean",
        bool(np.all(dev <= limit)),
        f"mean {np.round(mom['mean'], 5).tolist()} vs {np.round(expected, 5).tolist()}",
        float(np.max(dev)),
        float(np.min(limit)),
    )


@report_failures("velocity covariance")
def check_velocity_covariance(sample: StationarySample, m: ModelSpec, seed: int) -> CheckResult:
    mom = velocity_moments(sample, seed=seed)
    dev = np.abs(mom["cov"] - m.sigma.sigma_sq)
    limit = 3.0 * mom["cov_se"]
    return CheckResult(
        "velocity covariance",
        bool(np.all(dev <= limit)),
        f"covariance {np.round(mom['cov'], 5).tolist()} vs Sigma^2",
        float(np.max(dev)),
        float(np.min(limit)),
    )


@report_failures("independence")
def check_independence(sample: StationarySample) -> CheckResult:
    report = independence_diagnostic(sample)
    return CheckResult(
        "independence",
        report.within_threshold,
        f"max |corr| {report.max_abs:.4g}",
        report.max_abs,
        report.threshold,
    )


@report_failures("second moment")
def check_second_moment(sample: StationarySample, m: ModelSpec, seed: int) -> CheckResult:
    report = moment_check(sample, m, seed=seed)
    return CheckResult(
        "second moment",
        report.passed,
        f"E|Y|^2 = {report.estimate:.4g} ± {report.se:.2g}, bound {report.bound:.4g}",
        report.estimate,
        report.bound + 3.0 * report.se,
    )


@report_failures("stationarity residual")
def check_stationarity_residual(m: ModelSpec, tol: float) -> CheckResult:
    closed = equilibrium_density(m)
    nodes = _residual_nodes(m.d)
    xs = torus_grid(m.d, nodes)
    span = RESIDUAL_VELOCITY_SPAN * np.sqrt(np.diag(m.sigma.sigma_sq))
    axes = [np.linspace(-s, s, nodes) + m.force.eta[i] / m.gamma for i, s in enumerate(span)]
    ys = np.array(list(itertools.product(*axes)))
    x = np.repeat(xs, len(ys), axis=0)
    y = np.tile(ys, (len(xs), 1))
    worst = float(np.max(np.abs(stationarity_residual(m, closed.density, (x, y)))))
    return CheckResult(
        "stationarity residual",
        worst <= tol,
        f"max |residual| {worst:.3e} on {len(x)} points",
        worst,
        tol,
    )


@report_failures("normalization")
def check_normalization(m: ModelSpec, rtol: float = 1e-6) -> CheckResult:
    closed = equilibrium_density(m)
    total = integrate_density(closed.density, m)
    err = abs(total - closed.normalization) / closed.normalization
    return CheckResult("normalization", err <= rtol, f"relative error {err:.3e}", err, rtol)


@track_performance("validate_equilibrium")
def validate_equilibrium(
    cfg: ExperimentConfig,
    seed: int,
    threads: int = 1,
    batch: int = 512,
    position_tol: float = 0.02,
    residual_tol: float = 1e-8,
) -> ValidationReport:
    """Closed-form equilibrium law against a simulated sample at the first γ."""
    gamma = cfg.gammas[0]
    m = cfg.model_at(gamma)
    report = ValidationReport(f"equilibrium(gamma={gamma})")
    logger.info(f"Validating equilibrium model at gamma={gamma}, n={cfg.n}")
    if np.any(m.force.eta):
        report.add(CheckResult("model", False, "equilibrium validation needs F = -Sigma^2 grad U"))
        return report

    sample = sample_mu_gamma(m, cfg.n, cfg.sampling_config(batch), seed, (gamma_key(gamma),), threads)
    report.add(check_stationarity_residual(m, residual_tol))
    report.add(check_normalization(m))
    report.add(check_position_marginal(sample, m, position_tol))
    report.add(check_velocity_mean(sample, np.zeros(m.d), seed))
    report.add(check_velocity_covariance(sample, m, seed))
    report.add(check_independence(sample))
    report.add(check_second_moment(sample, m, seed))
    return report


@report_failures("gaussian shape")
def check_gaussian_shape(sample: StationarySample, m: ModelSpec, level: float) -> CheckResult:
    white = (sample.y - m.force.eta / m.gamma) @ m.sigma.sigma_inv.T
    pvalues = [stats.kstest(white[:, i], "norm").pvalue for i in range(m.d)]
    worst = float(min(pvalues))
    return CheckResult("gaussian shape", worst >= level, f"min KS p-value {worst:.3g}", worst, level)


@report_failures("uniform positions")
def check_uniform_positions(sample: StationarySample, level: float) -> CheckResult:
    pvalues = [stats.kstest(sample.x[:, i], "uniform").pvalue for i in range(sample.x.shape[1])]
    worst = float(min(pvalues))
    return CheckResult(
        "uniform positions", worst >= level, f"min KS p-value {worst:.3g}", worst, level
    )


@report_failures("analytic distance")
def check_analytic_distance(
    sample: StationarySample,
    target: StationarySample,
    floor: float,
    m: ModelSpec,
    cfg: ExperimentConfig,
    seed: int,
) -> CheckResult:
    analytic = analytic_distance(m)
    if not math.isfinite(analytic):
        raise NotApplicableError("analytic distance needs Sigma = I")
    result = estimate_w1(sample.measure, target.measure, cfg.ot_method, cfg.sinkhorn_epsilon)
    se = (
        bootstrap_se(result.pair_costs, seed=seed, stream=(gamma_key(m.gamma), 0xA1))
        if result.pair_costs is not None
        else 0.0
    )
    tol = max(0.15 / m.gamma, 3.0 * se + floor)
    err = abs(result.value - analytic)
    return CheckResult(
        "analytic distance",
        err <= tol,
        f"W1 {result.value:.4g} vs |eta|/gamma {analytic:.4g} (floor {floor:.3g})",
        err,
        tol,
    )


@track_performance("validate_homogeneous")
def validate_homogeneous(
    cfg: ExperimentConfig,
    seed: int,
    threads: int = 1,
    batch: int = 512,
    ks_level: float = 0.01,
    gammas: Optional[list] = None,
) -> ValidationReport:
    """Constant force: velocity law N(η/γ, Σ²), uniform positions and W1 = |η|/γ."""
    report = ValidationReport("homogeneous")
    base = cfg.model_at(cfg.gammas[0])
    if base.force.kind != ForceKind.CONSTANT:
        report.add(CheckResult("model", False, "homogeneous validation needs a constant force"))
        return report

    scfg = cfg.sampling_config(batch)
    target = sample_mu_O_tensor_gauss(base, cfg.n, scfg, seed, (TARGET_STREAM, 0), threads)
    twin = sample_mu_O_tensor_gauss(base, cfg.n, scfg, seed, (FLOOR_STREAM, 0), threads)
    floor = self_distance(target.measure, twin.measure, cfg.ot_method)

    for gamma in gammas or cfg.gammas:
        m = cfg.model_at(gamma)
        logger.info(f"Validating homogeneous model at gamma={gamma}")
        sample = sample_mu_gamma(m, cfg.n, scfg, seed, (gamma_key(gamma), 0), threads)
        sub = ValidationReport(f"homogeneous(gamma={gamma})")
        sub.add(check_velocity_mean(sample, m.force.eta / gamma, seed))
        sub.add(check_velocity_covariance(sample, m, seed))
        sub.add(check_gaussian_shape(sample, m, ks_level))
        sub.add(check_uniform_positions(sample, ks_level))
        sub.add(check_independence(sample))
        sub.add(check_analytic_distance(sample, target, floor, m, cfg, seed))
        for check in sub.checks:
            check.name = f"{check.name} [gamma={gamma}]"
        report.extend(sub)
    return report
