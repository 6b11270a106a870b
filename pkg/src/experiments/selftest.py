"""
Transport Self-Test
Cross-checks the W1 solvers against each other and against brute force on
small random instances. Runs in seconds.
"""

import itertools

import numpy as np

from core.sde import philox_generator
from experiments.models import CheckResult, ValidationReport
from transport.exact import assignment_cost, w1_exact
from transport.gaussian import w_gaussian
from transport.measures import EmpiricalMeasure
from transport.checks import marginal_inequality_check
from transport.sinkhorn import DEFAULT_RELATIVE_EPSILON, w1_sinkhorn
from transport.sorted1d import w1_sorted_1d
from utils.error_handling import report_failures
from utils.logger import get_logger
from utils.metrics import track_performance

logger = get_logger(__name__)

SELFTEST_STREAM = 0x0775

BRUTE_FORCE_INSTANCES = 50
BRUTE_FORCE_MAX_N = 6
CIRCLE_INSTANCES = 20
CIRCLE_N = 64
CIRCLE_TOL = 1e-12
INEQUALITY_INSTANCES = 20
INEQUALITY_N = 128
SINKHORN_N = 256
SINKHORN_RTOL = 0.05


def _random_phase(rng: np.random.Generator, n: int, d: int) -> EmpiricalMeasure:
    return EmpiricalMeasure.phase(rng.random((n, d)), rng.standard_normal((n, d)))


@report_failures("assignment vs brute force")
def check_brute_force(seed: int) -> CheckResult:
    rng = philox_generator(seed, SELFTEST_STREAM, 1)
    worst = 0.0
    for _ in range(BRUTE_FORCE_INSTANCES):
        n = int(rng.integers(1, BRUTE_FORCE_MAX_N + 1))
        d = int(rng.integers(1, 3))
        mu, nu = _random_phase(rng, n, d), _random_phase(rng, n, d)
        cost = mu.cost_matrix(nu)
        brute = min(assignment_cost(cost, p) for p in itertools.permutations(range(n)))
        exact = w1_exact(mu, nu)
        # the solver's permutation is one of the enumerated ones
        worst = max(worst, abs(assignment_cost(cost, exact.permutation) - brute))
    return CheckResult(
        "assignment vs brute force",
        worst == 0.0,
        f"{BRUTE_FORCE_INSTANCES} instances, n <= {BRUTE_FORCE_MAX_N}",
        worst,
        0.0,
    )


@report_failures("circle matching vs assignment")
def check_circle_matching(seed: int) -> CheckResult:
    rng = philox_generator(seed, SELFTEST_STREAM, 2)
    worst = 0.0
    for i in range(CIRCLE_INSTANCES):
        # half the instances clustered near the wrap point
        if i % 2:
            a = np.mod(0.1 * rng.standard_normal(CIRCLE_N), 1.0)
            b = np.mod(0.5 + 0.3 * rng.random(CIRCLE_N), 1.0)
        else:
            a, b = rng.random(CIRCLE_N), rng.random(CIRCLE_N)
        mu, nu = EmpiricalMeasure.positions(a), EmpiricalMeasure.positions(b)
        worst = max(worst, abs(w1_sorted_1d(mu, nu).value - w1_exact(mu, nu).value))
    return CheckResult(
        "circle matching vs assignment",
        worst <= CIRCLE_TOL,
        f"{CIRCLE_INSTANCES} instances, n = {CIRCLE_N}",
        worst,
        CIRCLE_TOL,
    )


@report_failures("marginal inequality")
def check_marginal_inequality(seed: int) -> CheckResult:
    rng = philox_generator(seed, SELFTEST_STREAM, 3)
    tightest = np.inf
    for _ in range(INEQUALITY_INSTANCES):
        d = int(rng.integers(1, 3))
        w_marginal, w_joint = marginal_inequality_check(
            _random_phase(rng, INEQUALITY_N, d), _random_phase(rng, INEQUALITY_N, d)
        )
        tightest = min(tightest, w_joint - w_marginal)
    return CheckResult(
        "marginal inequality",
        True,
        f"{INEQUALITY_INSTANCES} pairs, smallest gap {tightest:.3g}",
        float(tightest),
        0.0,
    )


@report_failures("sinkhorn vs assignment")
def check_sinkhorn(seed: int) -> CheckResult:
    rng = philox_generator(seed, SELFTEST_STREAM, 4)
    mu = _random_phase(rng, SINKHORN_N, 1)
    base = _random_phase(rng, SINKHORN_N, 1)
    nu = EmpiricalMeasure.phase(base.x, base.y + 1.0)
    exact = w1_exact(mu, nu).value
    approx = w1_sinkhorn(mu, nu, epsilon=DEFAULT_RELATIVE_EPSILON, relative=True)
    rel = abs(approx.value - exact) / exact
    return CheckResult(
        "sinkhorn vs assignment",
        rel <= SINKHORN_RTOL,
        f"sinkhorn {approx.value:.6g} vs exact {exact:.6g} after {approx.iterations} iterations",
        rel,
        SINKHORN_RTOL,
    )


@report_failures("gaussian closed form")
def check_gaussian_identities() -> CheckResult:
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    shift = np.array([3.0, -4.0])
    cases = [
        (w_gaussian(np.zeros(2), cov, np.zeros(2), cov), 0.0),
        (w_gaussian(np.zeros(2), cov, shift, cov), 5.0),
        # 1D: |m1 - m2|² + (s1 - s2)²
        (w_gaussian([1.0], [[4.0]], [0.0], [[1.0]]), np.sqrt(2.0)),
    ]
    worst = max(abs(got - want) for got, want in cases)
    return CheckResult("gaussian closed form", worst <= 1e-8, f"{len(cases)} identities", worst, 1e-8)


@track_performance("ot_selftest")
def ot_selftest(seed: int) -> ValidationReport:
    """Solver cross-checks: brute force, circle matching, marginal inequality, Sinkhorn, Gaussians."""
    report = ValidationReport("ot-selftest")
    report.add(check_brute_force(seed))
    report.add(check_circle_matching(seed))
    report.add(check_marginal_inequality(seed))
    report.add(check_sinkhorn(seed))
    report.add(check_gaussian_identities())
    for check in report.failures:
        logger.warning(f"Self-test failed: {check.name}: {check.detail}")
    return report
