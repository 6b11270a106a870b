import math
import unittest

import numpy as np
import pytest

from core.coupling import (
    A_covariance,
    CouplingConfig,
    accumulate_A,
    constant_force_term,
    gaussian_tail_bound,
    h_weight,
    integrate_reference,
    integrate_W,
    pathwise_identity_residual,
    run_coupling,
)
from core.model import DiffusionMatrix, TrigPolynomial, constant_model, gradient_model
from core.sde import NoisePath
from utils.error_handling import MisalignedBinsError, NotApplicableError


class TestCouplingConfig(unittest.TestCase):
    def test_microstep_rule(self):
        cc = CouplingConfig(gamma=4.0, t=1.0, delta=0.01)
        self.assertEqual(cc.n_bins, 100)
        self.assertEqual(cc.steps_per_bin, 40)
        self.assertAlmostEqual(cc.h, 1e-3)
        self.assertEqual(cc.n_micro, 4000)

    def test_step_is_exact_divisor_of_bin(self):
        cc = CouplingConfig(gamma=7.0, t=0.5, delta=0.05, h0=0.01)
        self.assertLessEqual(cc.h, 0.01 + 1e-15)
        self.assertAlmostEqual(cc.h * cc.steps_per_bin, cc.gamma * cc.delta)

    def test_delta_must_divide_t(self):
        with self.assertRaises(ValueError):
            CouplingConfig(gamma=4.0, t=1.0, delta=0.03)


class TestWeights(unittest.TestCase):
    def test_endpoints(self):
        gamma, t = 3.0, 0.2
        self.assertEqual(h_weight(0.0, t, gamma), 0.0)
        expected = (2 / gamma) / (1 + math.exp(-gamma**2 * t))
        self.assertAlmostEqual(h_weight(t, t, gamma), expected)

    def test_monotone_and_finite_for_large_gamma(self):
        s = np.linspace(0, 1, 11)
        w = h_weight(s, 1.0, 1e3)
        self.assertTrue(np.all(np.isfinite(w)))
        self.assertTrue(np.all(np.diff(w) >= 0))
        self.assertAlmostEqual(w[-1], 2e-3)

    def test_outside_interval(self):
        with self.assertRaises(ValueError):
            h_weight(1.5, 1.0, 2.0)

    def test_covariance_and_tail(self):
        sigma = DiffusionMatrix.from_spec([1.0, 2.0], 2)
        cov = A_covariance(sigma, 2.0, 0.25)
        np.testing.assert_allclose(cov, np.diag([1.0, 4.0]) * (1 - math.exp(-2.0)))
        self.assertAlmostEqual(gaussian_tail_bound(sigma, 50.0, 1.0), 0.0)
        self.assertGreater(gaussian_tail_bound(sigma, 1.0, 0.01), 0.0)


class TestAccumulator(unittest.TestCase):
    def test_variance_matches_covariance(self):
        gamma, h, k = 2.0, 0.01, 50
        sigma = DiffusionMatrix.identity(1)
        noise = NoisePath(4, (0,), h, k, batch=20000, d=1)
        A = accumulate_A(noise, gamma, h, sigma, expected_steps=k)
        target = A_covariance(sigma, gamma, h * k / gamma)[0, 0]
        self.assertAlmostEqual(float(np.var(A)), target, delta=0.03)

    def test_step_count_mismatch(self):
        noise = NoisePath(4, (0,), 0.01, 10, batch=2, d=1)
        with self.assertRaises(MisalignedBinsError):
            accumulate_A(noise, 2.0, 0.01, DiffusionMatrix.identity(1), expected_steps=11)

    def test_empty(self):
        np.testing.assert_array_equal(
            accumulate_A([], 2.0, 0.01, DiffusionMatrix.identity(3)), np.zeros(3)
        )


class TestPathwiseIdentity(unittest.TestCase):
    def test_constant_force_identity_is_exact(self):
        m = constant_model([1.5, -0.5], DiffusionMatrix.from_spec([1.0, 0.5], 2), 8.0)
        self.assertLess(pathwise_identity_residual(m, 1e-3, 500, 20, seed=3), 1e-10)

    def test_discrete_term_approaches_continuous(self):
        gamma, s, h = 4.0, 0.5, 1e-5
        k = int(round(gamma * s / h))
        np.testing.assert_allclose(
            constant_force_term([2.0], gamma, h, k),
            # continuous limit (η/γ)(1 - e^{-γ²s})
            [2.0 / gamma * -math.expm1(-gamma * gamma * s)],
            rtol=1e-6,
        )

    def test_requires_constant_force(self):
        m = gradient_model(
            TrigPolynomial.from_terms([{"k": 1, "cos": 1.0}], 1), DiffusionMatrix.identity(1), 2.0
        )
        with self.assertRaises(NotApplicableError):
            pathwise_identity_residual(m, 1e-3, 10, 2, seed=0)


class TestMacroscopicIntegration(unittest.TestCase):
    def test_zero_correction_matches_reference(self):
        m = constant_model([1.0], DiffusionMatrix.identity(1), 4.0)
        cc = CouplingConfig(gamma=4.0, t=0.1, delta=0.01)
        sums = NoisePath(1, (0,), cc.h, cc.n_micro, 3, 1).bin_sums(cc.steps_per_bin)
        x0 = np.full((3, 1), 0.5)
        w = integrate_W(m, cc, sums, np.zeros((3, 1)), x0)
        ref = integrate_reference(m, cc, sums, x0)
        self.assertEqual(w.shape, (11, 3, 1))
        np.testing.assert_allclose(w, ref)

    def test_bin_count_checked(self):
        m = constant_model([1.0], DiffusionMatrix.identity(1), 4.0)
        cc = CouplingConfig(gamma=4.0, t=0.1, delta=0.01)
        with self.assertRaises(MisalignedBinsError):
            integrate_reference(m, cc, np.zeros((5, 1, 1)), np.zeros((1, 1)))


@pytest.fixture
def small_ensemble_args():
    m = constant_model([1.0], DiffusionMatrix.identity(1), 4.0)
    cc = CouplingConfig(gamma=4.0, t=0.1, delta=0.01, replicas=64, batch=32)
    return m, cc


def test_run_coupling_is_thread_independent(small_ensemble_args):
    m, cc = small_ensemble_args
    one = run_coupling(m, cc, seed=5, threads=1)
    two = run_coupling(m, cc, seed=5, threads=2)
    assert len(one) == 64
    np.testing.assert_array_equal(one.W, two.W)
    np.testing.assert_array_equal(one.A, two.A)
    assert one.e1.shape == (64,)


def test_summary_respects_velocity_bound(small_ensemble_args):
    m, cc = small_ensemble_args
    summary = run_coupling(m, cc, seed=5).summary(n_resamples=50, seed=5)
    assert summary.e2_mean <= summary.e2_bound
    assert summary.corr_threshold == pytest.approx(3 / 8)
    row = summary.as_row()
    assert row["R"] == 64
    assert row["cov_A_target_trace"] == pytest.approx(1 - math.exp(-2 * 16 * 0.1))
    assert len(run_coupling(m, cc, seed=5).records()) == 64


def test_run_coupling_rejects_gamma_mismatch(small_ensemble_args):
    m, cc = small_ensemble_args
    with pytest.raises(ValueError):
        run_coupling(m.with_gamma(8.0), cc, seed=1)


class TestCouplingEnsembleStatistics(unittest.TestCase):
    def test_sample_covariance_of_A_matches_closed_form(self):
        sigma = DiffusionMatrix.from_spec([0.8, 1.3], 2)
        m = constant_model([1.0, 0.0], sigma, 4.0)
        # 2γ²t = 0.64, so A is far from its stationary covariance
        cc = CouplingConfig(gamma=4.0, t=0.02, delta=0.01, replicas=4000, batch=1000)
        summary = run_coupling(m, cc, seed=13).summary(n_resamples=100, seed=13)
        target = A_covariance(sigma, 4.0, 0.02)
        np.testing.assert_allclose(summary.cov_A_target, target)
        gap = np.abs(summary.cov_A - target)
        self.assertTrue(np.all(gap <= 4.0 * summary.cov_A_se + 1e-3), gap)
        np.testing.assert_allclose(np.diag(summary.cov_A), np.diag(target), rtol=0.1)

    def test_W_uncorrelated_with_A(self):
        m = gradient_model(
            TrigPolynomial.from_terms([{"k": 1, "cos": 1.0}], 1), DiffusionMatrix.identity(1), 4.0
        )
        cc = CouplingConfig(gamma=4.0, t=0.5, delta=0.05, replicas=1000, batch=500)
        summary = run_coupling(m, cc, seed=29).summary(n_resamples=50, seed=29)
        self.assertEqual(summary.corr_WA.shape, (2, 1))
        self.assertLessEqual(summary.max_abs_corr, summary.corr_threshold)


@pytest.mark.slow
def test_position_error_shrinks_with_gamma():
    U = TrigPolynomial.from_terms([{"k": 1, "cos": 1.0}], 1)
    e1 = {}
    for gamma in (4.0, 8.0):
        m = gradient_model(U, DiffusionMatrix.identity(1), gamma)
        cc = CouplingConfig(gamma=gamma, t=0.5, delta=0.05, replicas=500, batch=250)
        e1[gamma] = run_coupling(m, cc, seed=3).summary(n_resamples=50, seed=3).e1_mean
    assert e1[8.0] < e1[4.0]
