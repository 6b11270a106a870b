import unittest

import numpy as np
import pytest
from scipy.special import i0, i1

from core.model import DiffusionMatrix, TrigPolynomial, constant_model, gradient_model
from core.sampling import (
    Provenance,
    SamplingConfig,
    Verdict,
    independence_diagnostic,
    load_sample,
    moment_check,
    sample_mu_gamma,
    sample_mu_O,
    sample_mu_O_tensor_gauss,
    save_sample,
    second_moment_bound,
    velocity_moments,
)
from transport.exact import w1_exact
from transport.measures import EmpiricalMeasure, Space


def fast_config(**overrides):
    base = dict(h0=0.01, burn_time=2.0, overdamped_h=0.01, overdamped_burn_time=1.0, batch=64)
    base.update(overrides)
    return SamplingConfig(**base)


class TestSamplingConfig(unittest.TestCase):
    def test_burn_in_rule(self):
        cfg = SamplingConfig()
        self.assertEqual(cfg.kinetic_burn_time(1.0), 10.0)
        self.assertEqual(cfg.kinetic_burn_time(0.5), 20.0)
        self.assertEqual(cfg.kinetic_burn_time(20.0), 40.0)
        self.assertEqual(SamplingConfig(burn_time=3.0).kinetic_burn_time(20.0), 3.0)

    def test_stride(self):
        # e^{-γ·stride·h} <= 0.2 with h = 1e-3
        self.assertEqual(SamplingConfig().kinetic_stride(4.0), 403)

    def test_defaults(self):
        cfg = SamplingConfig()
        self.assertEqual(cfg.provenance, Provenance.REPLICAS)


class TestKineticSampling(unittest.TestCase):
    def setUp(self):
        self.m = constant_model([2.0], DiffusionMatrix.identity(1), 4.0)

    def test_replicas_are_thread_independent(self):
        cfg = fast_config()
        a = sample_mu_gamma(self.m, 200, cfg, seed=3, threads=1)
        b = sample_mu_gamma(self.m, 200, cfg, seed=3, threads=3)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)
        self.assertEqual(a.n, 200)
        self.assertEqual(a.ess, 200.0)
        self.assertEqual(a.provenance, Provenance.REPLICAS)

    def test_streams_differ(self):
        cfg = fast_config()
        a = sample_mu_gamma(self.m, 50, cfg, seed=3, stream=(1,))
        b = sample_mu_gamma(self.m, 50, cfg, seed=3, stream=(2,))
        self.assertFalse(np.allclose(a.y, b.y))

    def test_velocity_law_for_constant_force(self):
        sample = sample_mu_gamma(self.m, 2000, fast_config(), seed=11)
        moments = velocity_moments(sample, n_resamples=50)
        self.assertAlmostEqual(moments["mean"][0], 0.5, delta=0.1)
        self.assertAlmostEqual(moments["cov"][0, 0], 1.0, delta=0.1)
        self.assertGreater(moments["mean_se"][0], 0.0)

    def test_trajectory_provenance(self):
        cfg = fast_config(provenance=Provenance.TRAJECTORY, chains=4)
        sample = sample_mu_gamma(self.m, 100, cfg, seed=2)
        self.assertEqual(sample.x.shape, (100, 1))
        self.assertLessEqual(sample.ess, 100)
        self.assertIn("stride", sample.diagnostics)

    def test_rejects_empty(self):
        with self.assertRaises(ValueError):
            sample_mu_gamma(self.m, 0, fast_config())


class TestOverdampedSampling(unittest.TestCase):
    def setUp(self):
        self.m = constant_model([1.0, 0.0], DiffusionMatrix.identity(2), 4.0)

    def test_positions_on_torus(self):
        sample = sample_mu_O(self.m, 300, fast_config(), seed=1)
        self.assertEqual(sample.measure.space, Space.POSITION)
        self.assertTrue(np.all((sample.x >= 0) & (sample.x < 1)))
        np.testing.assert_allclose(sample.x.mean(axis=0), 0.5, atol=0.08)

    def test_trajectory_provenance(self):
        cfg = fast_config(provenance=Provenance.TRAJECTORY, chains=3, overdamped_stride_time=0.1)
        sample = sample_mu_O(self.m, 30, cfg, seed=1)
        self.assertEqual(sample.n, 30)
        self.assertIn("lag1_position", sample.diagnostics)

    def test_tensor_target(self):
        sample = sample_mu_O_tensor_gauss(self.m, 500, fast_config(), seed=4)
        self.assertEqual(sample.measure.space, Space.PHASE)
        np.testing.assert_allclose(np.var(sample.y, axis=0), 1.0, atol=0.2)
        self.assertEqual(independence_diagnostic(sample).verdict, Verdict.INDEPENDENT)


class TestDiagnostics(unittest.TestCase):
    def test_dependent_cloud(self):
        rng = np.random.default_rng(0)
        x = rng.random((1000, 1))
        y = np.sin(2 * np.pi * x) + 0.1 * rng.standard_normal((1000, 1))
        report = independence_diagnostic(EmpiricalMeasure.phase(x, y))
        self.assertEqual(report.statistics.shape, (2, 1))
        self.assertEqual(report.verdict, Verdict.DEPENDENT)
        self.assertEqual(report.dependence_verdict(), Verdict.DEPENDENT)

    def test_inconclusive_when_not_detected(self):
        rng = np.random.default_rng(1)
        cloud = EmpiricalMeasure.phase(rng.random((400, 1)), rng.standard_normal((400, 1)))
        report = independence_diagnostic(cloud)
        self.assertAlmostEqual(report.threshold, 0.15)
        self.assertEqual(report.dependence_verdict(), Verdict.INCONCLUSIVE)

    def test_needs_phase_sample(self):
        with self.assertRaises(ValueError):
            independence_diagnostic(EmpiricalMeasure.positions(np.zeros((5, 1))))

    def test_second_moment_bound(self):
        m = constant_model([2.0], DiffusionMatrix.identity(1), 4.0)
        self.assertAlmostEqual(second_moment_bound(m), 2.25)
        sample = sample_mu_gamma(m, 500, fast_config(), seed=8)
        report = moment_check(sample, m, n_resamples=50)
        self.assertTrue(report.passed)
        self.assertGreater(report.se, 0.0)


@pytest.mark.parametrize("suffix", [".csv", ".npy"])
def test_saved_sample_loads_back(tmp_path, suffix):
    rng = np.random.default_rng(2)
    cloud = EmpiricalMeasure.phase(rng.random((12, 2)), rng.standard_normal((12, 2)))
    path = save_sample(cloud, tmp_path / "samples" / f"cloud{suffix}")
    loaded = load_sample(path, Space.PHASE)
    np.testing.assert_array_equal(loaded.x, cloud.x)
    np.testing.assert_array_equal(loaded.y, cloud.y)


@pytest.mark.slow
def test_default_burn_in_reaches_gibbs_law():
    # starts from uniform positions, where E cos 2πx = 0
    U = TrigPolynomial.from_terms([{"k": 1, "cos": 1.0}], 1)
    m = gradient_model(U, DiffusionMatrix.identity(1), 4.0)
    cfg = SamplingConfig()
    assert cfg.kinetic_burn_time(4.0) == 10.0
    sample = sample_mu_gamma(m, 2000, cfg, seed=21, threads=2)
    cos_x = np.cos(2 * np.pi * sample.x[:, 0])
    gibbs_mean = -i1(1.0) / i0(1.0)
    se = cos_x.std(ddof=1) / np.sqrt(sample.n)
    assert abs(cos_x.mean() - gibbs_mean) < 4 * se
    y2 = sample.y[:, 0] ** 2
    assert abs(y2.mean() - 1.0) < 4 * y2.std(ddof=1) / np.sqrt(sample.n)


@pytest.mark.slow
def test_thinned_trajectory_agrees_with_replicas():
    m = constant_model([1.0], DiffusionMatrix.identity(1), 4.0)
    n = 512
    replicas = sample_mu_gamma(m, n, SamplingConfig(burn_time=2.0), seed=6, stream=(1,))
    baseline = sample_mu_gamma(m, n, SamplingConfig(burn_time=2.0), seed=6, stream=(2,))
    thinned = sample_mu_gamma(
        m, n, SamplingConfig(burn_time=2.0, provenance=Provenance.TRAJECTORY), seed=6, stream=(3,)
    )
    floor = w1_exact(replicas.measure, baseline.measure).value
    gap = w1_exact(thinned.measure, replicas.measure).value
    assert gap < 2.0 * floor + 0.05
