import unittest

import numpy as np
import pytest

from config.experiment import ExperimentConfig, ModelKind, load_experiment, parse_experiment
from core.model import ForceKind
from core.sampling import Provenance
from utils.error_handling import ConfigError


class TestParseExperiment(unittest.TestCase):
    def test_defaults(self):
        cfg = parse_experiment({})
        self.assertEqual(cfg.name, "experiment")
        self.assertEqual(cfg.model.kind, ModelKind.MIXED)
        self.assertEqual(cfg.gammas, [2.0, 4.0, 8.0, 16.0])
        self.assertIsNone(cfg.seed)

    def test_unknown_keys_are_rejected_at_every_level(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_experiment({"gamma": [2.0], "model": {"kind": "constant", "etaa": [1.0]}})
        joined = "\n".join(ctx.exception.errors)
        self.assertIn("gamma", joined)
        self.assertIn("model.etaa", joined)

    def test_gammas_sorted_and_validated(self):
        self.assertEqual(parse_experiment({"gammas": [8, 2, 4]}).gammas, [2.0, 4.0, 8.0])
        for bad in ([], [2.0, -1.0], [2.0, 2.0]):
            with self.assertRaises(ConfigError):
                parse_experiment({"gammas": bad})

    def test_enum_values(self):
        cfg = parse_experiment(
            {"ot_method": "sinkhorn", "integrator": {"provenance": "single-long-trajectory-thinned"}}
        )
        self.assertEqual(cfg.integrator.provenance, Provenance.TRAJECTORY)
        with self.assertRaises(ConfigError):
            parse_experiment({"ot_method": "simplex"})

    def test_config_hash(self):
        a = parse_experiment({"gammas": [4, 2], "n": 128})
        b = parse_experiment({"n": 128, "gammas": [2, 4]})
        c = parse_experiment({"n": 256, "gammas": [2, 4]})
        self.assertEqual(a.config_hash(), b.config_hash())
        self.assertNotEqual(a.config_hash(), c.config_hash())
        self.assertEqual(len(a.config_hash()), 64)


class TestModelBlock(unittest.TestCase):
    def test_each_kind_builds(self):
        blocks = {
            "gradient": {"kind": "gradient", "potential": [{"k": 1, "cos": 1.0}]},
            "constant": {"kind": "constant", "eta": [1.0]},
            "mixed": {"kind": "mixed", "potential": [{"k": 1, "cos": 1.0}], "eta": [1.0], "tau": 0.5},
            "decoupled": {
                "kind": "decoupled", "dimension": 2, "eta": [1.0, 0.0],
                "potential": [{"k": [0, 1], "cos": 1.0}],
            },
            "oscillator_chain": {
                "kind": "oscillator_chain", "dimension": 2, "sigma": [1.0, 2.0],
                "potential": [{"k": [1, -1], "cos": 1.0}],
            },
        }
        for kind, block in blocks.items():
            m = parse_experiment({"model": block}).model_at(4.0)
            self.assertEqual(m.gamma, 4.0, kind)
        mixed = parse_experiment({"model": blocks["mixed"]}).model_at(2.0)
        self.assertEqual(mixed.force.kind, ForceKind.MIXED)
        np.testing.assert_allclose(mixed.force(np.array([[0.25]])), [[2 * np.pi + 1.5]])

    def test_rotation_perturbation(self):
        cfg = parse_experiment({
            "model": {
                "kind": "mixed", "dimension": 2, "tau": 1.0,
                "perturbation": [{"k": [1, 0], "sin": 1.0}],
            }
        })
        F = cfg.model_at(1.0).force(np.array([[0.0, 0.0]]))
        # J∇V with J the rotation of the first two axes
        np.testing.assert_allclose(F, [[0.0, 2 * np.pi]], atol=1e-12)

    def test_supplied_force_bound(self):
        cfg = parse_experiment({"model": {"kind": "constant", "eta": [1.0], "force_bound": 5.0}})
        self.assertEqual(cfg.model_at(2.0).force.sup_norm, 5.0)

    def test_eta_length_checked_at_build(self):
        cfg = parse_experiment({"model": {"kind": "constant", "dimension": 2, "eta": [1.0]}})
        with self.assertRaises(ValueError):
            cfg.model_at(2.0)


class TestDerivedConfigs(unittest.TestCase):
    def test_sampling_batch_fallback(self):
        cfg = parse_experiment({"integrator": {"h0": 0.01}})
        self.assertEqual(cfg.sampling_config(batch=64).batch, 64)
        self.assertEqual(parse_experiment({"integrator": {"batch": 8}}).sampling_config(64).batch, 8)

    def test_coupling_alignment(self):
        cfg = parse_experiment({"coupling": {"t": 1.0, "delta": 0.03}})
        with self.assertRaises(ValueError):
            cfg.coupling_config(4.0, batch=64)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "missing.yaml")


def test_load_rejects_non_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_experiment(path)


def test_load_rejects_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("model: {kind: constant\n")
    with pytest.raises(ConfigError):
        load_experiment(path)


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_experiment(path) == ExperimentConfig()


@pytest.mark.parametrize(
    "name", ["homogeneous", "equilibrium", "rate", "coupling", "pathwise", "moments"]
)
def test_shipped_configs_load_and_build(config_dir, name):
    cfg = load_experiment(config_dir / f"{name}.yaml")
    assert cfg.name == name
    for gamma in cfg.gammas:
        assert cfg.model_at(gamma).gamma == gamma
