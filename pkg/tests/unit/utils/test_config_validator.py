import unittest

import pytest

from config.config import reload_config
from config.experiment import parse_experiment
from utils.config_validator import ConfigValidator, validate_config


def validator(data, command, out_dir=None):
    v = ConfigValidator(parse_experiment(data), command, out_dir)
    v.validate_all()
    return v


class TestConfigValidator(unittest.TestCase):
    def test_clean_config(self):
        data = {"model": {"kind": "constant", "eta": [1.0]}, "gammas": [2, 4, 8], "n": 256}
        v = validator(data, "validate-homogeneous")
        self.assertEqual(v.get_summary(), {"errors": [], "warnings": []})

    def test_model_kind_must_match_command(self):
        v = validator({"model": {"kind": "mixed"}}, "validate-homogeneous")
        self.assertEqual(len(v.errors), 1)
        v = validator({"model": {"kind": "constant", "eta": [1.0]}}, "validate-equilibrium")
        self.assertIn("gradient", v.errors[0])

    def test_rate_warnings(self):
        v = validator({"gammas": [2.0, 4.0], "n": 64}, "rate-sweep")
        self.assertEqual(v.errors, [])
        self.assertEqual(len(v.warnings), 2)

    def test_small_gamma_rejected_for_rate_commands(self):
        for command in ("rate-sweep", "coupling-diagnostics"):
            v = validator({"gammas": [0.5, 1.0, 4.0], "n": 64, "repetitions": 2}, command)
            small = [e for e in v.errors if "gamma >=" in e]
            self.assertEqual(len(small), 1)
            self.assertIn("[0.5, 1.0]", small[0])

    def test_small_gamma_allowed_for_sampling(self):
        v = validator({"gammas": [0.5, 1.0], "n": 64}, "simulate")
        self.assertEqual(v.errors, [])

    def test_misaligned_coupling_bins(self):
        v = validator({"coupling": {"t": 1.0, "delta": 0.03}, "gammas": [2, 4, 8]}, "coupling-diagnostics")
        self.assertEqual(len(v.errors), 3)
        summary = validate_config(parse_experiment({"coupling": {"delta": 0.03}}), "coupling-diagnostics")
        self.assertTrue(summary["errors"])

    def test_coupling_bins_ignored_elsewhere(self):
        v = validator({"coupling": {"t": 1.0, "delta": 0.03}}, "simulate")
        self.assertEqual(v.errors, [])

    def test_chain_warning(self):
        v = validator(
            {"n": 4, "integrator": {"provenance": "single-long-trajectory-thinned", "chains": 8}},
            "simulate",
        )
        self.assertEqual(len(v.warnings), 1)


def test_assignment_above_budget(monkeypatch):
    monkeypatch.setenv("KRAMERS_EXACT_MAX_N", "100")
    reload_config()
    v = validator({"n": 200, "ot_method": "assignment"}, "simulate")
    assert len(v.errors) == 1
    v = validator({"n": 200, "gammas": [2, 4, 8], "repetitions": 2}, "rate-sweep")
    assert v.errors == [] and any("sinkhorn" in w for w in v.warnings)


def test_output_directory_created(tmp_path):
    out = tmp_path / "nested" / "results"
    assert validate_config(parse_experiment({}), "simulate", out)["errors"] == []
    assert out.is_dir()


def test_output_directory_blocked_by_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    v = validator({}, "simulate", blocker / "results")
    assert len(v.errors) == 1
