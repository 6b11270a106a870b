"""
End-to-end runs on tiny experiments: rate sweep determinism and the
constant-force validator.
"""

import numpy as np
import pytest

from experiments.models import RATE_COLUMNS
from experiments.reporting import write_csv
from experiments.sweep import rate_rows, run_rate_sweep
from experiments.validators import validate_homogeneous


def _sweep_csv(cfg, threads, batch, path):
    result = run_rate_sweep(cfg, seed=19, threads=threads, batch=batch)
    return write_csv(rate_rows(result), path, RATE_COLUMNS, sort_by=["gamma"]).read_bytes()


@pytest.mark.slow
def test_rate_csv_identical_across_threads(make_experiment, tmp_path):
    cfg = make_experiment(repetitions=2)
    one = _sweep_csv(cfg, 1, 512, tmp_path / "a.csv")
    four = _sweep_csv(cfg, 4, 512, tmp_path / "b.csv")
    assert one == four


def test_rate_sweep_rows_sorted_and_finite(make_experiment):
    cfg = make_experiment(gammas=[8.0, 2.0, 4.0])
    result = run_rate_sweep(cfg, seed=19, threads=2)
    gammas = [row.gamma for row in result.rows]
    assert gammas == sorted(gammas)
    for row in result.rows:
        assert np.isfinite(row.w_joint)
        assert row.w_joint >= 0.0
        assert row.bias_floor >= 0.0
        assert row.analytic == 1.0 / row.gamma


def test_homogeneous_validation_small(make_experiment):
    cfg = make_experiment(gammas=[4.0], n=512)
    report = validate_homogeneous(cfg, seed=23, threads=2, batch=128, ks_level=1e-4)
    assert len(report.checks) == 6
    assert all(c.name.endswith("[gamma=4.0]") for c in report.checks)
    assert len({c.name for c in report.checks}) == 6


def test_homogeneous_validation_refuses_gradient_model(make_experiment):
    cfg = make_experiment(
        model={"kind": "gradient", "dimension": 1, "sigma": 1.0, "potential": [{"k": 1, "cos": 1.0}]}
    )
    report = validate_homogeneous(cfg, seed=23)
    assert not report.passed
    assert [c.name for c in report.checks] == ["model"]
