import math

import numpy as np
import pytest

from core.sampling import Provenance, Verdict, load_sample
from experiments import simulate as simulate_module
from experiments.simulate import SAMPLE_COLUMNS, _product_law_expected, simulate
from transport.measures import EmpiricalMeasure, Space
from utils.error_handling import SampleRoundTripError

TILTED = {
    "kind": "mixed",
    "dimension": 1,
    "sigma": 1.0,
    "potential": [{"k": 1, "cos": 1.0}],
    "eta": [1.0],
}


def test_rows_per_law(make_experiment):
    cfg = make_experiment(n=64, gammas=[2.0, 4.0])
    result = simulate(cfg, seed=5, batch=32)
    assert [r["law"] for r in result.rows] == ["overdamped_x_gauss", "kinetic", "kinetic"]
    assert math.isnan(result.rows[0]["gamma"])
    assert all(set(r) == set(SAMPLE_COLUMNS) for r in result.rows)
    assert result.rows[1]["provenance"] == Provenance.REPLICAS.value
    assert result.files == []


def test_saves_samples(make_experiment, tmp_path):
    cfg = make_experiment(n=16, gammas=[2.0], output={"save_samples": True, "sample_format": "npy"})
    result = simulate(cfg, seed=5, batch=16, sample_dir=tmp_path / "samples")
    assert sorted(p.name for p in result.files) == ["test_gamma_2.npy", "test_overdamped.npy"]
    loaded = load_sample(tmp_path / "samples" / "test_gamma_2.npy", Space.PHASE)
    assert loaded.n == 16


def test_csv_samples_read_back_exactly(make_experiment, tmp_path):
    cfg = make_experiment(n=16, gammas=[4.0], output={"save_samples": True, "sample_format": "csv"})
    result = simulate(cfg, seed=5, batch=16, sample_dir=tmp_path / "samples")
    loaded = load_sample(tmp_path / "samples" / "test_gamma_4.csv", Space.PHASE)
    np.testing.assert_array_equal(loaded.y, result.samples["gamma_4"].y)


def test_corrupted_save_is_reported(make_experiment, tmp_path, monkeypatch):
    cfg = make_experiment(n=16, gammas=[2.0], output={"save_samples": True, "sample_format": "npy"})
    monkeypatch.setattr(
        simulate_module,
        "load_sample",
        lambda path, space: EmpiricalMeasure.phase(np.zeros((16, 1)), np.zeros((16, 1))),
    )
    with pytest.raises(SampleRoundTripError):
        simulate(cfg, seed=5, batch=16, sample_dir=tmp_path / "samples")


def test_product_law_detection(make_experiment):
    assert _product_law_expected(make_experiment().model_at(2.0))
    gradient = {"kind": "gradient", "dimension": 1, "sigma": 1.0, "potential": [{"k": 1, "cos": 1.0}]}
    assert _product_law_expected(make_experiment(model=gradient).model_at(2.0))
    assert not _product_law_expected(make_experiment(model=TILTED).model_at(2.0))


def test_independence_verdict_per_law(make_experiment):
    result = simulate(make_experiment(model=TILTED, gammas=[2.0]), seed=5, batch=32)
    target, kinetic = result.rows
    # the target is a tensor product by construction
    assert target["independence"] in {Verdict.INDEPENDENT.value, Verdict.DEPENDENT.value}
    assert kinetic["independence"] in {Verdict.DEPENDENT.value, Verdict.INCONCLUSIVE.value}
