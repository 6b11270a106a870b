import json
import math

import pandas as pd

from config.experiment import parse_experiment
from experiments.reporting import output_path, package_versions, write_csv, write_manifest
from utils.metrics import Timer, get_metrics


def test_csv_has_fixed_columns(tmp_path):
    rows = [{"gamma": 4.0, "w": 0.1, "extra": "dropped"}, {"gamma": 2.0, "w": 1 / 3}]
    path = write_csv(rows, tmp_path / "out.csv", ["gamma", "w", "se"], sort_by=["gamma"])
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["gamma", "w", "se"]
    assert frame["gamma"].tolist() == [2.0, 4.0]
    assert math.isnan(frame["se"][0])
    assert path.read_text().splitlines()[1] == "2,0.3333333333,"


def test_csv_is_byte_identical(tmp_path):
    rows = [{"gamma": g, "w": 1.0 / g} for g in (2.0, 4.0, 8.0)]
    a = write_csv(rows, tmp_path / "a.csv", ["gamma", "w"])
    b = write_csv(list(rows), tmp_path / "b.csv", ["gamma", "w"])
    assert a.read_bytes() == b.read_bytes()


def test_manifest(tmp_path):
    cfg = parse_experiment({"name": "demo", "seed": 3})
    get_metrics().reset()
    with Timer("stage"):
        pass
    path = write_manifest(
        tmp_path / "demo_manifest.json", cfg, "rate-sweep", 3, [tmp_path / "demo_rate.csv"], True,
        extra={"slope": -1.0},
    )
    manifest = json.loads(path.read_text())
    assert manifest["config_hash"] == cfg.config_hash()
    assert manifest["outputs"] == ["demo_rate.csv"]
    assert manifest["passed"] is True
    assert manifest["slope"] == -1.0
    assert manifest["timings"]["stage"]["count"] == 1
    assert "numpy" in manifest["versions"]


def test_versions_include_self():
    assert "kramers" in package_versions()


def test_output_path_prefix(tmp_path):
    cfg = parse_experiment({"name": "rate", "output": {"prefix": "run1"}})
    assert output_path(tmp_path, cfg, "fit").name == "run1_rate_fit.csv"
    plain = parse_experiment({"name": "rate"})
    assert output_path(tmp_path, plain, "manifest", ".json").name == "rate_manifest.json"
