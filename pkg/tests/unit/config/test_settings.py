import pytest

from config.config import VERSION, get_config, reload_config


def test_defaults(tmp_path):
    cfg = get_config()
    assert cfg.runtime.threads == 4
    assert cfg.runtime.default_seed == 20240601
    assert cfg.solver.exact_max_n == 4096
    assert cfg.runtime.output_dir == str(tmp_path / "results")
    assert VERSION.count(".") == 2


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("KRAMERS_THREADS", "8")
    monkeypatch.setenv("KRAMERS_SINKHORN_TOL", "1e-6")
    cfg = reload_config()
    assert cfg.runtime.threads == 8
    assert cfg.solver.sinkhorn_tol == 1e-6


def test_invalid_environment_value(monkeypatch):
    monkeypatch.setenv("KRAMERS_THREADS", "0")
    with pytest.raises(ValueError):
        reload_config()
    monkeypatch.delenv("KRAMERS_THREADS")
