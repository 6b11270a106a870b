import pytest
from pathlib import Path
import shutil
import tempfile
import sys

# Ensure src is in python path
sys.path.append(str(Path(__file__).parent.parent / "src"))

CONFIG_DIR = Path(__file__).parent.parent / "docs" / "configs"


@pytest.fixture
def temp_workspace():
    """Create a temporary workspace directory"""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Runtime settings from defaults only; outputs land in a temp dir"""
    import config.config as settings
    from utils.logger import KramersLogger

    for var in (
        "KRAMERS_LOG_LEVEL",
        "KRAMERS_LOG_FILE",
        "KRAMERS_THREADS",
        "KRAMERS_SEED",
        "KRAMERS_EXACT_MAX_N",
        "KRAMERS_REPLICA_BATCH",
        "KRAMERS_SINKHORN_MAX_ITER",
        "KRAMERS_SINKHORN_TOL",
        "KRAMERS_BOOTSTRAP_RESAMPLES",
    ):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("KRAMERS_OUTPUT_DIR", str(tmp_path / "results"))
    settings.reload_config()
    yield
    settings.reload_config()
    # the CLI rebinds the console handler to the runner's stream
    KramersLogger.configure()


@pytest.fixture
def config_dir():
    """Directory with the shipped experiment files"""
    return CONFIG_DIR


@pytest.fixture
def make_experiment():
    """Factory for small experiment configs; keyword overrides go to the top level"""
    from config.experiment import parse_experiment

    def _make(model=None, **overrides):
        data = {
            "name": "test",
            "model": model or {"kind": "constant", "dimension": 1, "sigma": 1.0, "eta": [1.0]},
            "gammas": [2.0, 4.0, 8.0],
            "n": 64,
            "seed": 7,
            "integrator": {"burn_time": 2.0, "batch": 32},
            "overdamped": {"h": 1e-3, "burn_time": 2.0},
        }
        data.update(overrides)
        return parse_experiment(data, "<test>")

    return _make
