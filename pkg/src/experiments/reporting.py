"""
Result Emission
Fixed-column CSV files (byte-identical for identical inputs) and a JSON
run manifest with the config hash, seed, package versions and timings.
"""

import json
import platform
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from config.config import VERSION
from config.experiment import ExperimentConfig
from utils.logger import get_logger
from utils.metrics import get_metrics

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"

_TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "pyyaml")


def write_csv(
    rows: Iterable[Dict],
    path: Union[str, Path],
    columns: Sequence[str],
    sort_by: Optional[Sequence[str]] = None,
) -> Path:
    """Write rows with a header and exactly `columns`, in that order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows))
    for col in columns:
        if col not in frame.columns:
            frame[col] = float("nan")
    frame = frame[list(columns)]
    if sort_by:
        frame = frame.sort_values(list(sort_by), kind="stable")
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def package_versions() -> Dict[str, str]:
    versions = {"kramers": VERSION, "python": platform.python_version()}
    for name in _TRACKED_PACKAGES:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(
    path: Union[str, Path],
    cfg: ExperimentConfig,
    command: str,
    seed: int,
    outputs: List[Union[str, Path]],
    passed: Optional[bool] = None,
    extra: Optional[Dict] = None,
) -> Path:
    """JSON manifest next to the CSV outputs; timings live here, never in CSVs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "experiment": cfg.name,
        "config_hash": cfg.config_hash(),
        "config": cfg.model_dump(mode="json"),
        "seed": seed,
        "versions": package_versions(),
        "outputs": [str(Path(p).name) for p in outputs],
        "passed": passed,
        "timings": get_metrics().get_all_stats(),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, default=str), encoding="utf-8")
    logger.info(f"Wrote run manifest {path}")
    return path


def output_path(out_dir: Union[str, Path], cfg: ExperimentConfig, stem: str, suffix: str = ".csv") -> Path:
    prefix = f"{cfg.output.prefix}_" if cfg.output.prefix else ""
    return Path(out_dir) / f"{prefix}{cfg.name}_{stem}{suffix}"
