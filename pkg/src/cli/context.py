"""
Run Context
Global CLI options resolved against the experiment file and the runtime
settings: flag first, then config file, then environment default.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import typer

from config.config import get_config
from config.experiment import ExperimentConfig, load_experiment
from experiments.models import ValidationReport
from experiments.reporting import output_path, write_manifest
from utils.config_validator import validate_config
from utils.error_handling import ConfigError

from .ui import print_error, print_info, print_warning


@dataclass
class RunContext:
    config_path: Optional[Path] = None
    seed: Optional[int] = None
    out_dir: Optional[Path] = None
    threads: Optional[int] = None

    def load(self, command: str) -> ExperimentConfig:
        """Load and semantically validate the experiment for `command`; exit 2 on bad config."""
        if self.config_path is None:
            print_error(f"{command} needs an experiment file: pass --config PATH")
            raise typer.Exit(code=2)
        try:
            cfg = load_experiment(self.config_path)
        except ConfigError as e:
            print_error(str(e))
            for err in e.errors:
                print_error(f"  {err}")
            raise typer.Exit(code=2)

        summary = validate_config(cfg, command, self.output_dir(cfg))
        for warning in summary["warnings"]:
            print_warning(warning)
        if summary["errors"]:
            for err in summary["errors"]:
                print_error(err)
            raise typer.Exit(code=2)
        return cfg

    def resolve_seed(self, cfg: Optional[ExperimentConfig] = None) -> int:
        if self.seed is not None:
            return self.seed
        if cfg is not None and cfg.seed is not None:
            return cfg.seed
        return get_config().runtime.default_seed

    def output_dir(self, cfg: Optional[ExperimentConfig] = None) -> Path:
        if self.out_dir is not None:
            return Path(self.out_dir)
        if cfg is not None and cfg.output.directory:
            return Path(cfg.output.directory)
        return Path(get_config().runtime.output_dir)

    def resolve_threads(self) -> int:
        return self.threads or get_config().runtime.threads

    @property
    def batch(self) -> int:
        return get_config().runtime.replica_batch

    def finish(
        self,
        cfg: ExperimentConfig,
        command: str,
        seed: int,
        outputs: List[Path],
        report: Optional[ValidationReport] = None,
        extra: Optional[dict] = None,
    ) -> None:
        """Write the manifest and exit 1 when any enabled validator failed."""
        passed = report.passed if report is not None else None
        manifest = output_path(self.output_dir(cfg), cfg, f"{command.replace('-', '_')}_manifest", ".json")
        write_manifest(manifest, cfg, command, seed, outputs, passed, extra)
        for path in outputs:
            print_info(f"Wrote {path}")
        print_info(f"Manifest {manifest}")
        if passed is False:
            raise typer.Exit(code=1)
