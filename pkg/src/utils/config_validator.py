"""
Experiment Config Validation
Semantic checks on a schema-valid experiment config, collected as errors
(run would be meaningless) and warnings (run is legal but weak).
"""

from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from config.config import get_config
from config.experiment import ExperimentConfig, ModelKind
from core.sampling import Provenance
from transport.measures import OTMethod
from utils.error_handling import MisalignedBinsError
from utils.logger import get_logger

logger = get_logger(__name__)

RATE_COMMANDS = ("rate-sweep", "coupling-diagnostics")
MIN_RATE_GAMMA = 2.0
MIN_FIT_POINTS = 3


class ConfigValidator:
    """Validates an experiment config for one CLI command"""

    def __init__(self, config: ExperimentConfig, command: str, out_dir: Optional[Path] = None):
        self.config = config
        self.command = command
        self.out_dir = out_dir
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def validate_all(self) -> bool:
        """Run all validation checks"""
        self.validate_gammas()
        self.validate_sample_size()
        self.validate_model_kind()
        self.validate_coupling()
        self.validate_sampling()
        self.validate_paths()

        if self.errors:
            logger.error(f"Configuration validation failed with {len(self.errors)} errors")
            for error in self.errors:
                logger.error(f"  - {error}")
            return False

        if self.warnings:
            logger.warning(f"Configuration has {len(self.warnings)} warnings")
            for warning in self.warnings:
                logger.warning(f"  - {warning}")

        logger.info("Configuration validation passed")
        return True

    def validate_gammas(self):
        if self.command not in RATE_COMMANDS:
            return
        gammas = self.config.gammas
        if len(gammas) < MIN_FIT_POINTS:
            self.warnings.append(
                f"{len(gammas)} gamma values given; a log-log slope needs at least {MIN_FIT_POINTS}"
            )
        small = [g for g in gammas if g < MIN_RATE_GAMMA]
        if small:
            self.errors.append(
                f"{self.command} needs gamma >= {MIN_RATE_GAMMA}; got {small}"
            )
        if self.command == "rate-sweep" and self.config.repetitions < 2:
            self.warnings.append("repetitions = 1: no slope confidence interval will be reported")

    def validate_sample_size(self):
        limit = get_config().solver.exact_max_n
        n = self.config.n
        method = self.config.ot_method
        if n <= limit:
            return
        if method == OTMethod.ASSIGNMENT:
            self.errors.append(f"n={n} exceeds the exact solver limit {limit}; use sinkhorn or auto")
        elif method == OTMethod.AUTO and self.command in ("rate-sweep", "validate-homogeneous"):
            self.warnings.append(f"n={n} exceeds {limit}; phase-space distances fall back to sinkhorn")

    def validate_model_kind(self):
        kind = self.config.model.kind
        if self.command == "validate-homogeneous" and kind != ModelKind.CONSTANT:
            self.errors.append(f"validate-homogeneous needs model.kind 'constant', got '{kind.value}'")
        if self.command == "validate-equilibrium":
            if kind != ModelKind.GRADIENT:
                self.errors.append(
                    f"validate-equilibrium needs model.kind 'gradient', got '{kind.value}'"
                )
            if self.config.model.dimension > 2:
                self.warnings.append("stationarity residual grid is coarse for dimension > 2")

    def validate_coupling(self):
        if self.command != "coupling-diagnostics":
            return
        batch = get_config().runtime.replica_batch
        for gamma in self.config.gammas:
            try:
                self.config.coupling_config(gamma, batch)
            except (MisalignedBinsError, ValidationError) as e:
                self.errors.append(f"coupling grid at gamma={gamma}: {e}")

    def validate_sampling(self):
        ib = self.config.integrator
        if ib.provenance == Provenance.TRAJECTORY and ib.chains > self.config.n:
            self.warnings.append(f"chains={ib.chains} exceeds n={self.config.n}; extra chains unused")

    def validate_paths(self):
        """Output directory must exist or be creatable"""
        if self.out_dir is None:
            return
        out = Path(self.out_dir).expanduser()
        if not out.exists():
            try:
                out.mkdir(parents=True, exist_ok=True)
                logger.debug(f"Created output directory: {out}")
            except Exception as e:
                self.errors.append(f"Cannot create output directory {out}: {e}")

    def get_summary(self) -> Dict[str, List[str]]:
        """Get validation summary"""
        return {"errors": self.errors, "warnings": self.warnings}


def validate_config(
    config: ExperimentConfig, command: str, out_dir: Optional[Path] = None
) -> Dict[str, List[str]]:
    """
    Validate an experiment config for `command`.

    Returns:
        {"errors": [...], "warnings": [...]}; the run may start only when
        errors is empty
    """
    validator = ConfigValidator(config, command, out_dir)
    validator.validate_all()
    return validator.get_summary()
