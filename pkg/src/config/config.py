"""
Configuration Management for kramers
Runtime settings (logging, threads, output, solver budgets) read from the
environment and .env files. Experiment definitions live in config.experiment.
"""

import os
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

VERSION = "0.1.0"

# Load global .env from ~/.kramers/.env if it exists
load_dotenv(Path.home() / ".kramers" / ".env")


class LoggingConfig(BaseSettings):
    """Logging configuration"""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )
    log_level: str = Field(default="INFO", validation_alias="KRAMERS_LOG_LEVEL")
    log_file: Optional[str] = Field(default=None, validation_alias="KRAMERS_LOG_FILE")


class RuntimeConfig(BaseSettings):
    """Worker pool, output and seeding defaults"""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )
    threads: int = Field(default=4, ge=1, validation_alias="KRAMERS_THREADS")
    output_dir: str = Field(default="./results", validation_alias="KRAMERS_OUTPUT_DIR")
    default_seed: int = Field(default=20240601, validation_alias="KRAMERS_SEED")
    replica_batch: int = Field(
        default=512, ge=1, validation_alias="KRAMERS_REPLICA_BATCH"
    )


class SolverConfig(BaseSettings):
    """Optimal-transport solver budgets"""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )
    exact_max_n: int = Field(default=4096, ge=1, validation_alias="KRAMERS_EXACT_MAX_N")
    sinkhorn_max_iter: int = Field(
        default=20000, ge=1, validation_alias="KRAMERS_SINKHORN_MAX_ITER"
    )
    sinkhorn_tol: float = Field(
        default=1e-9, gt=0, validation_alias="KRAMERS_SINKHORN_TOL"
    )
    bootstrap_resamples: int = Field(
        default=200, ge=10, validation_alias="KRAMERS_BOOTSTRAP_RESAMPLES"
    )


class KramersConfig(BaseSettings):
    """Main configuration class"""

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=False, extra="ignore"
    )

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)


# Global config instance
_config: Optional[KramersConfig] = None


def get_config() -> KramersConfig:
    """Get or create global configuration instance"""
    global _config
    if _config is None:
        _config = KramersConfig()
        if _config.logging.log_file:
            os.makedirs(Path(_config.logging.log_file).expanduser().parent, exist_ok=True)

    return _config


def reload_config() -> KramersConfig:
    """Reload configuration from environment"""
    global _config
    _config = None
    return get_config()
