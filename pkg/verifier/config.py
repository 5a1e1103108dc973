"""
Verifier settings: numerical tolerances, quadrature defaults and logging
"""
import logging
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def normalize_log_level(level: str) -> str:
    name = level.strip().upper()
    if name not in LOG_LEVELS:
        raise ValueError(f"Log level must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    return name


class Settings(BaseSettings):
    # Every field has a default; LOG_LEVEL, CIRCLE_NODES, ... in the environment or .env override it
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Numerical tolerances
    null_tolerance: float = Field(default=1e-10)  # |Q| <= eps * max(1, |p|^2 + |q|^2) counts as null
    chart_margin: float = Field(default=1e-6)  # lines need |xi| < 1 - margin
    fd_relative_step: float = Field(default=1e-4)
    conformal_fd_step: float = Field(default=1e-5)

    # Quadrature defaults
    circle_nodes: int = Field(default=2048)
    hyperbola_nodes: int = Field(default=8192)
    hyperbola_truncation: float = Field(default=12.0)
    relative_gap_floor: float = Field(default=1e-30)
    xray_tolerance: float = Field(default=1e-11)
    xray_truncation: float = Field(default=50.0)
    xray_max_depth: int = Field(default=60)

    # Reports
    report_schema: str = Field(default="asgeirsson-report/1")

    # Logging; records go to stderr, reports own stdout
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="%(asctime)s %(levelname)-8s [verifier] %(name)s: %(message)s")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        return normalize_log_level(v)

    def configure_logging(self, level: Optional[str] = None) -> None:
        """Install the stderr handler and apply log_level, or an override such as --log-level"""
        if level is not None:
            self.log_level = normalize_log_level(level)
        logging.basicConfig(format=self.log_format)
        logging.getLogger().setLevel(self.log_level)


settings = Settings()
settings.configure_logging()
