"""
Configuration for qcalc.
Module-level constants plus the JSON settings file read at start-up.
"""

import os
import json
import logging
from typing import Optional

from pydantic import BaseModel, Field, ValidationError

logger = logging.getLogger(__name__)

# Configuration file paths
CONFIG_FILE = os.path.join(os.getcwd(), "config.json")
LOG_FILE = os.path.join(os.getcwd(), "qcalc.log")

# Environment override for the series truncation threshold
SERIES_TOL_ENV = "QCALC_SERIES_TOL"

# Default settings
DEFAULT_SERIES_TOL = 1e-14
DEFAULT_MAX_TERMS = 5000
DEFAULT_RHO = 0.9

# Lattice checks
PARITY_TOL = 1e-10
REGULARITY_TOL = 1e-6
# innermost radius used when extrapolating difference quotients to zero
ZERO_PROBE_FLOOR = 1e-6

# CLI exit codes
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_CONTRACTING = 2
EXIT_INVALID = 3


class Settings(BaseModel):
    """Tunable numerical settings, persisted in config.json."""

    series_tol: float = Field(default=DEFAULT_SERIES_TOL, gt=0)
    max_terms: int = Field(default=DEFAULT_MAX_TERMS, ge=1)
    rho: float = Field(default=DEFAULT_RHO, ge=0, lt=1)
    beta: float = Field(default=1.0, gt=0)
    lipschitz_samples: int = Field(default=256, ge=2)
    seed: int = 0
    picard_tol: float = Field(default=1e-13, gt=0)
    max_iter: int = Field(default=200, ge=1)
    # residuals are evaluated for residual_floor * h <= |x| <= h
    residual_floor: float = Field(default=1e-2, gt=0, le=1)
    log_level: str = "WARNING"


def _env_series_tol() -> Optional[float]:
    raw = os.environ.get(SERIES_TOL_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return float(raw)
    except ValueError:
        logger.error(f"Ignoring {SERIES_TOL_ENV}={raw!r}: not a number")
        return None


def load_settings(config_path: str = CONFIG_FILE) -> Settings:
    """Load settings from config_path, falling back to defaults.

    The QCALC_SERIES_TOL environment variable takes precedence over the file.
    """
    data = {}
    try:
        if os.path.exists(config_path):
            with open(config_path, "r") as f:
                raw = json.load(f)
            known = Settings.model_fields.keys()
            data = {k: v for k, v in raw.items() if k in known}
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error loading settings from {config_path}: {e}")
        data = {}

    env_tol = _env_series_tol()
    if env_tol is not None:
        data["series_tol"] = env_tol

    try:
        return Settings(**data)
    except ValidationError as e:
        logger.error(f"Invalid settings in {config_path}, using defaults: {e}")
        settings = Settings()
        if env_tol is not None and env_tol > 0:
            settings = settings.model_copy(update={"series_tol": env_tol})
        return settings


def save_settings(settings: Settings, config_path: str = CONFIG_FILE) -> None:
    """Write settings to config_path as indented JSON."""
    try:
        with open(config_path, "w") as f:
            json.dump(settings.model_dump(), f, indent=2)
    except OSError as e:
        logger.error(f"Error saving settings: {e}")
