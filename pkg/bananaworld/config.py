"""
Configuration for the Bananaworld Correlation Analyzer
Loads run defaults from bananaworld_config.json, falling back to built-in values
"""

import json
import logging
import os
import platform
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .constants import (BOUNDARY_BAND_FACTOR, DEFAULT_BLOCK_SIZE, DEFAULT_FLOAT_TOLERANCE,
                        DEFAULT_GRID_STEPS, DEFAULT_MAX_WORKERS, DEFAULT_SEED, DEFAULT_TRIALS,
                        LIBRARY_VERSION)
from .errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_FILE_NAME = "bananaworld_config.json"
CONFIG_ENV_VAR = "BANANAWORLD_CONFIG"


@dataclass(frozen=True)
class AnalyzerConfig:
    tolerance: float = DEFAULT_FLOAT_TOLERANCE
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    sample_block_size: int = DEFAULT_BLOCK_SIZE
    max_workers: int = DEFAULT_MAX_WORKERS
    boundary_band_factor: float = BOUNDARY_BAND_FACTOR
    tsirelson_grid_steps: int = DEFAULT_GRID_STEPS
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        for name in ("trials", "sample_block_size", "max_workers", "tsirelson_grid_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not self.boundary_band_factor >= 1:
            raise ConfigError(f"boundary_band_factor must be at least 1, got {self.boundary_band_factor}")

    def with_overrides(self, **overrides) -> "AnalyzerConfig":
        """Copy with the given non-None fields replaced"""
        values = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **values) if values else self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def default_config_path() -> Path:
    return Path(os.environ.get(CONFIG_ENV_VAR, CONFIG_FILE_NAME))


def load_config(path: Optional[Union[str, Path]] = None) -> AnalyzerConfig:
    """Read the config file; a missing file means built-in defaults"""
    config_file = Path(path) if path is not None else default_config_path()
    if not config_file.exists():
        if path is not None:
            raise ConfigError(f"config file {config_file} does not exist")
        logger.debug(f"[Config] {config_file} not found, using defaults")
        return AnalyzerConfig()
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {config_file}: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"config {config_file} must hold a JSON object")

    known = set(AnalyzerConfig.__dataclass_fields__)
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        config = AnalyzerConfig(**payload)
    except TypeError as e:
        raise ConfigError(f"bad config {config_file}: {e}") from e
    logger.debug(f"[Config] loaded configuration from {config_file}")
    return config


def save_config(config: AnalyzerConfig, path: Union[str, Path]) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config.to_dict(), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise ConfigError(f"cannot write config {path}: {e}") from e


def create_config_template(path: Union[str, Path]) -> AnalyzerConfig:
    """Write the default configuration with a metadata block"""
    config = AnalyzerConfig(metadata={
        "version": LIBRARY_VERSION,
        "created_by": "Bananaworld Correlation Analyzer",
        "platform": platform.system(),
    })
    save_config(config, path)
    logger.info(f"[Config] wrote configuration template to {path}")
    return config
