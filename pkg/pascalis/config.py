#!/usr/bin/env python3
"""
Pascalis Configuration Manager
YAML-backed engine limits and output defaults
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .errors import ConfigError

logger = logging.getLogger(__name__)

TERM_CEILING_ENV = "PASCALIS_TERM_CEILING"

DEFAULTS: Dict[str, Any] = {
    "pascal": {
        "m_max_multiplier": 3,
        "m_max_cap": 64,
        "term_ceiling": 5_000_000,
        "probe_doublings": 3,
        "cache_terms": 4_000_000,
        "work_factor": 50,
        "evidence_ceiling": 20_000,
    },
    "output": {
        "format": "json",
        "indent": 2,
    },
    "runtime": {
        "jobs": 0,
    },
    "corpus": {
        "golden_dir": None,
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


class PascalisConfig:
    """YAML configuration with built-in defaults"""

    def __init__(self, config_path: Optional[str] = None):
        """
        Args:
            config_path: YAML file path (defaults to pascalis_config.yaml next to this module)
        """
        if config_path is None:
            config_path = Path(__file__).parent / "pascalis_config.yaml"

        self.config_path = Path(config_path)
        self.settings: Dict[str, Any] = {}

        self._load_config()

    def _load_config(self):
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
        except FileNotFoundError:
            logger.info("[Config] no config file at %s, using defaults", self.config_path)
            self._use_defaults()
            return
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {self.config_path}: {e}") from e

        if not isinstance(loaded, dict):
            raise ConfigError(f"{self.config_path}: top level must be a mapping")
        self.settings = _merge(DEFAULTS, loaded)
        logger.debug("[Config] loaded %s", self.config_path)

    def _use_defaults(self):
        self.settings = _merge(DEFAULTS, {})

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Dotted lookup, e.g. get('pascal.term_ceiling')
        """
        value: Any = self.settings
        for key in key_path.split("."):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def get_int(self, key_path: str, minimum: int = 0) -> int:
        value = self.get(key_path)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(f"{key_path} must be an integer >= {minimum}, got {value!r}")
        return value

    def term_ceiling(self) -> int:
        """Ceiling from the environment when set, else from the file."""
        raw = os.environ.get(TERM_CEILING_ENV)
        if raw is not None and raw.strip():
            try:
                value = int(raw)
            except ValueError as e:
                raise ConfigError(f"{TERM_CEILING_ENV}={raw!r} is not an integer") from e
            if value < 1:
                raise ConfigError(f"{TERM_CEILING_ENV} must be positive")
            return value
        return self.get_int("pascal.term_ceiling", minimum=1)

    def jobs(self) -> int:
        """Worker processes; 0 means one per available core."""
        jobs = self.get_int("runtime.jobs")
        return jobs or (os.cpu_count() or 1)

    def golden_dir(self) -> Path:
        configured = self.get("corpus.golden_dir")
        if configured:
            return Path(configured)
        return Path(__file__).parent / "data" / "golden"


# Global config instance
_global_config: Optional[PascalisConfig] = None


def get_config() -> PascalisConfig:
    global _global_config
    if _global_config is None:
        _global_config = PascalisConfig()
    return _global_config


def reset_config(config_path: Optional[str] = None) -> PascalisConfig:
    """Reload the global instance (tests, CLI --config)."""
    global _global_config
    _global_config = PascalisConfig(config_path)
    return _global_config
