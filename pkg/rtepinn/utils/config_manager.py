#!/usr/bin/env python3
"""
Configuration Manager for rtepinn
Loads library defaults (optimizer budgets, network sizes, solver tolerances) from TOML files
"""

import copy
import os
from pathlib import Path
from typing import Dict, Any, Optional

import toml

from .errors import ConfigError

CONFIG_ENV_VAR = "RTEPINN_CONFIG"

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'training': {
        'adam_lr': 1e-3,
        'adam_max_iter': 12000,
        'adam_loss_tol': 0.005,
        'lbfgs_max_iter': 10000,
        'lbfgs_grad_tol': 1e-6,
        'lbfgs_memory': 10,
        'log_every': 500,
        'error_every': 100,
    },
    'network': {
        'n_layers': 4,
        'n_width': 50,
    },
    'collocation': {
        'n_x': 80,
        'n_v': 60,
        'n_b': 60,
    },
    'halfspace': {
        'z_max': 10.0,
        'n_z': 400,
        'n_v': 40,
        'n_b': 60,
        'h_nodes': 96,
        'h_tol': 1e-12,
        'h_max_iter': 10000,
        'output_margin': 1.2,
    },
    'fdm': {
        'n_x': 200,
        'n_v': 80,
        'tol': 1e-10,
        'max_sweeps': 100000,
        'direct_limit': 100000,
    },
    'output': {
        'root': 'results',
    },
    'logging': {
        'level': 'INFO',
        'file': None,
        'max_size': '10MB',
        'backup_count': 5,
    },
}


REQUIRED_SECTIONS = ('training', 'network', 'collocation', 'fdm')
POSITIVE_KEYS = (('training', 'adam_lr'), ('network', 'n_layers'), ('network', 'n_width'),
                 ('collocation', 'n_x'), ('collocation', 'n_v'), ('collocation', 'n_b'),
                 ('fdm', 'n_x'), ('fdm', 'n_v'), ('halfspace', 'z_max'))
NON_NEGATIVE_KEYS = (('training', 'adam_max_iter'), ('training', 'lbfgs_max_iter'),
                     ('training', 'lbfgs_memory'))


class ConfigManager:
    """Library defaults layered under one TOML file"""

    CANDIDATES = ("development.toml", "production.toml")

    def __init__(self, config_path: Optional[str] = None, verbose: bool = False):
        """
        Args:
            config_path: TOML file, or a directory holding development.toml / production.toml
            verbose: Print which file was layered in
        """
        self.verbose = verbose
        self.config_path = config_path
        self.source: Optional[Path] = None
        self.config_data = copy.deepcopy(DEFAULT_CONFIG)
        if config_path:
            self.load_config(config_path)

    @classmethod
    def _resolve(cls, config_path: str) -> Optional[Path]:
        path = Path(config_path)
        if not path.is_dir():
            return path
        return next((path / name for name in cls.CANDIDATES if (path / name).exists()), None)

    def load_config(self, config_path: str) -> bool:
        """Layer a file over the current values; False when a directory holds no config"""
        config_file = self._resolve(config_path)
        if config_file is None:
            return False
        try:
            loaded = toml.load(config_file)
        except (OSError, toml.TomlDecodeError) as e:
            raise ConfigError(f"failed to load config {config_file}: {e}") from e

        for section, values in loaded.items():
            if isinstance(values, dict):
                self.config_data.setdefault(section, {}).update(values)
            else:
                self.config_data[section] = values
        self.source = config_file
        if self.verbose:
            print(f"✅ rtepinn defaults layered from: {config_file}")
        return True

    def get(self, section: str, key: str, default: Any = None) -> Any:
        return self.config_data.get(section, {}).get(key, default)

    def get_section(self, section: str) -> Dict[str, Any]:
        return self.config_data.get(section, {})

    def set(self, section: str, key: str, value: Any) -> None:
        self.config_data.setdefault(section, {})[key] = value

    def as_toml_dict(self) -> Dict[str, Any]:
        """Sections only, unset (None) values dropped"""
        return {s: {k: v for k, v in vals.items() if v is not None}
                for s, vals in self.config_data.items() if isinstance(vals, dict)}

    def save_config(self, output_path: str) -> bool:
        with open(output_path, 'w') as f:
            toml.dump(self.as_toml_dict(), f)
        return True

    def validate_config(self) -> Dict[str, Any]:
        """Report of hard issues (invalid values) and soft warnings"""
        issues = [f"Missing required section: {s}" for s in REQUIRED_SECTIONS
                  if s not in self.config_data]
        warnings = []

        for section, key in POSITIVE_KEYS:
            value = self.get(section, key)
            if value is not None and value <= 0:
                issues.append(f"{section}.{key} must be positive")
        for section, key in NON_NEGATIVE_KEYS:
            value = self.get(section, key)
            if value is not None and value < 0:
                issues.append(f"{section}.{key} must be non-negative")

        if self.get('training', 'adam_lr', 0.0) > 0.1:
            warnings.append("training.adam_lr above 0.1 usually diverges on these losses")
        if self.get('halfspace', 'output_margin', 1.0) < 1.0:
            warnings.append("halfspace.output_margin below 1 cannot reach the inflow maximum")

        return {'valid': not issues, 'issues': issues, 'warnings': warnings}


_config_instance: Optional[ConfigManager] = None


def _default_config_dir() -> Path:
    env_dir = os.environ.get(CONFIG_ENV_VAR)
    return Path(env_dir) if env_dir else Path(__file__).parent.parent.parent / "config"


def get_config() -> ConfigManager:
    """Process-wide defaults: config/development.toml, or the RTEPINN_CONFIG location"""
    global _config_instance
    if _config_instance is None:
        config_dir = _default_config_dir()
        _config_instance = ConfigManager(str(config_dir) if config_dir.exists() else None)
    return _config_instance


def load_config(config_name: str = "development") -> Dict[str, Any]:
    """Raw contents of ``<config dir>/<config_name>.toml``"""
    config_file = _default_config_dir() / f"{config_name}.toml"
    if not config_file.exists():
        raise ConfigError(f"config file not found: {config_file}")
    return toml.load(config_file)
