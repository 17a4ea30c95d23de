#!/usr/bin/env python3
"""
Experiment configuration

An experiment file is TOML with ``schema_version = 1`` and an ``[experiment]`` table
naming the id. Values are layered: built-in defaults, then the library config
(config/development.toml through ConfigManager), then the registry overrides of the
id, then the file itself.
"""

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import toml

from .registry import THIN_LAYER_EPS, ExperimentEntry, build_problem, get_entry
from ..optim.history import AdamConfig, LbfgsConfig, StopRule
from ..physics.problem import ProblemSpec
from ..utils.config_manager import get_config
from ..utils.errors import ConfigError, InvalidArgumentError
from ..utils.logger import get_logger

SCHEMA_VERSION = 1
OUTPUT_ENV_VAR = "RTEPINN_OUTPUT_ROOT"
FORMATS = ("csv", "json", "npz")

# sections whose library defaults come from the global ConfigManager
_LIBRARY_SECTIONS = ("training", "network", "collocation", "halfspace", "fdm", "output")

_BUILTIN: Dict[str, Dict[str, Any]] = {
    'experiment': {'id': "", 'seed': 0},
    'problem': {
        'epsilon': 1.0,
        'kernel_h': 0.0,
        'hetero_a': 10.0,
        'hetero_b': 20.0,
        'a': 1.0,
        'c': 1.0,
        'sigma': 1.0,
        'boundary_weights': {},
    },
    'network': {'n_layers': 4, 'n_width': 50},
    'collocation': {
        'n_x': 80,
        'n_v': 60,
        'n_b': 60,
        'n_y': 0,            # 0: same as n_x
        'face_points': 0,    # 0: one per y (or x) collocation node
        'x_mesh': "uniform",
        'split_inner': 150,
        'split_outer': 50,
    },
    'training': {
        'adam_lr': 1e-3,
        'adam_max_iter': 12000,
        'adam_loss_tol': 0.005,
        'lr_decay_factor': 0.0,  # 0: constant learning rate
        'lr_decay_every': 0,
        'lbfgs_max_iter': 10000,
        'lbfgs_grad_tol': 1e-6,
        'lbfgs_memory': 10,
        'error_every': 100,
        'log_every': 500,
    },
    'loss': {'kind': "", 'micro_form': "projected", 'mean_penalty': True},
    'halfspace': {
        'z_max': 10.0,
        'n_z': 400,
        'n_v': 40,
        'n_b': 60,
        'n_layers': 4,
        'n_width': 50,
        'y_nodes': 50,
        'h_nodes': 96,
        'h_tol': 1e-12,
        'h_max_iter': 10000,
        'output_margin': 1.2,
        'corrector': "",     # checkpoint directory; empty trains one first
        'max_workers': 1,
    },
    'fdm': {
        'n_x': 200,
        'n_v': 80,
        'n_y': 60,
        'n_alpha': 40,
        'theta': 1.0,
        'mesh': "uniform",
        'layer_width': 10.0,
        'tol': 1e-10,
        'max_sweeps': 100000,
        'direct_limit': 100000,
    },
    'stability': {'epsilons': [1.0, 1e-1, 1e-2, 1e-3], 'candidates': 50, 'delta': 1e-2},
    'output': {'root': "results", 'formats': ["csv", "json"]},
}

_POSITIVE = {
    'network': ('n_layers', 'n_width'),
    'collocation': ('n_x', 'n_v', 'n_b', 'split_inner', 'split_outer'),
    'training': ('adam_lr', 'adam_loss_tol', 'lbfgs_grad_tol', 'lbfgs_memory', 'error_every',
                 'log_every'),
    'halfspace': ('z_max', 'n_z', 'n_v', 'n_b', 'n_layers', 'n_width', 'y_nodes', 'h_nodes',
                  'max_workers'),
    'fdm': ('n_x', 'n_v', 'n_y', 'n_alpha', 'layer_width', 'tol', 'max_sweeps'),
    'stability': ('candidates', 'delta'),
    'problem': ('epsilon', 'sigma'),
}
_NON_NEGATIVE = {
    'collocation': ('n_y', 'face_points'),
    'training': ('adam_max_iter', 'lbfgs_max_iter', 'lr_decay_factor', 'lr_decay_every'),
    'problem': ('kernel_h', 'hetero_b', 'a', 'c'),
}


def _coerce(section: str, key: str, value: Any, default: Any) -> Any:
    where = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        if float(value) != int(value):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where} must be a list, got {value!r}")
        return list(value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{where} must be a table, got {value!r}")
        return dict(value)
    return value


def _merge(base: Dict[str, Dict[str, Any]], layer: Dict[str, Any], origin: str) -> None:
    """Merge ``layer`` into ``base`` in place, warning about anything unknown."""
    logger = get_logger()
    for section, values in layer.items():
        if section == 'schema_version':
            continue
        if section not in base:
            logger.warning(f"{origin}: ignoring unknown section [{section}]")
            continue
        if not isinstance(values, dict):
            raise ConfigError(f"{origin}: [{section}] must be a table")
        for key, value in values.items():
            if key not in base[section]:
                logger.warning(f"{origin}: ignoring unknown key {section}.{key}")
                continue
            base[section][key] = _coerce(section, key, value, base[section][key])


def default_sections() -> Dict[str, Dict[str, Any]]:
    """Built-in defaults overlaid with the library config."""
    sections = copy.deepcopy(_BUILTIN)
    library = get_config()
    for name in _LIBRARY_SECTIONS:
        known = {k: v for k, v in library.get_section(name).items() if k in sections[name]}
        for key, value in known.items():
            sections[name][key] = _coerce(name, key, value, sections[name][key])
    return sections


def _validate(experiment_id: str, sections: Dict[str, Dict[str, Any]]) -> None:
    for section, keys in _POSITIVE.items():
        for key in keys:
            if not sections[section][key] > 0:
                raise ConfigError(f"{experiment_id}: {section}.{key} must be positive, "
                                  f"got {sections[section][key]}")
    for section, keys in _NON_NEGATIVE.items():
        for key in keys:
            if sections[section][key] < 0:
                raise ConfigError(f"{experiment_id}: {section}.{key} must be non-negative")
    training = sections['training']
    if (training['lr_decay_factor'] > 0) != (training['lr_decay_every'] > 0):
        raise ConfigError(f"{experiment_id}: lr_decay_factor and lr_decay_every go together")
    formats = sections['output']['formats']
    unknown = [f for f in formats if f not in FORMATS]
    if unknown or not formats:
        raise ConfigError(f"{experiment_id}: output formats must be a non-empty subset of "
                          f"{FORMATS}, got {formats}")
    if sections['collocation']['x_mesh'] not in ("uniform", "split"):
        raise ConfigError(f"{experiment_id}: collocation.x_mesh is 'uniform' or 'split'")
    if sections['fdm']['mesh'] not in ("uniform", "split", "layered", "auto"):
        raise ConfigError(f"{experiment_id}: fdm.mesh is uniform, split, layered or auto")
    if not 0.0 <= sections['fdm']['theta'] <= 1.0:
        raise ConfigError(f"{experiment_id}: fdm.theta must lie in [0, 1]")
    if any(not e > 0 for e in sections['stability']['epsilons']):
        raise ConfigError(f"{experiment_id}: stability epsilons must be positive")


@dataclass
class ExperimentConfig:
    """Fully merged settings of one experiment run."""
    experiment_id: str
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    source: Optional[str] = None

    @classmethod
    def from_id(cls, experiment_id: str, overrides: Optional[Dict[str, Any]] = None,
                source: Optional[str] = None) -> "ExperimentConfig":
        entry = get_entry(experiment_id)
        sections = default_sections()
        _merge(sections, entry.overrides, f"registry:{experiment_id}")
        if overrides:
            _merge(sections, overrides, source or "overrides")
        sections['experiment']['id'] = experiment_id
        _validate(experiment_id, sections)
        return cls(experiment_id, sections, source)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: str = "<dict>") -> "ExperimentConfig":
        version = data.get('schema_version')
        if version != SCHEMA_VERSION:
            raise ConfigError(f"{source}: schema_version must be {SCHEMA_VERSION}, got {version}")
        experiment_id = data.get('experiment', {}).get('id')
        if not experiment_id:
            raise ConfigError(f"{source}: missing [experiment] id")
        return cls.from_id(experiment_id, data, source)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            with open(path, 'r') as f:
                data = toml.load(f)
        except (OSError, toml.TomlDecodeError) as e:
            raise ConfigError(f"failed to load experiment config {path}: {e}") from e
        return cls.from_dict(data, str(path))

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        sections = copy.deepcopy(self.sections)
        _merge(sections, overrides, "overrides")
        _validate(self.experiment_id, sections)
        return ExperimentConfig(self.experiment_id, sections, self.source)

    def section(self, name: str) -> Dict[str, Any]:
        return self.sections[name]

    def get(self, section: str, key: str) -> Any:
        return self.sections[section][key]

    @property
    def entry(self) -> ExperimentEntry:
        return get_entry(self.experiment_id)

    @property
    def dim(self) -> int:
        return self.entry.dim

    @property
    def seed(self) -> int:
        return int(self.sections['experiment']['seed'])

    @property
    def epsilon(self) -> float:
        return float(self.sections['problem']['epsilon'])

    @property
    def is_long(self) -> bool:
        return self.entry.long

    @property
    def thin_layer(self) -> bool:
        return self.epsilon < THIN_LAYER_EPS

    @property
    def loss_kind(self) -> str:
        return self.sections['loss']['kind'] or self.entry.loss_kind(self.epsilon)

    @property
    def reference_kind(self) -> str:
        return self.entry.reference_kind(self.epsilon)

    @property
    def output_root(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV_VAR) or self.sections['output']['root'])

    @property
    def output_dir(self) -> Path:
        return self.output_root / self.experiment_id

    @property
    def formats(self) -> Tuple[str, ...]:
        return tuple(self.sections['output']['formats'])

    def problem(self) -> ProblemSpec:
        try:
            return build_problem(self.experiment_id, self.sections['problem'])
        except InvalidArgumentError as e:
            raise ConfigError(f"{self.experiment_id}: {e}") from e

    def adam_config(self) -> AdamConfig:
        t = self.sections['training']
        decay = t['lr_decay_factor'] > 0
        return AdamConfig(lr=t['adam_lr'],
                          decay_factor=t['lr_decay_factor'] if decay else None,
                          decay_every=t['lr_decay_every'] if decay else None)

    def lbfgs_config(self) -> LbfgsConfig:
        return LbfgsConfig(memory=self.sections['training']['lbfgs_memory'])

    def stop_rule(self) -> StopRule:
        t = self.sections['training']
        return StopRule(t['adam_max_iter'], t['adam_loss_tol'], t['lbfgs_max_iter'],
                        t['lbfgs_grad_tol'])

    def snapshot(self) -> Dict[str, Any]:
        """Everything needed to rebuild this config through :meth:`from_dict`."""
        return {'schema_version': SCHEMA_VERSION, **copy.deepcopy(self.sections)}

    def to_toml(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            toml.dump(self.snapshot(), f)
        return path

    def get_status(self) -> dict:
        return {
            'experiment_id': self.experiment_id,
            'source': self.source,
            'epsilon': self.epsilon,
            'seed': self.seed,
            'loss': self.loss_kind,
            'reference': self.reference_kind,
            'long': self.is_long,
        }
