#!/usr/bin/env python3
"""
Experiment registry: problem definitions, loss choice and reference choice per id.

Per-id overrides hold the parameters that define each experiment; everything else comes from
the library defaults in config/development.toml.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from ..numerics.scattering import KernelSpec
from ..physics.problem import LogisticEpsilon, ProblemSpec
from ..utils.errors import ConfigError

# loss kinds
VANILLA = "vanilla"
MACRO_MICRO = "macro-micro"
BL_CORRECTED = "bl-corrected"
HETERO = "hetero"
NONLINEAR = "nonlinear"
HALFSPACE = "halfspace"

# reference kinds
ANALYTIC = "analytic"
FDM = "fdm"
LIMIT = "limit"
HFUNCTION = "hfunction"

# below this Knudsen number the layer problems switch to corrected losses and limit references
THIN_LAYER_EPS = 0.05

_OVERRIDES_2D = {
    'network': {'n_layers': 4, 'n_width': 30},
    'collocation': {'n_x': 40, 'n_y': 40, 'n_v': 40, 'n_b': 40, 'face_points': 40},
    'training': {'adam_max_iter': 20000, 'adam_loss_tol': 0.01},
    'fdm': {'n_x': 60, 'n_y': 60, 'n_alpha': 40},
}

# diamond differences on the layer-refined mesh for the 5 sin v layer problems
_LAYER_FDM = {'theta': 0.5, 'mesh': "auto"}


@dataclass(frozen=True)
class ExperimentEntry:
    experiment_id: str
    dim: int
    description: str
    loss: Callable[[float], str]
    reference: Callable[[float], str]
    overrides: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    long: bool = False

    def loss_kind(self, eps: float) -> str:
        return self.loss(eps)

    def reference_kind(self, eps: float) -> str:
        return self.reference(eps)


def _fixed(kind: str) -> Callable[[float], str]:
    return lambda eps: kind


def _layer_dependent(thick: str, thin: str) -> Callable[[float], str]:
    return lambda eps: thin if eps < THIN_LAYER_EPS else thick


EXPERIMENTS: Dict[str, ExperimentEntry] = {e.experiment_id: e for e in (
    ExperimentEntry("toy-vanilla", 1, "toy problem with exact solution 1 - x, vanilla loss",
                    _fixed(VANILLA), _fixed(ANALYTIC), {'problem': {'epsilon': 1e-3}}),
    ExperimentEntry("toy-mm", 1, "toy problem with exact solution 1 - x, macro-micro loss",
                    _fixed(MACRO_MICRO), _fixed(ANALYTIC),
                    {'problem': {'epsilon': 1e-3}, 'loss': {'mean_penalty': False}}),
    ExperimentEntry("pitfall-weights", 1,
                    "5 sin v layer problem without corrector, boundary weight 1e3 at x = 0",
                    _fixed(MACRO_MICRO), _fixed(FDM),
                    {'problem': {'epsilon': 1e-3, 'boundary_weights': {'left': 1e3}},
                     'fdm': _LAYER_FDM}),
    ExperimentEntry("pitfall-mesh", 1,
                    "5 sin v layer problem without corrector, 150/50 split collocation",
                    _fixed(MACRO_MICRO), _fixed(FDM),
                    {'problem': {'epsilon': 1e-3}, 'collocation': {'x_mesh': "split"},
                     'fdm': _LAYER_FDM}),
    ExperimentEntry("ex5.1", 1, "homogeneous scattering, inflow 1 at x = 0",
                    _fixed(MACRO_MICRO), _fixed(FDM)),
    ExperimentEntry("ex5.2", 2, "2D problem with analytic solution exp(-x - y)",
                    _fixed(MACRO_MICRO), _fixed(ANALYTIC), _OVERRIDES_2D),
    ExperimentEntry("ex5.3", 1, "heterogeneous scattering through a logistic eps(x)",
                    _fixed(HETERO), _fixed(FDM),
                    {'training': {'lr_decay_factor': 0.95, 'lr_decay_every': 2000},
                     'loss': {'mean_penalty': False}}),
    ExperimentEntry("ex5.4", 2, "2D Henyey-Greenstein scattering, inflow 1 - y^2 at x = -1",
                    _fixed(MACRO_MICRO), _fixed(FDM),
                    dict(_OVERRIDES_2D, problem={'kernel_h': 0.5})),
    ExperimentEntry("ex5.5", 1, "1D half-space problem with inflow 5 sin v",
                    _fixed(HALFSPACE), _fixed(HFUNCTION)),
    ExperimentEntry("ex5.6", 1, "1D layer problem with inflow 5 sin v",
                    _layer_dependent(MACRO_MICRO, BL_CORRECTED), _fixed(FDM), {'fdm': _LAYER_FDM}),
    ExperimentEntry("ex5.7", 2, "2D half-space problems with inflow (1 - y^2) alpha",
                    _fixed(HALFSPACE), _fixed(HFUNCTION),
                    {'halfspace': {'n_z': 200, 'n_v': 40, 'n_layers': 3, 'n_width': 50,
                                   'y_nodes': 50}}, long=True),
    ExperimentEntry("ex5.8", 2, "2D layer problem with inflow (1 - y^2) alpha",
                    _layer_dependent(MACRO_MICRO, BL_CORRECTED),
                    _layer_dependent(FDM, LIMIT),
                    dict(_OVERRIDES_2D, fdm={'n_x': 60, 'n_y': 60, 'n_alpha': 60},
                         halfspace={'n_z': 200, 'n_v': 40, 'n_layers': 3, 'n_width': 50,
                                    'y_nodes': 50}), long=True),
    ExperimentEntry("ex5.9", 1, "nonlinear radiative transfer coupled to temperature",
                    _fixed(NONLINEAR), _layer_dependent(FDM, LIMIT),
                    {'loss': {'mean_penalty': False}, 'fdm': {'theta': 0.5}}),
)}


def get_entry(experiment_id: str) -> ExperimentEntry:
    try:
        return EXPERIMENTS[experiment_id]
    except KeyError:
        raise ConfigError(f"unknown experiment id '{experiment_id}'; "
                          f"known: {', '.join(sorted(EXPERIMENTS))}") from None


def _ones(*args):
    return np.ones(np.broadcast(*args).shape)


def _zeros(*args):
    return np.zeros(np.broadcast(*args).shape)


def _five_sin(v):
    return 5.0 * np.sin(v)


def _parabola_alpha(s, a):
    return (1.0 - s * s) * a


def _parabola(s, a):
    return (1.0 - s * s) * np.ones_like(a)


def exponential_solution(x, y, *velocity):
    return np.exp(-x - y)


def toy_solution(x, *velocity):
    return 1.0 - np.asarray(x, dtype=float)


ANALYTIC_SOLUTIONS: Dict[str, Callable] = {
    "toy-vanilla": toy_solution,
    "toy-mm": toy_solution,
    "ex5.2": exponential_solution,
}


def _kernel(problem_section: Dict[str, Any]) -> KernelSpec:
    h = float(problem_section.get('kernel_h', 0.0))
    return KernelSpec.henyey_greenstein(h) if h > 0 else KernelSpec.isotropic()


def build_problem(experiment_id: str, problem_section: Dict[str, Any],
                  name: Optional[str] = None) -> ProblemSpec:
    """ProblemSpec of ``experiment_id`` with epsilon and weights from ``problem_section``."""
    entry = get_entry(experiment_id)
    eps = float(problem_section.get('epsilon', 1.0))
    weights = dict(problem_section.get('boundary_weights', {}))
    name = name or experiment_id
    common = dict(boundary_weights=weights, name=name)

    if experiment_id in ("toy-vanilla", "toy-mm"):
        return ProblemSpec(1, eps, {"left": _ones, "right": _zeros},
                           source=lambda x, v: -v / eps, **common)
    if experiment_id == "ex5.1":
        return ProblemSpec(1, eps, {"left": _ones, "right": _zeros}, **common)
    if experiment_id in ("ex5.5", "ex5.6", "pitfall-weights", "pitfall-mesh"):
        return ProblemSpec(1, eps, {"left": _five_sin, "right": _zeros}, **common)
    if experiment_id == "ex5.3":
        profile = LogisticEpsilon(problem_section.get('hetero_a', 10.0),
                                  problem_section.get('hetero_b', 20.0))
        return ProblemSpec(1, profile, {"left": lambda v: 5.0 * np.ones_like(v),
                                        "right": _zeros}, **common)
    if experiment_id == "ex5.9":
        return ProblemSpec(1, eps, {"left": _ones, "right": _zeros}, **common)
    if experiment_id == "ex5.2":
        fixed = {"left": -1.0, "right": 1.0, "bottom": -1.0, "top": 1.0}
        inflow = {face: (lambda c: (lambda s, a: np.exp(-c - s) * np.ones_like(a)))(c)
                  for face, c in fixed.items()}
        return ProblemSpec(2, eps, inflow,
                           source=lambda x, y, a: (-np.cos(a) - np.sin(a)) * np.exp(-x - y) / eps,
                           **common)
    if experiment_id == "ex5.4":
        return ProblemSpec(2, eps, {"left": _parabola},
                           kernel=_kernel(problem_section),
                           **common)
    if experiment_id in ("ex5.7", "ex5.8"):
        return ProblemSpec(2, eps, {"left": _parabola_alpha}, **common)
    raise ConfigError(f"no problem builder for '{entry.experiment_id}'")
