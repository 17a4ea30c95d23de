"""
rtepinn - Neural least-squares solvers for the steady radiative transfer equation
===============================================================================

Physics-informed training of small tanh networks on the macro-micro decomposition
of the RTE, with half-space boundary-layer correctors and finite-difference,
diffusion-limit and H-function references to score them against.

Components:
- Numerics: quadrature rules and scattering operators
- Neural: taped tensors, forward jets, networks and checkpoints
- Optim: Adam, L-BFGS and the two-phase schedule
- Physics: problems, collocation sets and losses
- Boundary layer: half-space solves, H-functions, correctors
- Reference: transport FDM, diffusion and nonlinear limits
- Experiments: configs, registry, drivers and result files

License: MIT
"""

__version__ = "0.1.0"

from rtepinn.experiments.config import ExperimentConfig
from rtepinn.experiments.runner import run_experiment

__all__ = ['ExperimentConfig', 'run_experiment']
