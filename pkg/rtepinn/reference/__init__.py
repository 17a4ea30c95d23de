"""Finite-difference, diffusion-limit and nonlinear-limit reference solutions."""

from .diffusion import (boundary_from_hfunction_1d, boundary_from_hfunction_2d,
                        diffusion_limit_solve)
from .fields import Field, Mesh1D, split_nodes
from .nonlinear import fdm_nonlinear_1d, limit_profile, nonlinear_limit_solve
from .transport import OrdinateSolver2D, OrdinateSweep1D, fdm_rte_1d, fdm_rte_2d

__all__ = ['Field', 'Mesh1D', 'split_nodes', 'fdm_rte_1d', 'fdm_rte_2d', 'OrdinateSweep1D',
           'OrdinateSolver2D', 'diffusion_limit_solve', 'boundary_from_hfunction_1d',
           'boundary_from_hfunction_2d', 'nonlinear_limit_solve', 'limit_profile',
           'fdm_nonlinear_1d']
