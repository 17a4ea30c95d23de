"""Half-space solutions, H-functions and the boundary-layer corrector."""

from .corrector import GammaCorrector, GammaCorrector2D, gamma_dy, gamma_eval, load_corrector
from .halfspace import (HalfSpaceFamily, HalfSpaceSolution, HalfSpaceSpec, halfspace_loss,
                        solve_halfspace_1d, solve_halfspace_2d)
from .hfunction import (HFunctionTable, cached_table, chandrasekhar_h_1d, chandrasekhar_h_2d,
                        f_bl_infinity_1d, f_bl_infinity_2d, reflection_bc_1d, reflection_bc_2d)

__all__ = ['GammaCorrector', 'GammaCorrector2D', 'gamma_eval', 'gamma_dy', 'load_corrector',
           'HalfSpaceSpec', 'HalfSpaceSolution', 'HalfSpaceFamily', 'halfspace_loss',
           'solve_halfspace_1d', 'solve_halfspace_2d', 'HFunctionTable', 'cached_table',
           'chandrasekhar_h_1d', 'chandrasekhar_h_2d', 'f_bl_infinity_1d', 'f_bl_infinity_2d',
           'reflection_bc_1d', 'reflection_bc_2d']
