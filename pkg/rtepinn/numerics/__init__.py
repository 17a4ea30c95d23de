"""Quadrature rules and scattering operators."""

from .quadrature import (QuadratureRule, TensorGrid, gauss_legendre, trapezoid_rule,
                         uniform_rule, velocity_average)
from .scattering import KernelSpec, ScatteringOperator, apply_L, average_of_L

__all__ = ['QuadratureRule', 'TensorGrid', 'gauss_legendre', 'uniform_rule', 'trapezoid_rule',
           'velocity_average', 'KernelSpec', 'ScatteringOperator', 'apply_L', 'average_of_L']
