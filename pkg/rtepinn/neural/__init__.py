"""Taped tensors, forward jets and tanh networks."""

from .checkpoint import load_network, save_network
from .jets import Jet, constant_jet
from .mlp import (IDENTITY, SCALED_SIGMOID, SOFTPLUS, MlpNetwork, MlpSpec, NetworkBundle,
                  forward, forward_jet, init_params)
from .tape import Tensor, grad_params

__all__ = ['Tensor', 'grad_params', 'Jet', 'constant_jet', 'MlpSpec', 'MlpNetwork',
           'NetworkBundle', 'init_params', 'forward', 'forward_jet', 'save_network',
           'load_network', 'SOFTPLUS', 'IDENTITY', 'SCALED_SIGMOID']
