#!/usr/bin/env python3
"""
Fully-connected tanh networks with a configurable output activation.

Parameters live in one flat vector (weights row-major, then bias, layer by layer) so
several networks can share a single optimizer state.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .jets import Jet, affine, input_jet, jet_scaled_sigmoid, jet_softplus, jet_tanh
from .tape import Tensor
from ..utils.errors import InvalidArgumentError

SOFTPLUS = "softplus"
IDENTITY = "identity"
SCALED_SIGMOID = "scaled-sigmoid"
OUTPUT_ACTIVATIONS = (SOFTPLUS, IDENTITY, SCALED_SIGMOID)

Params = Union[np.ndarray, Tensor]


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths from input to output; hidden layers always use tanh."""
    layer_widths: Tuple[int, ...]
    output_activation: str = IDENTITY
    c_a: float = 1.0

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2 or any(w <= 0 for w in widths):
            raise InvalidArgumentError(f"invalid layer widths {widths}")
        if widths[0] not in (1, 2, 3):
            raise InvalidArgumentError(f"input dimension must be 1, 2 or 3, got {widths[0]}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise InvalidArgumentError(f"unknown output activation '{self.output_activation}'")
        if self.output_activation == SCALED_SIGMOID and not self.c_a > 0:
            raise InvalidArgumentError("scaled-sigmoid output needs C_a > 0")

    @classmethod
    def build(cls, n_in: int, n_layers: int, n_width: int, n_out: int = 1,
              output_activation: str = IDENTITY, c_a: float = 1.0) -> "MlpSpec":
        return cls((n_in,) + (n_width,) * n_layers + (n_out,), output_activation, c_a)

    @property
    def n_in(self) -> int:
        return self.layer_widths[0]

    @property
    def n_out(self) -> int:
        return self.layer_widths[-1]

    @property
    def n_params(self) -> int:
        w = self.layer_widths
        return sum((w[i] + 1) * w[i + 1] for i in range(len(w) - 1))

    def param_slices(self) -> List[Tuple[slice, Tuple[int, int], slice]]:
        """Index map: (weight slice, weight shape, bias slice) per layer."""
        out = []
        offset = 0
        w = self.layer_widths
        for i in range(len(w) - 1):
            n_w = w[i] * w[i + 1]
            out.append((slice(offset, offset + n_w), (w[i], w[i + 1]),
                        slice(offset + n_w, offset + n_w + w[i + 1])))
            offset += n_w + w[i + 1]
        return out


def init_params(spec: MlpSpec, seed: int, zero: bool = False) -> np.ndarray:
    """Glorot-uniform weights and zero biases, reproducible from ``seed``."""
    params = np.zeros(spec.n_params)
    if zero:
        return params
    rng = np.random.default_rng(seed)
    for w_slice, (fan_in, fan_out), _ in spec.param_slices():
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params[w_slice] = rng.uniform(-bound, bound, size=fan_in * fan_out)
    return params


def _layers(params: Params, spec: MlpSpec):
    if params.shape != (spec.n_params,):
        raise InvalidArgumentError(
            f"parameter vector of length {params.shape} does not match {spec.n_params}")
    theta = params if isinstance(params, Tensor) else Tensor(params)
    for w_slice, shape, b_slice in spec.param_slices():
        yield theta[w_slice].reshape(shape), theta[b_slice]


def _check_inputs(spec: MlpSpec, inputs) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs.reshape(-1, spec.n_in) if spec.n_in > 1 else inputs[:, None]
    if inputs.shape[1] != spec.n_in:
        raise InvalidArgumentError(
            f"input dimension {inputs.shape[1]} does not match network input {spec.n_in}")
    return inputs


def forward_jet(params: Params, spec: MlpSpec, inputs, active_coords: Sequence[int] = (),
                order: int = 1) -> Jet:
    """Batched jet of the network output, shape (N, n_out) per component."""
    inputs = _check_inputs(spec, inputs)
    if order == 2 and spec.n_out != 1:
        raise InvalidArgumentError("second partials are supported for single-output networks")
    jet = input_jet(inputs, active_coords, order)
    layers = list(_layers(params, spec))
    for weight, bias in layers[:-1]:
        jet = jet_tanh(affine(jet, weight, bias))
    jet = affine(jet, *layers[-1])
    if spec.output_activation == SOFTPLUS:
        jet = jet_softplus(jet)
    elif spec.output_activation == SCALED_SIGMOID:
        jet = jet_scaled_sigmoid(jet, spec.c_a)
    return jet


def forward(params: Params, spec: MlpSpec, inputs) -> np.ndarray:
    """Plain forward pass returning an (N, n_out) array."""
    return forward_jet(np.asarray(params.data if isinstance(params, Tensor) else params),
                       spec, inputs).value.data


class MlpNetwork:
    """A spec bound to a parameter vector (array for evaluation, tensor while training)."""

    def __init__(self, spec: MlpSpec, params: Optional[Params] = None, seed: int = 0):
        self.spec = spec
        self.params = init_params(spec, seed) if params is None else params

    def bind(self, params: Params) -> "MlpNetwork":
        return MlpNetwork(self.spec, params)

    def __call__(self, inputs) -> np.ndarray:
        return forward(self.params, self.spec, inputs)[:, 0]

    def jet(self, inputs, active_coords: Sequence[int] = (), order: int = 1) -> Jet:
        """Scalar-output jet (first output column)."""
        return forward_jet(self.params, self.spec, inputs, active_coords, order).column(0)

    def get_status(self) -> dict:
        values = self.params.data if isinstance(self.params, Tensor) else self.params
        return {
            'layer_widths': list(self.spec.layer_widths),
            'output_activation': self.spec.output_activation,
            'n_params': self.spec.n_params,
            'param_norm': float(np.linalg.norm(values)),
        }


class NetworkBundle:
    """Several named networks packed into one flat parameter vector."""

    def __init__(self, specs: "dict[str, MlpSpec]"):
        self.specs = dict(specs)
        self.offsets = {}
        offset = 0
        for name, spec in self.specs.items():
            self.offsets[name] = slice(offset, offset + spec.n_params)
            offset += spec.n_params
        self.n_params = offset

    def init_params(self, seed: int) -> np.ndarray:
        # one seed stream per network
        return np.concatenate([init_params(spec, seed + i)
                               for i, spec in enumerate(self.specs.values())])

    def bind(self, theta: Params) -> "dict[str, MlpNetwork]":
        if theta.shape != (self.n_params,):
            raise InvalidArgumentError(
                f"bundle expects {self.n_params} parameters, got {theta.shape}")
        return {name: MlpNetwork(spec, theta[self.offsets[name]])
                for name, spec in self.specs.items()}
