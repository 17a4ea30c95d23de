"""
Forward jets carrying a value with first and diagonal second input partials.

Components are taped :class:`Tensor` objects, so parameter gradients flow through
derivative terms such as d/dx or d2/dx2 of a network output. A ``None`` derivative
stands for an exact zero and is skipped in the arithmetic.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .tape import Tensor, as_tensor, sigmoid, softplus, tanh
from ..utils.errors import InvalidArgumentError

Deriv = Optional[Tensor]


@dataclass
class Jet:
    value: Tensor
    d1: List[Deriv] = field(default_factory=list)
    d2: List[Deriv] = field(default_factory=list)

    @property
    def order(self) -> int:
        return 2 if self.d2 else 1

    def column(self, k: int) -> "Jet":
        """Jet of output column k."""
        pick = lambda t: None if t is None else t[:, k]
        return Jet(self.value[:, k], [pick(t) for t in self.d1], [pick(t) for t in self.d2])

    def dx(self, coord: int = 0) -> Tensor:
        return _or_zero(self.d1[coord], self.value)

    def dxx(self, coord: int = 0) -> Tensor:
        if not self.d2:
            raise InvalidArgumentError("second partials were not requested for this jet")
        return _or_zero(self.d2[coord], self.value)


def _or_zero(t: Deriv, like: Tensor) -> Tensor:
    return t if t is not None else Tensor(np.zeros(like.shape))


def input_jet(inputs: np.ndarray, active_coords: Sequence[int], order: int) -> Jet:
    """Seed jet for raw inputs: d/dx_c of x is the unit vector e_c."""
    if order not in (1, 2):
        raise InvalidArgumentError(f"jet order must be 1 or 2, got {order}")
    n_in = inputs.shape[1]
    d1 = []
    for c in active_coords:
        if not 0 <= c < n_in:
            raise InvalidArgumentError(f"active coordinate {c} outside input dimension {n_in}")
        unit = np.zeros((1, n_in))
        unit[0, c] = 1.0
        d1.append(Tensor(unit))
    d2 = [None] * len(active_coords) if order == 2 else []
    return Jet(Tensor(inputs), d1, d2)


def affine(jet: Jet, weight: Tensor, bias: Tensor) -> Jet:
    value = jet.value @ weight + bias
    d1 = [None if t is None else t @ weight for t in jet.d1]
    d2 = [None if t is None else t @ weight for t in jet.d2]
    return Jet(value, d1, d2)


def _chain(jet: Jet, out: Tensor, s1, s2) -> Jet:
    d1 = [None if t is None else s1 * t for t in jet.d1]
    d2 = []
    for t1, t2 in zip(jet.d1, jet.d2):
        term = None
        if t1 is not None and s2 is not None:
            term = s2 * (t1 * t1)
        if t2 is not None:
            term = s1 * t2 if term is None else term + s1 * t2
        d2.append(term)
    return Jet(out, d1, d2)


def jet_tanh(jet: Jet) -> Jet:
    t = tanh(jet.value)
    s1 = 1.0 - t * t
    s2 = -2.0 * t * s1 if jet.d2 else None
    return _chain(jet, t, s1, s2)


def jet_softplus(jet: Jet) -> Jet:
    out = softplus(jet.value)
    s1 = sigmoid(jet.value)
    s2 = s1 * (1.0 - s1) if jet.d2 else None
    return _chain(jet, out, s1, s2)


def jet_scaled_sigmoid(jet: Jet, scale: float) -> Jet:
    p = sigmoid(jet.value)
    s1 = scale * (p * (1.0 - p))
    s2 = s1 * (1.0 - 2.0 * p) if jet.d2 else None
    return _chain(jet, scale * p, s1, s2)


def constant_jet(value: np.ndarray, d1: Sequence[Optional[np.ndarray]] = (),
                 d2: Sequence[Optional[np.ndarray]] = ()) -> Jet:
    """Jet from precomputed arrays (analytic candidates, frozen correctors)."""
    wrap = lambda a: None if a is None else as_tensor(a)
    return Jet(as_tensor(value), [wrap(a) for a in d1], [wrap(a) for a in d2])
