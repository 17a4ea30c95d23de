"""
Quadrature rules for velocity averages, angular integrals and spatial sums.

All velocity averages in the package go through :func:`velocity_average`, which
divides by the interval length (2 on v in [-1, 1], 2*pi on alpha in [0, 2*pi]).
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..utils.errors import InvalidArgumentError

GAUSS_LEGENDRE = "gauss-legendre"
UNIFORM = "uniform"
TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on ``interval``."""
    nodes: np.ndarray
    weights: np.ndarray
    interval: Tuple[float, float]
    kind: str

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise InvalidArgumentError("nodes and weights differ in length")
        if not np.all(self.weights > 0):
            raise InvalidArgumentError("quadrature weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def measure(self) -> float:
        lo, hi = self.interval
        return hi - lo

    def integrate(self, values) -> float:
        """Sum of w_j f_j along the last axis."""
        return np.asarray(values) @ self.weights


def _check_bounds(lo: float, hi: float) -> None:
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidArgumentError(f"non-finite interval bounds ({lo}, {hi})")
    if not lo < hi:
        raise InvalidArgumentError(f"empty interval ({lo}, {hi})")


def gauss_legendre(n: int, lo: float, hi: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped affinely to [lo, hi]."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    _check_bounds(lo, hi)
    x, w = leggauss(int(n))
    xm = 0.5 * (hi + lo)
    xr = 0.5 * (hi - lo)
    return QuadratureRule(xm + xr * x, xr * w, (float(lo), float(hi)), GAUSS_LEGENDRE)


def uniform_rule(n: int, lo: float, hi: float, closed: bool = False,
                 shift: float = 0.0) -> QuadratureRule:
    """
    Equispaced rule.

    Open kind: nodes lo + (i + shift)*d, weights d (left-point sums for shift=0,
    midpoint for shift=0.5). Closed kind: n nodes including both ends, trapezoid weights.
    """
    if int(n) != n or n < 1 or (closed and n < 2):
        raise InvalidArgumentError(f"invalid node count {n} for closed={closed}")
    _check_bounds(lo, hi)
    n = int(n)
    if closed:
        nodes = np.linspace(lo, hi, n)
        d = (hi - lo) / (n - 1)
        weights = np.full(n, d)
        weights[0] = weights[-1] = 0.5 * d
        return QuadratureRule(nodes, weights, (float(lo), float(hi)), TRAPEZOID)
    if not 0.0 <= shift < 1.0:
        raise InvalidArgumentError(f"shift must lie in [0, 1), got {shift}")
    d = (hi - lo) / n
    nodes = lo + (np.arange(n) + shift) * d
    return QuadratureRule(nodes, np.full(n, d), (float(lo), float(hi)), UNIFORM)


def velocity_average(rule: QuadratureRule, samples) -> np.ndarray:
    """<f> = sum_j w_j f_j / |interval|, taken along the last axis of ``samples``.

    Works on numpy arrays and on taped tensors alike.
    """
    if not hasattr(samples, "backward"):
        samples = np.asarray(samples)
    if samples.shape[-1] != rule.size:
        raise InvalidArgumentError(
            f"expected {rule.size} samples along the last axis, got {samples.shape[-1]}")
    return samples @ (rule.weights / rule.measure)


class TensorGrid:
    """Product of 1-3 axis rules; points are ordered with the last axis fastest."""

    def __init__(self, axes: Sequence[QuadratureRule]):
        if not 1 <= len(axes) <= 3:
            raise InvalidArgumentError("a tensor grid has between one and three axes")
        self.axes = tuple(axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    def points(self) -> np.ndarray:
        """(N, n_axes) array of node coordinates."""
        mesh = np.meshgrid(*[a.nodes for a in self.axes], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def weights(self) -> np.ndarray:
        """Flattened product weights matching :meth:`points`."""
        w = self.axes[0].weights
        for axis in self.axes[1:]:
            w = np.multiply.outer(w, axis.weights)
        return np.asarray(w).ravel()

    def integrate(self, values) -> float:
        values = np.asarray(values).reshape(-1)
        return float(values @ self.weights())


def trapezoid_rule(nodes) -> QuadratureRule:
    """Composite trapezoid weights on arbitrary strictly increasing nodes."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
        raise InvalidArgumentError("trapezoid nodes must be strictly increasing, at least two")
    h = np.diff(nodes)
    weights = np.zeros_like(nodes)
    weights[:-1] += 0.5 * h
    weights[1:] += 0.5 * h
    return QuadratureRule(nodes, weights, (float(nodes[0]), float(nodes[-1])), TRAPEZOID)
