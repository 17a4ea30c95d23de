#!/usr/bin/env python3
"""
Chandrasekhar H-functions of the conservative half-space problem, and the far-field
constants and reflected traces they give in closed form.

1D (v in [0, 1]):       1/H(v) = int_0^1 H(w) w / (2 (v + w)) dw
2D (inflow angles):     1/H(a) = int_{inflow} H(t) cos t / (cos a + cos t) dt,
                        inflow = [0, pi/2] U [3 pi/2, 2 pi]
"""

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..numerics.quadrature import gauss_legendre
from ..utils.errors import InvalidArgumentError, NumericalFailure
from ..utils.logger import get_logger

Inflow = Union[Callable, np.ndarray, float]
DAMPING = 0.5


@dataclass
class HFunctionTable:
    """
    H sampled on the nodes of the rule used in its defining integral.

    The 1D table satisfies H >= 1 on every node. The 2D identity, normalized as in the
    module docstring, does not bound its solution below by one: at 96 nodes it
    runs from about 0.399 to 1.011. With the 1/sqrt(pi) factor of the 2D far-field
    constant, a constant inflow still maps to itself.
    """
    dim: int
    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    residual: float
    iterations: int = 0

    def __post_init__(self):
        self._interp = PchipInterpolator(self.nodes, self.values, extrapolate=True)

    def _reduced(self, arg) -> np.ndarray:
        """Map a velocity (1D) or angle (2D) to the table's abscissa."""
        arg = np.asarray(arg, dtype=float)
        if self.dim == 1:
            return np.abs(arg)
        return np.arccos(np.clip(np.abs(np.cos(arg)), 0.0, 1.0))

    def __call__(self, arg) -> np.ndarray:
        """H at |v| (1D) or at the inflow angle sharing |cos a| (2D)."""
        return self._interp(self._reduced(arg))

    @property
    def mu(self) -> np.ndarray:
        """Direction cosines of the table nodes."""
        return self.nodes if self.dim == 1 else np.cos(self.nodes)

    def integral(self, mu: np.ndarray) -> np.ndarray:
        """Right-hand side of the defining identity at direction cosines ``mu``."""
        mu = np.asarray(mu, dtype=float)[..., None]
        if self.dim == 1:
            return np.sum(self.weights * self.values * self.nodes / (2.0 * (mu + self.nodes)),
                          axis=-1)
        c = np.cos(self.nodes)
        return np.sum(self.weights * self.values * c / (mu + c), axis=-1)

    def identity_residual(self) -> float:
        """sup |1/H - integral| over the table nodes."""
        return float(np.max(np.abs(1.0 / self.values - self.integral(self.mu))))

    def get_status(self) -> dict:
        return {
            'dim': self.dim,
            'nodes': int(self.nodes.size),
            'residual': self.residual,
            'iterations': self.iterations,
            'h_min': float(self.values.min()),  # below 1 only for the 2D table
            'h_max': float(self.values.max()),
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["node", "H"])
            for node, value in zip(self.nodes, self.values):
                writer.writerow([f"{node:.17g}", f"{value:.17g}"])

    @classmethod
    def read_csv(cls, path, dim: int) -> "HFunctionTable":
        """Re-read a table written by :meth:`write_csv`; weights are those of its Gauss rule."""
        with open(path, newline="") as f:
            rows = list(csv.reader(f))[1:]
        nodes = np.array([float(r[0]) for r in rows])
        values = np.array([float(r[1]) for r in rows])
        rule = _rule(dim, nodes.size)
        if not np.allclose(rule.nodes, nodes, rtol=0.0, atol=1e-13):
            raise InvalidArgumentError(f"{path} does not hold Gauss nodes of a {dim}D table")
        table = cls(dim, nodes, values, _weights(dim, rule), float("nan"))
        table.residual = table.identity_residual()
        return table


def _rule(dim: int, n: int):
    return gauss_legendre(n, 0.0, 1.0) if dim == 1 else gauss_legendre(n, 0.0, 0.5 * np.pi)


def _weights(dim: int, rule) -> np.ndarray:
    # the 2D inflow set is two mirror-image quarter circles
    return rule.weights if dim == 1 else 2.0 * rule.weights


def _chandrasekhar(dim: int, n_nodes: int, tol: float, max_iter: int) -> HFunctionTable:
    if not tol > 0:
        raise InvalidArgumentError("H-function tolerance must be positive")
    rule = _rule(dim, n_nodes)
    table = HFunctionTable(dim, rule.nodes, np.ones(n_nodes), _weights(dim, rule), np.inf)
    logger = get_logger()
    change = np.inf
    for k in range(1, max_iter + 1):
        new = (1.0 - DAMPING) * table.values + DAMPING / table.integral(table.mu)
        change = float(np.max(np.abs(new - table.values)))
        table.values = new
        if change < tol:
            table = HFunctionTable(dim, table.nodes, table.values, table.weights, 0.0, k)
            table.residual = table.identity_residual()
            logger.log_solver_event("hfunction", f"{dim}D converged",
                                    f"iterations={k} residual={table.residual:.3e}")
            return table
    raise NumericalFailure(f"{dim}D H-function iteration did not converge",
                           iteration=max_iter, residual=change, phase="hfunction")


def chandrasekhar_h_1d(n_nodes: int = 96, tol: float = 1e-12,
                       max_iter: int = 10000) -> HFunctionTable:
    """Damped fixed point H <- (1 - l) H + l / integral, from H = 1, on Gauss nodes of [0, 1]."""
    return _chandrasekhar(1, n_nodes, tol, max_iter)


def chandrasekhar_h_2d(n_nodes: int = 96, tol: float = 1e-12,
                       max_iter: int = 10000) -> HFunctionTable:
    """Same iteration for the angular identity; nodes are Gauss angles on [0, pi/2]."""
    return _chandrasekhar(2, n_nodes, tol, max_iter)


def _on_nodes(phi: Inflow, *args) -> np.ndarray:
    if callable(phi):
        return np.broadcast_to(np.asarray(phi(*args), dtype=float), np.broadcast(*args).shape)
    return np.broadcast_to(np.asarray(phi, dtype=float), np.broadcast(*args).shape)


def _inflow_angles(table: HFunctionTable) -> np.ndarray:
    """Both quarter-circle images of the table nodes: (t, 2 pi - t)."""
    return np.stack([table.nodes, 2.0 * np.pi - table.nodes])


def f_bl_infinity_1d(phi: Inflow, table: HFunctionTable) -> float:
    """(sqrt(3)/2) int_0^1 phi(v) H(v) v dv."""
    _require(table, 1)
    data = _on_nodes(phi, table.nodes)
    return float(0.5 * np.sqrt(3.0) * np.sum(table.weights * data * table.values * table.nodes))


def reflection_bc_1d(phi: Inflow, table: HFunctionTable, v) -> np.ndarray:
    """
    Outgoing trace f(0, v) for v in [-1, 0):

        (1/2) H(|v|) int_0^1 phi(w) H(w) w / (w + |v|) dw.
    """
    _require(table, 1)
    v = np.asarray(v, dtype=float)
    if np.any(v >= 0) or np.any(v < -1):
        raise InvalidArgumentError("reflected traces are defined for v in [-1, 0)")
    mu = np.abs(v)[..., None]
    data = _on_nodes(phi, table.nodes)
    moment = np.sum(table.weights * data * table.values * table.nodes / (table.nodes + mu),
                    axis=-1)
    return 0.5 * table(np.abs(v)) * moment


def f_bl_infinity_2d(phi: Callable, table: HFunctionTable, y) -> np.ndarray:
    """(1/sqrt(pi)) int_{inflow} phi(y, a) cos a H(a) da, vectorized over ``y``."""
    _require(table, 2)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    angles = _inflow_angles(table)
    weights = 0.5 * table.weights * np.cos(table.nodes) * table.values
    out = np.empty(y.shape)
    for k, yk in np.ndenumerate(y):
        data = _on_nodes(phi, yk, angles)
        out[k] = np.sum(weights * data) / np.sqrt(np.pi)
    return out


def reflection_bc_2d(phi: Callable, table: HFunctionTable, y: float, beta) -> np.ndarray:
    """
    Outgoing trace f(0, y, beta) for cos(beta) < 0. With a the mirror image of beta
    (a = pi - beta, reduced mod 2 pi):

        H(a) int_{inflow} phi(y, t) cos t H(t) / (cos a + cos t) dt.
    """
    _require(table, 2)
    beta = np.asarray(beta, dtype=float)
    if np.any(np.cos(beta) >= 0):
        raise InvalidArgumentError("reflected 2D traces need cos(beta) < 0")
    mirror = np.mod(np.pi - beta, 2.0 * np.pi)
    mu = np.cos(mirror)[..., None, None]
    angles = _inflow_angles(table)
    c = np.cos(table.nodes)
    data = _on_nodes(phi, y, angles)
    moment = np.sum(0.5 * table.weights * data * c * table.values / (mu + c), axis=(-2, -1))
    return table(mirror) * moment


def _require(table: HFunctionTable, dim: int) -> None:
    if table.dim != dim:
        raise InvalidArgumentError(f"expected a {dim}D H table, got {table.dim}D")


_CACHE = {}


def cached_table(dim: int, n_nodes: int = 96, tol: float = 1e-12,
                 max_iter: int = 10000) -> HFunctionTable:
    """Tables are pure functions of their settings; reuse them within a process."""
    key = (dim, n_nodes, tol, max_iter)
    if key not in _CACHE:
        solver = chandrasekhar_h_1d if dim == 1 else chandrasekhar_h_2d
        _CACHE[key] = solver(n_nodes, tol, max_iter)
    return _CACHE[key]
