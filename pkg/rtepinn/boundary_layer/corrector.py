#!/usr/bin/env python3
"""
Boundary-layer correctors built from half-space solutions.

    Gamma(x, v) = f_BL(z(x), v) - f_BL_inf,     z(x) = (1/eps) int_0^x sigma_s   (1D)
    Gamma(x, y, a) = f_BL((x + 1)/eps, y, a) - f_BL_inf(y)                      (2D)

Beyond the truncation (z >= Z) f_BL is extended by its far-field value, so Gamma is
exactly zero there. In 2D Gamma is piecewise linear in y between the half-space nodes.
"""

import json
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .halfspace import HalfSpaceFamily, HalfSpaceSolution, HalfSpaceSpec
from ..neural.checkpoint import load_network, save_network
from ..physics.problem import AnalyticField
from ..utils.errors import InvalidArgumentError, TapeError
from ..utils.logger import get_logger

_STRETCH_SAMPLES = 4001


class GammaCorrector:
    """Frozen 1D corrector; evaluation takes (N, 2) points (x, v)."""

    dim = 1

    def __init__(self, solution: HalfSpaceSolution, epsilon: float, z_max: float,
                 sigma_s: Optional[Callable] = None):
        if not epsilon > 0:
            raise InvalidArgumentError("corrector needs a positive epsilon")
        self.network = solution.network
        self.f_inf = float(solution.f_inf)
        self.epsilon = float(epsilon)
        self.z_max = float(z_max)
        self.sigma_s = sigma_s
        if sigma_s is not None:
            xs = np.linspace(0.0, 1.0, _STRETCH_SAMPLES)
            self._xs = xs
            self._optical_depth = cumulative_trapezoid(
                np.broadcast_to(sigma_s(xs), xs.shape), xs, initial=0.0)

    @classmethod
    def from_solution(cls, solution: HalfSpaceSolution, epsilon: float,
                      sigma_s: Optional[Callable] = None) -> "GammaCorrector":
        return cls(solution, epsilon, solution.spec.z_max, sigma_s)

    def rescaled(self, epsilon: float) -> "GammaCorrector":
        """The same half-space solution stretched for another Knudsen number."""
        return GammaCorrector(HalfSpaceSolution(self.network, self.f_inf, _spec(1, self.z_max)),
                              epsilon, self.z_max, self.sigma_s)

    def stretch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise TapeError("corrector evaluated outside its stretch-map domain [0, 1]")
        if self.sigma_s is None:
            return x / self.epsilon
        return np.interp(x, self._xs, self._optical_depth) / self.epsilon

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        z = self.stretch(points[:, 0])
        out = np.zeros(points.shape[0])
        inside = z < self.z_max
        if np.any(inside):
            pts = np.column_stack([z[inside], points[inside, 1]])
            out[inside] = self.network(pts) - self.f_inf
        return out

    def __call__(self, x, v) -> np.ndarray:
        x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
        return self.evaluate(np.column_stack([x.ravel(), v.ravel()])).reshape(x.shape)

    def get_status(self) -> dict:
        return {'dim': 1, 'f_inf': self.f_inf, 'epsilon': self.epsilon, 'z_max': self.z_max,
                'layer_width': self.z_max * self.epsilon}

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {'dim': 1, 'epsilon': self.epsilon, 'z_max': self.z_max, 'f_inf': [self.f_inf]}
        _save_networks(directory, [self.network], meta)
        return directory


class GammaCorrector2D:
    """Frozen 2D corrector on [-1, 1]^2; evaluation takes (N, 3) points (x, y, a)."""

    dim = 2

    def __init__(self, family: HalfSpaceFamily, epsilon: float, z_max: float):
        if not epsilon > 0:
            raise InvalidArgumentError("corrector needs a positive epsilon")
        self.y_grid = np.asarray(family.y_grid, dtype=float)
        self.networks = [s.network for s in family.solutions]
        self.f_inf = family.f_inf
        self.epsilon = float(epsilon)
        self.z_max = float(z_max)

    @classmethod
    def from_family(cls, family: HalfSpaceFamily, epsilon: float) -> "GammaCorrector2D":
        return cls(family, epsilon, family.solutions[0].spec.z_max)

    def rescaled(self, epsilon: float) -> "GammaCorrector2D":
        spec = _spec(2, self.z_max)
        family = HalfSpaceFamily(self.y_grid, [HalfSpaceSolution(net, float(f), spec)
                                               for net, f in zip(self.networks, self.f_inf)])
        return GammaCorrector2D(family, epsilon, self.z_max)

    def stretch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < -1.0 - 1e-12) or np.any(x > 1.0 + 1e-12):
            raise TapeError("corrector evaluated outside its stretch-map domain [-1, 1]")
        return (x + 1.0) / self.epsilon

    def _node_values(self, points: np.ndarray):
        """Gamma_j at every point for every y node, with the in-layer mask."""
        z = self.stretch(points[:, 0])
        inside = z < self.z_max
        values = np.zeros((self.y_grid.size, points.shape[0]))
        if np.any(inside):
            pts = np.column_stack([z[inside], points[inside, 2]])
            for j, net in enumerate(self.networks):
                values[j, inside] = net(pts) - self.f_inf[j]
        return values, inside

    def _interpolate_y(self, node_values: np.ndarray, y: np.ndarray) -> np.ndarray:
        if np.any(y < self.y_grid[0] - 1e-12) or np.any(y > self.y_grid[-1] + 1e-12):
            raise TapeError("corrector evaluated outside its y grid")
        k = np.clip(np.searchsorted(self.y_grid, y, side="right") - 1, 0, self.y_grid.size - 2)
        t = (y - self.y_grid[k]) / (self.y_grid[k + 1] - self.y_grid[k])
        cols = np.arange(y.size)
        return (1.0 - t) * node_values[k, cols] + t * node_values[k + 1, cols]

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values, _ = self._node_values(points)
        return self._interpolate_y(values, points[:, 1])

    def evaluate_dy(self, points) -> np.ndarray:
        """d/dy Gamma: centred differences across y nodes (one-sided at the ends)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values, _ = self._node_values(points)
        dy = np.gradient(values, self.y_grid, axis=0, edge_order=1)
        return self._interpolate_y(dy, points[:, 1])

    def __call__(self, x, y, a) -> np.ndarray:
        x, y, a = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (x, y, a)))
        return self.evaluate(np.column_stack([x.ravel(), y.ravel(), a.ravel()])).reshape(x.shape)

    def get_status(self) -> dict:
        return {'dim': 2, 'y_nodes': int(self.y_grid.size), 'epsilon': self.epsilon,
                'z_max': self.z_max, 'f_inf_range': [float(self.f_inf.min()),
                                                     float(self.f_inf.max())]}

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {'dim': 2, 'epsilon': self.epsilon, 'z_max': self.z_max,
                'f_inf': self.f_inf.tolist(), 'y_grid': self.y_grid.tolist()}
        _save_networks(directory, self.networks, meta)
        return directory


def _save_networks(directory: Path, networks: Sequence, meta: dict) -> None:
    files = []
    for j, net in enumerate(networks):
        name = f"f_bl_{j:03d}.txt"
        if isinstance(net, AnalyticField):
            name = None
        else:
            save_network(directory / name, net, metadata={'corrector_index': j})
        files.append(name)
    meta = dict(meta, networks=files)
    (directory / "corrector.json").write_text(json.dumps(meta, indent=2))
    get_logger().log_solver_event("corrector", "saved", str(directory))


def load_corrector(directory):
    """Rebuild a saved corrector; missing network files stand for zero half-space solutions."""
    directory = Path(directory)
    meta = json.loads((directory / "corrector.json").read_text())
    solutions = []
    for name, f_inf in zip(meta["networks"], meta["f_inf"]):
        net = AnalyticField.constant(0.0) if name is None else load_network(directory / name)[0]
        solutions.append(HalfSpaceSolution(net, float(f_inf),
                                           _spec(meta["dim"], meta["z_max"])))
    if meta["dim"] == 1:
        return GammaCorrector(solutions[0], meta["epsilon"], meta["z_max"])
    family = HalfSpaceFamily(np.asarray(meta["y_grid"]), solutions)
    return GammaCorrector2D(family, meta["epsilon"], meta["z_max"])


def _no_inflow(*args):
    return 0.0


def _spec(dim: int, z_max: float) -> HalfSpaceSpec:
    """Placeholder spec for solutions rebuilt from saved networks."""
    return HalfSpaceSpec(inflow=_no_inflow, dim=dim, z_max=z_max)


def gamma_eval(corrector, points) -> np.ndarray:
    """Gamma at (x, v) or (x, y, a) points."""
    return corrector.evaluate(points)


def gamma_dy(corrector, points) -> np.ndarray:
    if corrector.dim != 2:
        raise InvalidArgumentError("d/dy Gamma exists for 2D correctors only")
    return corrector.evaluate_dy(points)
