#!/usr/bin/env python3
"""
Reference meshes and sampled fields.

A Field holds values on a tensor grid together with the axis nodes and, when known,
the quadrature weights of each axis. Fields round-trip through CSV (coordinates then
value, 17 significant digits) and through an ``.npz`` grid whose ``header`` array
stores the dimension count, the bounds and the node counts.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from ..numerics.quadrature import QuadratureRule, gauss_legendre, trapezoid_rule
from ..utils.errors import ConfigError, InvalidArgumentError, NumericalFailure

VELOCITY_AXES = ("v", "alpha")


def split_nodes(eps: float, n_inner: int = 150, n_outer: int = 50) -> np.ndarray:
    """``n_inner`` nodes on [0, eps) followed by ``n_outer`` on [eps, 1]."""
    if not 0.0 < eps < 1.0:
        raise InvalidArgumentError("split mesh needs 0 < eps < 1")
    return np.concatenate([np.linspace(0.0, eps, n_inner, endpoint=False),
                           np.linspace(eps, 1.0, n_outer)])


@dataclass
class Mesh1D:
    """x nodes on [0, 1] with a Gauss velocity rule on [-1, 1]."""
    x: np.ndarray
    velocity_rule: QuadratureRule
    kind: str = "uniform"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim != 1 or self.x.size < 2 or np.any(np.diff(self.x) <= 0):
            raise InvalidArgumentError("mesh nodes must be strictly increasing")
        if self.velocity_rule.size % 2:
            raise InvalidArgumentError("discrete ordinates need an even velocity count")

    @classmethod
    def uniform(cls, n_x: int = 200, n_v: int = 80) -> "Mesh1D":
        return cls(np.linspace(0.0, 1.0, n_x), gauss_legendre(n_v, -1.0, 1.0), "uniform")

    @classmethod
    def split(cls, eps: float, n_inner: int = 150, n_outer: int = 50,
              n_v: int = 80) -> "Mesh1D":
        """``n_inner`` nodes on [0, eps) and ``n_outer`` on [eps, 1]."""
        return cls(split_nodes(eps, n_inner, n_outer), gauss_legendre(n_v, -1.0, 1.0), "split")

    @classmethod
    def layered(cls, eps: float, width: float = 10.0, n_left: int = 300, n_mid: int = 400,
                n_right: int = 150, n_v: int = 80) -> "Mesh1D":
        """
        Split mesh refined at both ends: ``n_left`` nodes on [0, width*eps),
        ``n_mid`` on the interior and ``n_right`` on [1 - width*eps, 1].
        """
        layer = width * eps
        if not 0.0 < 2.0 * layer < 1.0:
            raise InvalidArgumentError(f"layers of width {layer:g} do not fit in [0, 1]")
        x = np.concatenate([np.linspace(0.0, layer, n_left, endpoint=False),
                            np.linspace(layer, 1.0 - layer, n_mid, endpoint=False),
                            np.linspace(1.0 - layer, 1.0, n_right)])
        return cls(x, gauss_legendre(n_v, -1.0, 1.0), "layered")

    @property
    def n_x(self) -> int:
        return self.x.size

    @property
    def n_v(self) -> int:
        return self.velocity_rule.size

    @property
    def v(self) -> np.ndarray:
        return self.velocity_rule.nodes

    @property
    def x_rule(self) -> QuadratureRule:
        return trapezoid_rule(self.x)

    @property
    def average_weights(self) -> np.ndarray:
        return self.velocity_rule.weights / self.velocity_rule.measure


@dataclass
class Field:
    """Values on the tensor product of ``axes`` (in insertion order)."""
    values: np.ndarray
    axes: Dict[str, np.ndarray]
    weights: Dict[str, np.ndarray] = field(default_factory=dict)
    name: str = "f"
    info: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.axes = {k: np.asarray(a, dtype=float) for k, a in self.axes.items()}
        if self.values.shape != self.shape:
            raise InvalidArgumentError(
                f"field values {self.values.shape} do not match axes {self.shape}")
        if not np.all(np.isfinite(self.values)):
            raise NumericalFailure(f"field '{self.name}' holds non-finite values",
                                   phase="reference")

    @property
    def shape(self):
        return tuple(a.size for a in self.axes.values())

    @property
    def velocity_axis(self) -> Optional[str]:
        last = list(self.axes)[-1]
        return last if last in VELOCITY_AXES else None

    def axis_weights(self, name: str) -> np.ndarray:
        """Stored weights, else trapezoid weights on the nodes."""
        if name in self.weights:
            return np.asarray(self.weights[name], dtype=float)
        return trapezoid_rule(self.axes[name]).weights

    def grid_weights(self) -> np.ndarray:
        out = np.ones(())
        for name in self.axes:
            out = np.multiply.outer(out, self.axis_weights(name))
        return out

    def points(self) -> np.ndarray:
        """(N, d) coordinates in the order of ``values.ravel()``."""
        mesh = np.meshgrid(*self.axes.values(), indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def density(self) -> "Field":
        """Normalized average over the trailing velocity axis."""
        axis = self.velocity_axis
        if axis is None:
            raise InvalidArgumentError(f"field '{self.name}' has no velocity axis")
        w = self.axis_weights(axis)
        spatial = {k: a for k, a in self.axes.items() if k != axis}
        return Field(self.values @ (w / w.sum()), spatial,
                     {k: w_ for k, w_ in self.weights.items() if k != axis},
                     name=f"<{self.name}>", info=dict(self.info))

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(list(self.axes) + [self.name])
            for coords, value in zip(self.points(), self.values.ravel()):
                writer.writerow([f"{c:.17g}" for c in coords] + [f"{value:.17g}"])
        return path

    @classmethod
    def from_csv(cls, path) -> "Field":
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        axes = {}
        for k, name in enumerate(header[:-1]):
            # first-appearance order keeps the written (ij) ordering
            _, first = np.unique(body[:, k], return_index=True)
            axes[name] = body[np.sort(first), k]
        shape = tuple(a.size for a in axes.values())
        if int(np.prod(shape)) != body.shape[0]:
            raise ConfigError(f"{path} is not a full tensor grid")
        return cls(body[:, -1].reshape(shape), axes, name=header[-1])

    def to_npz(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        names = list(self.axes)
        header = np.array([len(names)]
                          + [v for a in self.axes.values() for v in (a[0], a[-1], a.size)],
                          dtype=float)
        arrays = {"header": header, "values": self.values,
                  "axis_names": np.array(names), "name": np.array(self.name)}
        arrays.update({f"axis_{k}": a for k, a in self.axes.items()})
        arrays.update({f"weights_{k}": w for k, w in self.weights.items()})
        np.savez(path, **arrays)
        return path

    @classmethod
    def from_npz(cls, path) -> "Field":
        with np.load(path) as data:
            names = [str(n) for n in data["axis_names"]]
            header = data["header"]
            if int(header[0]) != len(names):
                raise ConfigError(f"{path}: header does not match its axes")
            axes = {k: data[f"axis_{k}"] for k in names}
            weights = {k: data[f"weights_{k}"] for k in names if f"weights_{k}" in data.files}
            return cls(data["values"], axes, weights, name=str(data["name"]))
