#!/usr/bin/env python3
"""
Boundary-value problem descriptions and the collocation sets they are trained on.

1D problems live on x in [0, 1] with velocity v in [-1, 1]; faces are ``left`` (x=0)
and ``right`` (x=1). 2D problems live on [-1, 1]^2 with angle alpha in [0, 2 pi), and
add ``bottom`` (y=-1) and ``top`` (y=1). Inflow data on a face is a callable of
the velocity (1D) or of the along-face coordinate and the angle (2D).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..neural.jets import Jet, constant_jet
from ..numerics.quadrature import (QuadratureRule, TensorGrid, gauss_legendre, trapezoid_rule,
                                   uniform_rule)
from ..numerics.scattering import ISOTROPIC, KernelSpec, ScatteringOperator
from ..utils.errors import InvalidArgumentError
from ..utils.logger import get_logger

FACES_1D = ("left", "right")
FACES_2D = ("left", "right", "bottom", "top")

# direction of -n, i.e. the centre of the inflow half-circle of each 2D face
_INFLOW_CENTRE = {"left": 0.0, "right": np.pi, "bottom": 0.5 * np.pi, "top": 1.5 * np.pi}


class ConstantEpsilon:
    """Uniform Knudsen number."""

    def __init__(self, value: float):
        if not value > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {value}")
        self.value = float(value)

    def __call__(self, x) -> np.ndarray:
        return np.full(np.shape(x), self.value)

    def derivative(self, x) -> np.ndarray:
        return np.zeros(np.shape(x))

    @property
    def scale(self) -> float:
        return self.value

    def __repr__(self):
        return f"ConstantEpsilon({self.value:g})"


class LogisticEpsilon:
    """
    eps(x) = (1 + e^{-a(x-1/2)}) / (b + 1 + e^{-a(x-1/2)}).

    This is 1/sigma(x) for sigma(x) = 1 + b / (1 + e^{-a(x-1/2)}); b = 0 gives eps = 1.
    """

    def __init__(self, a: float, b: float):
        if b < 0:
            raise InvalidArgumentError("logistic epsilon needs b >= 0")
        self.a = float(a)
        self.b = float(b)

    def _e(self, x):
        return np.exp(-self.a * (np.asarray(x, dtype=float) - 0.5))

    def __call__(self, x) -> np.ndarray:
        e = self._e(x)
        return (1.0 + e) / (self.b + 1.0 + e)

    def derivative(self, x) -> np.ndarray:
        e = self._e(x)
        return -self.a * self.b * e / (self.b + 1.0 + e) ** 2

    def sigma(self, x) -> np.ndarray:
        return 1.0 / self(x)

    @property
    def scale(self) -> float:
        return float(self(0.5))

    def __repr__(self):
        return f"LogisticEpsilon(a={self.a:g}, b={self.b:g})"


EpsilonProfile = Union[ConstantEpsilon, LogisticEpsilon]


def _as_profile(epsilon) -> EpsilonProfile:
    if isinstance(epsilon, (ConstantEpsilon, LogisticEpsilon)):
        return epsilon
    return ConstantEpsilon(float(epsilon))


@dataclass
class ProblemSpec:
    """
    One steady RTE boundary-value problem

        eps v . grad f = sigma_s L f - eps^2 sigma_a f + eps^2 G   in the domain,
        f = phi                                                   on the inflow boundary.

    ``sigma_s``/``sigma_a`` take the spatial coordinates, ``source`` takes the spatial
    coordinates and the velocity (or angle). ``None`` means sigma_s = 1, sigma_a = 0, G = 0.
    """
    dim: int
    epsilon: Union[float, EpsilonProfile]
    inflow: Dict[str, Callable]
    sigma_s: Optional[Callable] = None
    sigma_a: Optional[Callable] = None
    source: Optional[Callable] = None
    kernel: KernelSpec = field(default_factory=KernelSpec.isotropic)
    boundary_weights: Dict[str, float] = field(default_factory=dict)
    sigma_bounds: Tuple[float, float] = (1e-8, 1e8)
    name: str = "problem"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgumentError(f"problem dimension must be 1 or 2, got {self.dim}")
        self.epsilon = _as_profile(self.epsilon)
        if self.dim == 2 and not isinstance(self.epsilon, ConstantEpsilon):
            raise InvalidArgumentError("2D problems take a constant epsilon")
        if self.dim == 1 and self.kernel.kind != ISOTROPIC:
            raise InvalidArgumentError("1D velocity problems support the isotropic kernel only")
        unknown = set(self.inflow) - set(self.faces)
        if unknown:
            raise InvalidArgumentError(f"unknown faces {sorted(unknown)} for a {self.dim}D problem")
        for face, w in self.boundary_weights.items():
            if face not in self.faces or not w > 0:
                raise InvalidArgumentError(f"bad boundary weight {face}={w}")

    @property
    def faces(self) -> Tuple[str, ...]:
        return FACES_1D if self.dim == 1 else FACES_2D

    @property
    def domain(self) -> Tuple[Tuple[float, float], ...]:
        return ((0.0, 1.0),) if self.dim == 1 else ((-1.0, 1.0), (-1.0, 1.0))

    @property
    def eps(self) -> float:
        """Representative Knudsen number (the constant value when uniform)."""
        return self.epsilon.scale

    def face_weight(self, face: str) -> float:
        return float(self.boundary_weights.get(face, 1.0))

    def sigma_s_at(self, *coords) -> np.ndarray:
        shape = np.broadcast(*coords).shape
        if self.sigma_s is None:
            return np.ones(shape)
        return np.broadcast_to(np.asarray(self.sigma_s(*coords), dtype=float), shape)

    def sigma_a_at(self, *coords) -> np.ndarray:
        shape = np.broadcast(*coords).shape
        if self.sigma_a is None:
            return np.zeros(shape)
        return np.broadcast_to(np.asarray(self.sigma_a(*coords), dtype=float), shape)

    def source_at(self, *coords_and_velocity) -> np.ndarray:
        shape = np.broadcast(*coords_and_velocity).shape
        if self.source is None:
            return np.zeros(shape)
        return np.broadcast_to(np.asarray(self.source(*coords_and_velocity), dtype=float), shape)

    def inflow_at(self, face: str, *args) -> np.ndarray:
        shape = np.broadcast(*args).shape
        data = self.inflow.get(face)
        if data is None:
            return np.zeros(shape)
        return np.broadcast_to(np.asarray(data(*args), dtype=float), shape)

    def check_coefficients(self, sigma_s: np.ndarray, sigma_a: np.ndarray) -> None:
        lo, hi = self.sigma_bounds
        if np.any(sigma_s < lo) or np.any(sigma_s > hi):
            raise InvalidArgumentError(
                f"sigma_s leaves [{lo:g}, {hi:g}] on the sampled nodes")
        if np.any(sigma_a < 0) or np.any(sigma_a > hi):
            raise InvalidArgumentError(f"sigma_a leaves [0, {hi:g}] on the sampled nodes")


def inflow_velocities_1d(face: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples of the inflow half (0, 1] at x=0, [-1, 0) at x=1."""
    u = 1.0 - rng.uniform(size=n)
    return u if face == "left" else -u


def inflow_angles_2d(face: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples of the open half-circle {v . n < 0} of a 2D face, in [0, 2 pi)."""
    u = rng.uniform(size=n)
    while np.any(u == 0.0):
        u[u == 0.0] = rng.uniform(size=int(np.sum(u == 0.0)))
    return np.mod(_INFLOW_CENTRE[face] - 0.5 * np.pi + np.pi * u, 2.0 * np.pi)


def outward_normal(face: str) -> np.ndarray:
    return {"left": np.array([-1.0, 0.0]), "right": np.array([1.0, 0.0]),
            "bottom": np.array([0.0, -1.0]), "top": np.array([0.0, 1.0])}[face]


@dataclass
class BoundarySet:
    """Inflow samples of one face with their data; every sample has weight 1/N."""
    face: str
    points: np.ndarray
    data: np.ndarray
    weight: float

    @property
    def size(self) -> int:
        return self.points.shape[0]


class TrainingSet:
    """
    Interior tensor grid (closed trapezoid in space, Gauss in v or uniform mid-point
    angles) plus seeded inflow samples per face.
    """

    def __init__(self, problem: ProblemSpec, space_rules: Sequence[QuadratureRule],
                 velocity_rule: QuadratureRule, boundary: Dict[str, BoundarySet]):
        self.problem = problem
        self.space_rules = tuple(space_rules)
        self.velocity_rule = velocity_rule
        self.boundary = boundary
        self.scattering = ScatteringOperator(problem.kernel, velocity_rule)

        self.space_grid = TensorGrid(self.space_rules)
        self.grid = TensorGrid(self.space_rules + (velocity_rule,))
        self.space_points = self.space_grid.points()
        self.points = self.grid.points()
        self.space_shape = self.space_grid.shape
        self.shape = self.grid.shape
        self.space_weights = self.space_grid.weights().reshape(self.space_shape)

        # coefficient tables on the interior nodes
        mesh = np.meshgrid(*[r.nodes for r in self.space_rules], indexing="ij")
        full = np.meshgrid(*[r.nodes for r in self.grid.axes], indexing="ij")
        self.sigma_s = np.array(problem.sigma_s_at(*mesh))
        self.sigma_a = np.array(problem.sigma_a_at(*mesh))
        self.source = np.array(problem.source_at(*full))
        problem.check_coefficients(self.sigma_s, self.sigma_a)
        x = self.space_rules[0].nodes
        self.eps = np.array(problem.epsilon(x))
        self.eps_dx = np.array(problem.epsilon.derivative(x))

    @classmethod
    def build(cls, problem: ProblemSpec, n_x: int, n_v: int, n_b: int, seed: int,
              n_y: Optional[int] = None, x_nodes: Optional[np.ndarray] = None,
              face_points: Optional[int] = None) -> "TrainingSet":
        """
        ``x_nodes`` replaces the uniform x grid (layer-refined collocation);
        ``face_points`` is the number of along-face positions per 2D face.
        """
        if min(n_x, n_v, n_b) < 2:
            raise InvalidArgumentError("collocation counts must be at least 2")
        rng = np.random.default_rng(seed)
        (x_lo, x_hi), *rest = problem.domain
        x_rule = trapezoid_rule(x_nodes) if x_nodes is not None else uniform_rule(
            n_x, x_lo, x_hi, closed=True)
        if problem.dim == 1:
            v_rule = gauss_legendre(n_v, -1.0, 1.0)
            space_rules = (x_rule,)
        else:
            y_lo, y_hi = rest[0]
            y_rule = uniform_rule(n_y or n_x, y_lo, y_hi, closed=True)
            v_rule = uniform_rule(n_v, 0.0, 2.0 * np.pi, shift=0.5)
            space_rules = (x_rule, y_rule)

        boundary = {}
        for face in problem.faces:
            if problem.dim == 1:
                x_b = 0.0 if face == "left" else 1.0
                v = inflow_velocities_1d(face, n_b, rng)
                points = np.column_stack([np.full(n_b, x_b), v])
                data = problem.inflow_at(face, v)
            else:
                along = np.linspace(-1.0, 1.0, face_points or len(space_rules[1].nodes))
                alpha = inflow_angles_2d(face, along.size * n_b, rng)
                s = np.repeat(along, n_b)
                fixed = {"left": -1.0, "right": 1.0, "bottom": -1.0, "top": 1.0}[face]
                if face in ("left", "right"):
                    points = np.column_stack([np.full(s.size, fixed), s, alpha])
                else:
                    points = np.column_stack([s, np.full(s.size, fixed), alpha])
                data = problem.inflow_at(face, s, alpha)
            boundary[face] = BoundarySet(face, points, np.array(data, dtype=float),
                                         1.0 / points.shape[0])

        trainset = cls(problem, space_rules, v_rule, boundary)
        get_logger().debug(f"training set for {problem.name}: interior {trainset.shape}, "
                           f"boundary {[b.size for b in boundary.values()]}")
        return trainset

    @property
    def dim(self) -> int:
        return self.problem.dim

    @property
    def velocity_weights(self) -> np.ndarray:
        """Weights of the normalized velocity average, summing to one."""
        return self.velocity_rule.weights / self.velocity_rule.measure

    @property
    def interior_weights(self) -> np.ndarray:
        """w_ij = spatial weight times normalized velocity weight, shaped like the grid."""
        return self.space_weights[..., None] * self.velocity_weights


class AnalyticField:
    """
    A closed-form candidate that answers ``jet`` like a network does.

    ``value`` maps an (N, n_in) input array to (N,); ``d1``/``d2`` hold first and diagonal
    second partials per input coordinate, ``None`` meaning identically zero.
    """

    def __init__(self, value: Callable, d1: Sequence[Optional[Callable]] = (),
                 d2: Sequence[Optional[Callable]] = ()):
        self.value = value
        self.d1 = list(d1)
        self.d2 = list(d2)

    @classmethod
    def constant(cls, c: float) -> "AnalyticField":
        return cls(lambda p: np.full(np.asarray(p).shape[0], float(c)))

    def __call__(self, inputs) -> np.ndarray:
        return np.asarray(self.value(np.atleast_2d(inputs)), dtype=float)

    def _partial(self, table, coord, inputs):
        fn = table[coord] if coord < len(table) else None
        return None if fn is None else np.asarray(fn(inputs), dtype=float)

    def jet(self, inputs, active_coords: Sequence[int] = (), order: int = 1) -> Jet:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        d1 = [self._partial(self.d1, c, inputs) for c in active_coords]
        d2 = [self._partial(self.d2, c, inputs) for c in active_coords] if order == 2 else []
        return constant_jet(self(inputs), d1, d2)


@dataclass
class SolutionBundle:
    """
    Trained (or analytic) fields of one problem: ``f`` alone for the vanilla loss,
    ``rho``/``g`` for the macro-micro losses, plus the frozen corrector when present.
    """
    problem: ProblemSpec
    rho: Optional[object] = None
    g: Optional[object] = None
    f: Optional[object] = None
    corrector: Optional[object] = None
    temperature: Optional[object] = None

    def density(self, space_points: np.ndarray, velocity_rule: QuadratureRule) -> np.ndarray:
        """<f>(x) on the given spatial points, averaging the kinetic fields in velocity."""
        return self.evaluate(space_points, velocity_rule.nodes) @ (
            velocity_rule.weights / velocity_rule.measure)

    def evaluate(self, space_points: np.ndarray, velocities: np.ndarray) -> np.ndarray:
        """f on the product of spatial points and velocities, shape (N_space, N_v)."""
        space_points = np.atleast_2d(np.asarray(space_points, dtype=float))
        velocities = np.asarray(velocities, dtype=float)
        n_s, n_v = space_points.shape[0], velocities.size
        pts = np.column_stack([np.repeat(space_points, n_v, axis=0),
                               np.tile(velocities, n_s)])
        if self.f is not None:
            return self.f(pts).reshape(n_s, n_v)
        if self.rho is None or self.g is None:
            raise InvalidArgumentError("solution bundle needs f or both rho and g")
        x = space_points[:, 0]
        eps = self.problem.epsilon(x)[:, None]
        out = self.rho(space_points)[:, None] + eps * self.g(pts).reshape(n_s, n_v)
        if self.corrector is not None:
            out = out + self.corrector.evaluate(pts).reshape(n_s, n_v)
        return out
