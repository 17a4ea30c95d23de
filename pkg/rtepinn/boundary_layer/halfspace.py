#!/usr/bin/env python3
"""
Trained solutions of the truncated half-space (Milne) problem

    mu(v) d/dz f = <f> - f,   z in [0, Z],   f(0, v) = phi(v) for mu(v) > 0,

with the zero-flux condition <mu f> = 0. In 1D mu(v) = v on [-1, 1]; in 2D the
velocity is an angle a in [0, 2 pi) and mu = cos a, one problem per fixed y_j.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..neural.mlp import IDENTITY, SCALED_SIGMOID, MlpNetwork, MlpSpec, NetworkBundle
from ..numerics.quadrature import QuadratureRule, gauss_legendre, uniform_rule, velocity_average
from ..optim.history import AdamConfig, LbfgsConfig, OptimResult, StopRule
from ..optim.schedule import two_phase_train
from ..physics.losses import LossBreakdown, PinnObjective, breakdown_of, weighted_square
from ..physics.problem import AnalyticField
from ..utils.config_manager import get_config
from ..utils.errors import InvalidArgumentError, RtePinnError
from ..utils.logger import get_logger


@dataclass
class HalfSpaceSpec:
    """
    Discretization of one half-space problem. ``inflow`` takes the velocity (1D) or
    (y, angle) (2D); it is only sampled on the inflow half.
    """
    inflow: Callable
    dim: int = 1
    z_max: float = 10.0
    n_z: int = 400
    n_v: int = 40
    n_b: int = 60
    # C_a = output_margin * max|phi|; the output is tuned to the sup norm of the inflow and
    # the open range (-C_a, C_a) needs a margin above 1 to reach max|phi|
    output_margin: float = 1.2

    def __post_init__(self):
        if not self.z_max > 0:
            raise InvalidArgumentError("half-space truncation Z must be positive")
        if self.dim not in (1, 2):
            raise InvalidArgumentError("half-space problems are 1D or 2D")
        if min(self.n_z, self.n_v, self.n_b) < 2:
            raise InvalidArgumentError("half-space grid counts must be at least 2")
        if not self.output_margin >= 1.0:
            raise InvalidArgumentError("output_margin below 1 cannot reach the inflow sup norm")

    @classmethod
    def from_config(cls, inflow: Callable, dim: int = 1, section: Optional[dict] = None,
                    **overrides) -> "HalfSpaceSpec":
        """Grid settings from a [halfspace] section, the library one by default."""
        if section is None:
            section = get_config().get_section("halfspace")
        keys = ("z_max", "n_z", "n_v", "n_b", "output_margin")
        kwargs = {k: section[k] for k in keys if k in section}
        kwargs.update(overrides)
        return cls(inflow=inflow, dim=dim, **kwargs)

    @property
    def z_rule(self) -> QuadratureRule:
        # left-point sums with weight dz
        return uniform_rule(self.n_z, 0.0, self.z_max)

    @property
    def velocity_rule(self) -> QuadratureRule:
        if self.dim == 1:
            return gauss_legendre(self.n_v, -1.0, 1.0)
        return uniform_rule(self.n_v, 0.0, 2.0 * np.pi, shift=0.5)

    def mu(self, velocity) -> np.ndarray:
        return np.asarray(velocity) if self.dim == 1 else np.cos(velocity)


@dataclass
class HalfSpaceSolution:
    """A trained f_BL(z, v) with its far-field constant."""
    network: object
    f_inf: float
    spec: HalfSpaceSpec
    result: Optional[OptimResult] = None
    y: Optional[float] = None
    inflow_scale: float = 0.0

    def __call__(self, z, velocity) -> np.ndarray:
        z, velocity = np.broadcast_arrays(np.asarray(z, dtype=float),
                                          np.asarray(velocity, dtype=float))
        pts = np.column_stack([z.ravel(), velocity.ravel()])
        return self.network(pts).reshape(z.shape)

    def flux(self, z) -> np.ndarray:
        """<mu f>(z) on the training velocity rule."""
        rule = self.spec.velocity_rule
        z = np.atleast_1d(np.asarray(z, dtype=float))
        values = self(z[:, None], rule.nodes[None, :])
        return velocity_average(rule, self.spec.mu(rule.nodes) * values)

    def trace(self, velocity) -> np.ndarray:
        """f_BL(0, v), e.g. the reflected trace for mu(v) < 0."""
        return self(0.0, velocity)

    def get_status(self) -> dict:
        status = {'f_inf': self.f_inf, 'y': self.y, 'inflow_scale': self.inflow_scale}
        if self.result is not None:
            status.update(self.result.get_status())
        return status


def halfspace_loss(spec: HalfSpaceSpec, net, boundary_velocities: np.ndarray,
                   boundary_data: np.ndarray) -> LossBreakdown:
    """
    Residual of mu f_z - (<f> - f) on the (z, v) grid, the zero-flux penalty <mu f>^2
    and the inflow misfit at z = 0.
    """
    z_rule, v_rule = spec.z_rule, spec.velocity_rule
    n_z, n_v = z_rule.size, v_rule.size
    points = np.column_stack([np.repeat(z_rule.nodes, n_v), np.tile(v_rule.nodes, n_z)])
    jet = net.jet(points, (0,), 1)
    f = jet.value.reshape(n_z, n_v)
    f_z = jet.dx(0).reshape(n_z, n_v)
    mu = spec.mu(v_rule.nodes)
    avg = velocity_average(v_rule, f)
    residual = mu * f_z - avg.reshape(n_z, 1) + f
    w_z = z_rule.weights
    v_weights = v_rule.weights / v_rule.measure
    boundary_pts = np.column_stack([np.zeros(boundary_velocities.size), boundary_velocities])
    misfit = net.jet(boundary_pts).value - boundary_data
    terms = {
        "residual": weighted_square(residual, w_z[:, None] * v_weights),
        "zero_flux": weighted_square(velocity_average(v_rule, mu * f), w_z),
        "boundary": weighted_square(misfit, np.full(misfit.shape, 1.0 / misfit.shape[0])),
    }
    return breakdown_of(terms)


def _boundary_samples(spec: HalfSpaceSpec, rng: np.random.Generator) -> np.ndarray:
    u = 1.0 - rng.uniform(size=spec.n_b)
    if spec.dim == 1:
        return u
    # open half-circle cos a > 0
    return np.mod(-0.5 * np.pi + np.pi * u, 2.0 * np.pi)


def _training_settings(adam_cfg, lbfgs_cfg, stop):
    training = get_config().get_section("training")
    adam_cfg = adam_cfg or AdamConfig(lr=training.get("adam_lr", 1e-3))
    lbfgs_cfg = lbfgs_cfg or LbfgsConfig(memory=training.get("lbfgs_memory", 10))
    stop = stop or StopRule(training.get("adam_max_iter", 12000),
                            training.get("adam_loss_tol", 0.005),
                            training.get("lbfgs_max_iter", 10000),
                            training.get("lbfgs_grad_tol", 1e-6))
    return adam_cfg, lbfgs_cfg, stop


def _solve(spec: HalfSpaceSpec, inflow_1d: Callable, n_layers: int, n_width: int,
           seed: int, adam_cfg, lbfgs_cfg, stop, y: Optional[float] = None) -> HalfSpaceSolution:
    logger = get_logger()
    rng = np.random.default_rng(seed)
    velocities = _boundary_samples(spec, rng)
    data = np.asarray(inflow_1d(velocities), dtype=float) * np.ones(velocities.shape)
    scale = float(np.max(np.abs(data)))

    if scale == 0.0:
        logger.log_solver_event("halfspace", "zero inflow", f"y={y}; f_BL = 0 without training")
        return HalfSpaceSolution(AnalyticField.constant(0.0), 0.0, spec, None, y, 0.0)

    # bounded output when the data is non-negative, C_a tuned to the data sup-norm
    if np.all(data >= 0):
        net_spec = MlpSpec.build(2, n_layers, n_width, 1, SCALED_SIGMOID,
                                 c_a=spec.output_margin * scale)
    else:
        net_spec = MlpSpec.build(2, n_layers, n_width, 1, IDENTITY)
    bundle = NetworkBundle({"f_bl": net_spec})
    objective = PinnObjective(
        bundle, lambda nets: halfspace_loss(spec, nets["f_bl"], velocities, data))
    result = two_phase_train(objective, bundle.init_params(seed), *_training_settings(
        adam_cfg, lbfgs_cfg, stop))
    network = MlpNetwork(net_spec, result.params[bundle.offsets["f_bl"]])

    if spec.dim == 1:
        f_inf = float(network(np.array([[spec.z_max, 0.0]]))[0])
    else:
        rule = spec.velocity_rule
        far = network(np.column_stack([np.full(rule.size, spec.z_max), rule.nodes]))
        f_inf = float(velocity_average(rule, far))
    logger.log_solver_event("halfspace", "trained",
                            f"y={y} f_inf={f_inf:.6f} loss={result.loss:.3e} status={result.status}")
    return HalfSpaceSolution(network, f_inf, spec, result, y, scale)


def solve_halfspace_1d(spec: HalfSpaceSpec, n_layers: int = 4, n_width: int = 50,
                       seed: int = 0, adam_cfg: Optional[AdamConfig] = None,
                       lbfgs_cfg: Optional[LbfgsConfig] = None,
                       stop: Optional[StopRule] = None) -> HalfSpaceSolution:
    """Train f_BL on (z, v); f_inf is the network value at (Z, 0)."""
    if spec.dim != 1:
        raise InvalidArgumentError("solve_halfspace_1d needs a 1D half-space spec")
    return _solve(spec, spec.inflow, n_layers, n_width, seed, adam_cfg, lbfgs_cfg, stop)


@dataclass
class HalfSpaceFamily:
    """One 2D half-space solution per y node."""
    y_grid: np.ndarray
    solutions: List[HalfSpaceSolution]

    @property
    def f_inf(self) -> np.ndarray:
        return np.array([s.f_inf for s in self.solutions])

    def get_status(self) -> dict:
        return {
            'y_nodes': int(self.y_grid.size),
            'f_inf': self.f_inf.tolist(),
        }


def solve_halfspace_2d(spec: HalfSpaceSpec, y_grid: Sequence[float], n_layers: int = 3,
                       n_width: int = 50, seed: int = 0,
                       adam_cfg: Optional[AdamConfig] = None,
                       lbfgs_cfg: Optional[LbfgsConfig] = None,
                       stop: Optional[StopRule] = None,
                       max_workers: int = 1) -> HalfSpaceFamily:
    """
    One (z, angle) half-space solve per y_j with inflow phi(y_j, .); f_inf(y_j) is the
    angular average at z = Z. Solves are independent and run on ``max_workers`` threads.
    """
    if spec.dim != 2:
        raise InvalidArgumentError("solve_halfspace_2d needs a 2D half-space spec")
    y_grid = np.asarray(y_grid, dtype=float)
    if y_grid.ndim != 1 or y_grid.size < 2 or np.any(np.diff(y_grid) <= 0):
        raise InvalidArgumentError("y grid must be strictly increasing with at least two nodes")
    logger = get_logger()

    def run(j):
        yj = float(y_grid[j])
        return _solve(spec, lambda a: spec.inflow(yj, a), n_layers, n_width, seed + j,
                      adam_cfg, lbfgs_cfg, stop, y=yj)

    solutions: List[Optional[HalfSpaceSolution]] = [None] * y_grid.size
    failures = {}
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        futures = {pool.submit(run, j): j for j in range(y_grid.size)}
        for future, j in futures.items():
            try:
                solutions[j] = future.result()
            except RtePinnError as e:
                failures[float(y_grid[j])] = str(e)
                logger.log_error_with_context(e, f"half-space solve at y={y_grid[j]:.4f}")
    if failures:
        raise RtePinnError(f"{len(failures)} of {y_grid.size} half-space solves failed: "
                           + "; ".join(f"y={y:.4f}: {msg}" for y, msg in failures.items()))
    return HalfSpaceFamily(y_grid, solutions)
