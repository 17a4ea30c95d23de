#!/usr/bin/env python3
"""
Discrete-ordinates reference solvers for the linear RTE.

1D: weighted-difference sweeps per ordinate. With h the cell width, e the mid-cell
Knudsen number, t = sigma_s + eps^2 sigma_a the removal, d = sigma_s rho the scattering
drive and q = eps^2 G, stepping from the upwind node p to n reads

    f_n (e|v|/h + theta t_n) = f_p (e|v|/h - (1 - theta) t_p)
                               + theta (d_n + q_n) + (1 - theta) (d_p + q_p).

theta = 1 is first-order upwind, theta = 1/2 the diamond scheme. Every sweep is affine
in d, so the scattering coupling is solved either by source iteration or directly,
through the dense Schur system (I - M diag(sigma_s)) rho = c on the density alone.

2D: node-based upwind on a uniform (x, y) grid, one sparse LU factorization per
angle, coupled through the scattering gain by source iteration or GMRES.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu

from .fields import Field, Mesh1D
from ..numerics.quadrature import uniform_rule
from ..numerics.scattering import ISOTROPIC, ScatteringOperator
from ..physics.problem import ProblemSpec
from ..utils.config_manager import get_config
from ..utils.errors import InvalidArgumentError, NumericalFailure
from ..utils.logger import get_logger

SOURCE_ITERATION = "source-iteration"
DIRECT = "direct"
GMRES = "gmres"
AUTO = "auto"

# sweeps without a decrease of the update before declaring stagnation
_STAGNATION_SWEEPS = 20


class OrdinateSweep1D:
    """Weighted-difference transport sweeps on a 1D mesh, vectorized over ordinates."""

    def __init__(self, x: np.ndarray, v: np.ndarray, avg_weights: np.ndarray,
                 eps_nodes: np.ndarray, eps_mid: np.ndarray, removal: np.ndarray,
                 source: np.ndarray, inflow_left: np.ndarray, inflow_right: np.ndarray,
                 theta: float = 1.0):
        if not 0.5 <= theta <= 1.0:
            raise InvalidArgumentError(f"theta must lie in [1/2, 1], got {theta}")
        self.x, self.v, self.w = x, v, avg_weights
        self.h = np.diff(x)
        self.eps_mid = eps_mid
        self.removal = removal
        self.q = source
        self.theta = theta
        self.right_moving = v > 0
        self.left_moving = v < 0
        self.inflow_left = inflow_left
        self.inflow_right = inflow_right
        self.n_x, self.n_v = x.size, v.size

    def _steps(self, rightward: bool):
        """(n, p) node pairs in sweep order for one direction."""
        if rightward:
            return [(n, n - 1) for n in range(1, self.n_x)]
        return [(n, n + 1) for n in range(self.n_x - 2, -1, -1)]

    def _factors(self, n: int, p: int, speed: np.ndarray):
        cell = min(n, p)
        a = self.eps_mid[cell] * speed / self.h[cell]
        th = self.theta
        beta = 1.0 / (a + th * self.removal[n])
        alpha = (a - (1.0 - th) * self.removal[p]) * beta
        return alpha, beta

    def sweep(self, drive: np.ndarray) -> np.ndarray:
        """f on (x, v) for the given scattering drive d(x)."""
        th = self.theta
        f = np.empty((self.n_x, self.n_v))
        for rightward, start, data in ((True, 0, self.inflow_left),
                                       (False, self.n_x - 1, self.inflow_right)):
            moving = self.right_moving if rightward else self.left_moving
            speed = np.abs(self.v[moving])
            f[start, moving] = data
            for n, p in self._steps(rightward):
                alpha, beta = self._factors(n, p, speed)
                f[n, moving] = (alpha * f[p, moving]
                                + beta * (th * (drive[n] + self.q[n, moving])
                                          + (1.0 - th) * (drive[p] + self.q[p, moving])))
        return f

    def average(self, f: np.ndarray) -> np.ndarray:
        return f @ self.w

    def average_map(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        (M, c) with <sweep(d)> = M d + c. Rows of the affine map are carried per
        ordinate one node at a time, so memory stays O(N_x N_v) besides M itself.
        """
        th = self.theta
        M = np.zeros((self.n_x, self.n_x))
        for rightward in (True, False):
            moving = self.right_moving if rightward else self.left_moving
            speed = np.abs(self.v[moving])
            w = self.w[moving]
            row = np.zeros((speed.size, self.n_x))
            for n, p in self._steps(rightward):
                alpha, beta = self._factors(n, p, speed)
                row = alpha[:, None] * row
                row[:, n] += beta * th
                row[:, p] += beta * (1.0 - th)
                M[n] += w @ row
        c = self.average(self.sweep(np.zeros(self.n_x)))
        return M, c


def _fdm_settings(tol, max_sweeps, direct_limit):
    section = get_config().get_section("fdm")
    return (section.get("tol", 1e-10) if tol is None else tol,
            int(section.get("max_sweeps", 100000) if max_sweeps is None else max_sweeps),
            int(section.get("direct_limit", 100000) if direct_limit is None else direct_limit))


def _source_iteration(update, start: np.ndarray, tol: float, max_sweeps: int,
                      solver: str) -> Tuple[np.ndarray, Dict[str, object]]:
    """
    Fixed point u <- update(u) until the sup-norm change drops below ``tol``.

    The ratio of successive changes estimates the spectral radius of the sweep.
    """
    logger = get_logger()
    u = start
    residuals: List[float] = []
    radius = float("nan")
    best, since_best = np.inf, 0
    for k in range(1, max_sweeps + 1):
        new = update(u)
        change = float(np.max(np.abs(new - u)))
        if not np.isfinite(change):
            raise NumericalFailure(f"{solver} source iteration produced non-finite values",
                                   iteration=k, phase="reference")
        if residuals and residuals[-1] > 0:
            radius = change / residuals[-1]
        residuals.append(change)
        u = new
        if change < tol:
            logger.log_solver_event(solver, "source iteration converged",
                                    f"sweeps={k} change={change:.3e} radius~{radius:.6f}")
            return u, {'method': SOURCE_ITERATION, 'sweeps': k, 'spectral_radius': radius,
                       'residuals': residuals}
        if change < best:
            best, since_best = change, 0
        else:
            since_best += 1
        if since_best >= _STAGNATION_SWEEPS:
            raise NumericalFailure(
                f"{solver} source iteration stagnated, spectral radius estimate {radius:.6f}",
                iteration=k, residual=change, phase="reference")
        if k % 1000 == 0:
            logger.debug(f"{solver} sweep {k}: change={change:.3e} radius~{radius:.6f}")
    raise NumericalFailure(
        f"{solver} source iteration hit the sweep limit, spectral radius estimate {radius:.6f}",
        iteration=max_sweeps, residual=residuals[-1], phase="reference")


def build_sweep_1d(problem: ProblemSpec, mesh: Mesh1D, theta: float = 1.0) -> OrdinateSweep1D:
    if problem.dim != 1:
        raise InvalidArgumentError("fdm_rte_1d needs a 1D problem")
    x, v = mesh.x, mesh.v
    eps_nodes = problem.epsilon(x)
    eps_mid = problem.epsilon(0.5 * (x[1:] + x[:-1]))
    sigma_s = problem.sigma_s_at(x)
    sigma_a = problem.sigma_a_at(x)
    problem.check_coefficients(sigma_s, sigma_a)
    removal = sigma_s + eps_nodes ** 2 * sigma_a
    source = eps_nodes[:, None] ** 2 * problem.source_at(x[:, None], v[None, :])
    return OrdinateSweep1D(x, v, mesh.average_weights, eps_nodes, eps_mid, removal, source,
                           problem.inflow_at("left", v[v > 0]),
                           problem.inflow_at("right", v[v < 0]), theta)


def fdm_rte_1d(problem: ProblemSpec, mesh: Mesh1D, theta: float = 1.0, method: str = AUTO,
               tol: Optional[float] = None, max_sweeps: Optional[int] = None,
               direct_limit: Optional[int] = None) -> Field:
    """
    Reference f(x, v) on ``mesh``. ``auto`` picks the direct density solve when
    N_x N_v <= ``direct_limit`` and source iteration otherwise.
    """
    tol, max_sweeps, direct_limit = _fdm_settings(tol, max_sweeps, direct_limit)
    sweeper = build_sweep_1d(problem, mesh, theta)
    sigma_s = problem.sigma_s_at(mesh.x)
    if method == AUTO:
        method = DIRECT if mesh.n_x * mesh.n_v <= direct_limit else SOURCE_ITERATION
    logger = get_logger()

    if method == DIRECT:
        M, c = sweeper.average_map()
        system = np.eye(mesh.n_x) - M * sigma_s[None, :]
        try:
            rho = scipy.linalg.solve(system, c)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise NumericalFailure(f"singular density system: {e}", phase="reference") from e
        info = {'method': DIRECT}
        logger.log_solver_event("fdm-1d", "direct density solve",
                                f"{problem.name} n_x={mesh.n_x} n_v={mesh.n_v} theta={theta}")
    elif method == SOURCE_ITERATION:
        rho, info = _source_iteration(lambda r: sweeper.average(sweeper.sweep(sigma_s * r)),
                                      np.zeros(mesh.n_x), tol, max_sweeps, "fdm-1d")
    else:
        raise InvalidArgumentError(f"unknown 1D method '{method}'")

    f = sweeper.sweep(sigma_s * rho)
    info.update({'theta': theta, 'mesh': mesh.kind, 'problem': problem.name})
    return Field(f, {"x": mesh.x, "v": mesh.v},
                 {"x": mesh.x_rule.weights, "v": np.asarray(mesh.velocity_rule.weights)},
                 name="f", info=info)


class OrdinateSolver2D:
    """Per-angle sparse upwind systems on a uniform grid of [-1, 1]^2."""

    def __init__(self, problem: ProblemSpec, n_x: int, n_y: int, n_alpha: int,
                 max_workers: int = 1):
        if problem.dim != 2:
            raise InvalidArgumentError("fdm_rte_2d needs a 2D problem")
        if min(n_x, n_y) < 3 or n_alpha < 4:
            raise InvalidArgumentError("2D reference grids need n_x, n_y >= 3, n_alpha >= 4")
        self.problem = problem
        self.x = np.linspace(-1.0, 1.0, n_x)
        self.y = np.linspace(-1.0, 1.0, n_y)
        self.rule = uniform_rule(n_alpha, 0.0, 2.0 * np.pi, shift=0.5)
        self.scattering = ScatteringOperator(problem.kernel, self.rule)
        self.max_workers = max(1, max_workers)
        eps = problem.eps
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        sigma_s = problem.sigma_s_at(X, Y)
        sigma_a = problem.sigma_a_at(X, Y)
        problem.check_coefficients(sigma_s, sigma_a)
        self.sigma_s = sigma_s.ravel()
        removal = (sigma_s + eps * eps * sigma_a).ravel()
        alpha = self.rule.nodes
        self.source = (eps * eps) * problem.source_at(
            X[..., None], Y[..., None], alpha).reshape(-1, n_alpha)

        self.n_nodes = n_x * n_y
        self.masks, self.data, self.factors = [], [], []
        for a in alpha:
            mask, data = self._inflow(a)
            self.masks.append(mask)
            self.data.append(data)
            self.factors.append(splu(self._matrix(a, removal, mask).tocsc()))

    def _inflow(self, a: float):
        n_x, n_y = self.x.size, self.y.size
        mask = np.zeros((n_x, n_y), dtype=bool)
        data = np.zeros((n_x, n_y))
        c, s = np.cos(a), np.sin(a)
        inflow = self.problem.inflow_at
        # x faces are assigned last so they own the corners
        if s > 0:
            mask[:, 0], data[:, 0] = True, inflow("bottom", self.x, a)
        if s < 0:
            mask[:, -1], data[:, -1] = True, inflow("top", self.x, a)
        if c > 0:
            mask[0, :], data[0, :] = True, inflow("left", self.y, a)
        if c < 0:
            mask[-1, :], data[-1, :] = True, inflow("right", self.y, a)
        return mask.ravel(), data.ravel()

    def _matrix(self, a: float, removal: np.ndarray, mask: np.ndarray) -> sp.csr_matrix:
        n_x, n_y = self.x.size, self.y.size
        eps = self.problem.eps
        cx = eps * abs(np.cos(a)) / (self.x[1] - self.x[0])
        cy = eps * abs(np.sin(a)) / (self.y[1] - self.y[0])
        idx = np.arange(self.n_nodes).reshape(n_x, n_y)
        up_x = idx - n_y if np.cos(a) > 0 else idx + n_y
        up_y = idx - 1 if np.sin(a) > 0 else idx + 1
        free = ~mask
        rows = np.concatenate([idx.ravel(), idx.ravel()[free], idx.ravel()[free]])
        cols = np.concatenate([idx.ravel(), up_x.ravel()[free], up_y.ravel()[free]])
        diag = np.where(mask, 1.0, cx + cy + removal)
        vals = np.concatenate([diag, np.full(free.sum(), -cx), np.full(free.sum(), -cy)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def sweep(self, gain: np.ndarray, homogeneous: bool = False) -> np.ndarray:
        """f (nodes, angles) for the scattering gain S = P f of the previous iterate."""
        def solve(j):
            rhs = self.sigma_s * gain[:, j]
            if not homogeneous:
                rhs = rhs + self.source[:, j]
            rhs = np.where(self.masks[j], 0.0 if homogeneous else self.data[j], rhs)
            return self.factors[j].solve(rhs)

        n_alpha = self.rule.size
        if self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                columns = list(pool.map(solve, range(n_alpha)))
        else:
            columns = [solve(j) for j in range(n_alpha)]
        return np.column_stack(columns)

    def gain(self, f: np.ndarray) -> np.ndarray:
        return self.scattering.scatter(f)


def fdm_rte_2d(problem: ProblemSpec, n_x: int = 60, n_y: int = 60, n_alpha: int = 40,
               method: str = AUTO, tol: Optional[float] = None,
               max_sweeps: Optional[int] = None, max_workers: int = 1) -> Field:
    """
    Reference f(x, y, alpha). ``auto`` uses source iteration for eps >= 0.1 and GMRES on
    the scattering gain below, where source iteration slows down like 1 - O(eps).
    """
    tol, max_sweeps, _ = _fdm_settings(tol, max_sweeps, None)
    solver = OrdinateSolver2D(problem, n_x, n_y, n_alpha, max_workers)
    if method == AUTO:
        method = SOURCE_ITERATION if problem.eps >= 0.1 else GMRES
    shape = (solver.n_nodes, n_alpha)

    if method == SOURCE_ITERATION:
        f, info = _source_iteration(lambda u: solver.sweep(solver.gain(u)),
                                    np.zeros(shape), tol, max_sweeps, "fdm-2d")
    elif method == GMRES:
        def apply(s):
            s = s.reshape(shape)
            return (s - solver.gain(solver.sweep(s, homogeneous=True))).ravel()

        rhs = solver.gain(solver.sweep(np.zeros(shape))).ravel()
        operator = LinearOperator((rhs.size, rhs.size), matvec=apply, dtype=float)
        counter = {'n': 0}

        def count(_):
            counter['n'] += 1

        gain, status = gmres(operator, rhs, rtol=tol, atol=0.0, restart=60,
                             maxiter=max(1, max_sweeps // 60), callback=count,
                             callback_type="pr_norm")
        if status != 0:
            raise NumericalFailure("GMRES on the scattering gain did not converge",
                                   iteration=counter['n'], phase="reference")
        f = solver.sweep(gain.reshape(shape))
        info = {'method': GMRES, 'iterations': counter['n']}
        get_logger().log_solver_event("fdm-2d", "GMRES converged",
                                      f"{problem.name} iterations={counter['n']}")
    else:
        raise InvalidArgumentError(f"unknown 2D method '{method}'")

    info.update({'problem': problem.name, 'kernel': problem.kernel.kind})
    if problem.kernel.kind != ISOTROPIC:
        info['hg_normalization'] = solver.scattering.normalization
    return Field(f.reshape(n_x, n_y, n_alpha),
                 {"x": solver.x, "y": solver.y, "alpha": solver.rule.nodes},
                 {"alpha": np.asarray(solver.rule.weights)}, name="f", info=info)
