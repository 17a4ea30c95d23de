#!/usr/bin/env python3
"""
Diffusion-limit solves

    -div(D grad rho) + sigma_a rho = G,     D = <v^2> / sigma_s,

with <v^2> = 1/3 on the slab and 1/2 on the circle, and Dirichlet values that
normally come from the far-field constants of the half-space problems.
"""

from typing import Callable, Dict, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .fields import Field
from ..boundary_layer.hfunction import HFunctionTable, f_bl_infinity_1d, f_bl_infinity_2d
from ..physics.problem import FACES_2D, ProblemSpec
from ..utils.errors import InvalidArgumentError, NumericalFailure
from ..utils.logger import get_logger

SECOND_MOMENT = {1: 1.0 / 3.0, 2: 0.5}

# rotation taking each 2D face to the x = -1 frame of the half-space problem
_FACE_ROTATION = {"left": 0.0, "right": np.pi, "bottom": 0.5 * np.pi, "top": 1.5 * np.pi}

BoundaryValue = Union[float, Callable]


def _coefficient(fn, *coords) -> np.ndarray:
    shape = np.broadcast(*coords).shape
    if fn is None:
        return np.zeros(shape)
    if callable(fn):
        return np.broadcast_to(np.asarray(fn(*coords), dtype=float), shape)
    return np.full(shape, float(fn))


def _factor_solve(matrix: sp.spmatrix, rhs: np.ndarray, what: str) -> np.ndarray:
    try:
        solution = splu(matrix.tocsc()).solve(rhs)
    except RuntimeError as e:
        raise NumericalFailure(f"singular {what} system: {e}", phase="reference") from e
    if not np.all(np.isfinite(solution)):
        raise NumericalFailure(f"{what} solve returned non-finite values", phase="reference")
    return solution


def _solve_1d(x: np.ndarray, left: float, right: float, sigma_s, sigma_a, source) -> np.ndarray:
    h = np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    sig = _coefficient(sigma_s, mid) if sigma_s is not None else np.ones(mid.shape)
    if np.any(sig <= 0):
        raise InvalidArgumentError("sigma_s must be positive for the diffusion limit")
    D = SECOND_MOMENT[1] / sig
    n = x.size
    inner = np.arange(1, n - 1)
    span = 0.5 * (h[:-1] + h[1:])
    lower = -D[:-1] / h[:-1] / span
    upper = -D[1:] / h[1:] / span
    diag = -(lower + upper) + _coefficient(sigma_a, x[inner])
    rhs = _coefficient(source, x[inner]).copy()
    rhs[0] -= lower[0] * left
    rhs[-1] -= upper[-1] * right
    A = sp.diags([lower[1:], diag, upper[:-1]], [-1, 0, 1], format="csc")
    rho = np.empty(n)
    rho[0], rho[-1] = left, right
    rho[1:-1] = _factor_solve(A, rhs, "1D diffusion")
    return rho


def _face_values(value: BoundaryValue, s: np.ndarray) -> np.ndarray:
    if callable(value):
        return np.broadcast_to(np.asarray(value(s), dtype=float), s.shape)
    return np.full(s.shape, float(value))


def _solve_2d(x: np.ndarray, y: np.ndarray, boundary: Dict[str, BoundaryValue],
              sigma_s: float, sigma_a, source) -> np.ndarray:
    if not sigma_s > 0:
        raise InvalidArgumentError("sigma_s must be positive for the diffusion limit")
    D = SECOND_MOMENT[2] / sigma_s
    n_x, n_y = x.size, y.size
    hx, hy = x[1] - x[0], y[1] - y[0]
    rho = np.zeros((n_x, n_y))
    # y faces first so the x faces own the corners
    rho[:, 0] = _face_values(boundary.get("bottom", 0.0), x)
    rho[:, -1] = _face_values(boundary.get("top", 0.0), x)
    rho[0, :] = _face_values(boundary.get("left", 0.0), y)
    rho[-1, :] = _face_values(boundary.get("right", 0.0), y)

    mx, my = n_x - 2, n_y - 2
    lap_x = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(mx, mx)) / hx ** 2
    lap_y = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(my, my)) / hy ** 2
    X, Y = np.meshgrid(x[1:-1], y[1:-1], indexing="ij")
    A = (-D * (sp.kron(lap_x, sp.identity(my)) + sp.kron(sp.identity(mx), lap_y))
         + sp.diags(_coefficient(sigma_a, X, Y).ravel()))
    rhs = _coefficient(source, X, Y).copy()
    rhs[0, :] += D * rho[0, 1:-1] / hx ** 2
    rhs[-1, :] += D * rho[-1, 1:-1] / hx ** 2
    rhs[:, 0] += D * rho[1:-1, 0] / hy ** 2
    rhs[:, -1] += D * rho[1:-1, -1] / hy ** 2
    rho[1:-1, 1:-1] = _factor_solve(A, rhs.ravel(), "2D diffusion").reshape(mx, my)
    return rho


def diffusion_limit_solve(dim: int, boundary: Dict[str, BoundaryValue], n_x: int = 200,
                          n_y: Optional[int] = None, x_nodes: Optional[np.ndarray] = None,
                          sigma_s=None, sigma_a=None, source=None) -> Field:
    """
    Limit density on [0, 1] (1D, three-point stencil, any increasing ``x_nodes``) or on
    a uniform grid of [-1, 1]^2 (2D, five-point stencil). ``boundary`` maps faces to a
    constant or, in 2D, to a function of the along-face coordinate; missing faces are 0.
    """
    logger = get_logger()
    if dim == 1:
        x = np.linspace(0.0, 1.0, n_x) if x_nodes is None else np.asarray(x_nodes, dtype=float)
        if x.size < 3 or np.any(np.diff(x) <= 0):
            raise InvalidArgumentError("1D diffusion nodes must be increasing, at least three")
        left, right = (float(boundary.get(face, 0.0)) for face in ("left", "right"))
        rho = _solve_1d(x, left, right, sigma_s, sigma_a, source)
        logger.log_solver_event("diffusion-1d", "solved", f"n_x={x.size} rho(0)={left:.6f}")
        return Field(rho, {"x": x}, name="rho0", info={'solver': "diffusion-limit"})
    if dim == 2:
        unknown = set(boundary) - set(FACES_2D)
        if unknown:
            raise InvalidArgumentError(f"unknown faces {sorted(unknown)}")
        n_y = n_y or n_x
        if min(n_x, n_y) < 3:
            raise InvalidArgumentError("2D diffusion grids need at least three nodes per axis")
        x, y = np.linspace(-1.0, 1.0, n_x), np.linspace(-1.0, 1.0, n_y)
        sigma = 1.0 if sigma_s is None else float(sigma_s)
        rho = _solve_2d(x, y, boundary, sigma, sigma_a, source)
        logger.log_solver_event("diffusion-2d", "solved", f"grid={n_x}x{n_y}")
        return Field(rho, {"x": x, "y": y}, name="rho0", info={'solver': "diffusion-limit"})
    raise InvalidArgumentError(f"diffusion limit is 1D or 2D, got {dim}")


def boundary_from_hfunction_1d(problem: ProblemSpec, table: HFunctionTable) -> Dict[str, float]:
    """rho0(0) and rho0(1) as far-field constants of the two half-space problems."""
    if problem.dim != 1:
        raise InvalidArgumentError("expected a 1D problem")
    return {"left": f_bl_infinity_1d(lambda v: problem.inflow_at("left", v), table),
            # the right face sees its inflow along -v
            "right": f_bl_infinity_1d(lambda v: problem.inflow_at("right", -v), table)}


def boundary_from_hfunction_2d(problem: ProblemSpec, table: HFunctionTable,
                               ) -> Dict[str, Callable]:
    """Per-face functions s -> f_BL_inf(s), rotating each face to the x = -1 frame."""
    if problem.dim != 2:
        raise InvalidArgumentError("expected a 2D problem")

    def for_face(face):
        turn = _FACE_ROTATION[face]

        def phi(s, a):
            return problem.inflow_at(face, s, np.mod(a + turn, 2.0 * np.pi))

        return lambda s: f_bl_infinity_2d(phi, table, s)

    return {face: for_face(face) for face in problem.faces if face in problem.inflow}
