#!/usr/bin/env python3
"""
Reference solutions of the grey radiative system

    eps v I_x = sigma (a c T^4 - I),       eps^2 T_xx = sigma (a c T^4 - <I>),

on [0, 1], and of its eps -> 0 limit kappa (T^4)'' + T'' = 0 with kappa = a c / (3 sigma).
Integrating the limit twice with T(0) = 1, T(1) = 0 gives the pointwise quartic
kappa T^4 + T = (kappa + 1)(1 - x).
"""

from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from .fields import Field, Mesh1D
from .transport import OrdinateSweep1D
from ..physics.losses import RadiativeConstants
from ..utils.errors import InvalidArgumentError, NumericalFailure
from ..utils.logger import get_logger

# damping of rejected Newton steps and the smallest step fraction tried
STEP_FACTOR = 0.5
MIN_STEP = 1.0 / 64.0


def nonlinear_limit_solve(kappa: float, x, tol: float = 1e-15,
                          max_iter: int = 100) -> np.ndarray:
    """
    T_0(x) in [0, 1] from kappa T^4 + T = (kappa + 1)(1 - x).

    Newton from T = 1 approaches the root from above (the quartic is convex and
    increasing on [0, 1]); iterates are clipped to the bracket [0, 1].
    """
    if kappa < 0:
        raise InvalidArgumentError(f"kappa must be non-negative, got {kappa}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise InvalidArgumentError("the limit temperature is defined on [0, 1]")
    target = (kappa + 1.0) * (1.0 - x)
    if kappa == 0:
        return target.copy()
    t = np.ones_like(target)
    for _ in range(max_iter):
        step = (kappa * t ** 4 + t - target) / (4.0 * kappa * t ** 3 + 1.0)
        t = np.clip(t - step, 0.0, 1.0)
        if np.max(np.abs(step)) < tol:
            break
    return t


def limit_profile(constants: RadiativeConstants, x) -> Dict[str, np.ndarray]:
    """
    T_0 with its first two derivatives, and the limit density rho_0 = a c T_0^4
    with rho_0', rho_0'' (differentiating the quartic implicitly).
    """
    kappa, ac = constants.kappa, constants.a * constants.c
    t = nonlinear_limit_solve(kappa, x)
    denom = 4.0 * kappa * t ** 3 + 1.0
    t1 = -(kappa + 1.0) / denom
    t2 = 12.0 * kappa * (kappa + 1.0) * t ** 2 * t1 / denom ** 2
    rho = ac * t ** 4
    rho1 = 4.0 * ac * t ** 3 * t1
    rho2 = 4.0 * ac * (3.0 * t ** 2 * t1 ** 2 + t ** 3 * t2)
    return {'T': t, 'T_x': t1, 'T_xx': t2, 'rho': rho, 'rho_x': rho1, 'rho_xx': rho2}


def _second_difference(x: np.ndarray) -> np.ndarray:
    """Rows of the three-point second derivative at the interior nodes, (N-2, N)."""
    h = np.diff(x)
    n = x.size
    D2 = np.zeros((n - 2, n))
    span = 0.5 * (h[:-1] + h[1:])
    rows = np.arange(n - 2)
    D2[rows, rows] = 1.0 / (h[:-1] * span)
    D2[rows, rows + 2] = 1.0 / (h[1:] * span)
    D2[rows, rows + 1] = -(D2[rows, rows] + D2[rows, rows + 2])
    return D2


def fdm_nonlinear_1d(constants: RadiativeConstants, eps: float, mesh: Mesh1D,
                     theta: float = 0.5, inflow: Optional[Dict[str, Callable]] = None,
                     tol: float = 1e-10, max_iter: int = 50) -> Tuple[Field, Field]:
    """
    (I, T) on ``mesh``. Each transport sweep is affine in the emission a c T^4, so
    <I> = M (sigma a c T^4) + c exactly; Newton then runs on T alone for

        R(T) = eps^2 D2 T - sigma (a c T^4 - <I>)

    at the interior nodes, with T(0), T(1) from ``constants``. Steps that do not lower
    |R| are halved. The intensity inflow defaults to I(0, v>0) = 1, I(1, v<0) = 0.
    """
    if not eps > 0:
        raise InvalidArgumentError("eps must be positive")
    inflow = inflow or {"left": lambda v: np.ones_like(v), "right": lambda v: np.zeros_like(v)}
    logger = get_logger()
    x, v = mesh.x, mesh.v
    sigma, ac = constants.sigma, constants.a * constants.c
    n = x.size
    sweeper = OrdinateSweep1D(
        x, v, mesh.average_weights, np.full(n, eps), np.full(n - 1, eps), np.full(n, sigma),
        np.zeros((n, v.size)), np.asarray(inflow["left"](v[v > 0]), dtype=float),
        np.asarray(inflow["right"](v[v < 0]), dtype=float), theta)
    M, c = sweeper.average_map()
    D2 = (eps * eps) * _second_difference(x)
    inner = slice(1, n - 1)

    def residual(t):
        emission = ac * t ** 4
        return D2 @ t - sigma * (emission - (M @ (sigma * emission) + c))[inner]

    t = nonlinear_limit_solve(constants.kappa, x)
    t[0], t[-1] = constants.t_left, constants.t_right
    r = residual(t)
    norm = float(np.max(np.abs(r)))
    for k in range(1, max_iter + 1):
        slope = 4.0 * ac * t ** 3
        J = D2 + (sigma * sigma) * M[inner] * slope[None, :]
        J[:, 1:-1] -= sigma * np.diag(slope[inner])
        try:
            step = scipy.linalg.solve(J[:, inner], -r)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise NumericalFailure(f"singular Newton system: {e}", iteration=k,
                                   residual=norm, phase="reference") from e
        lam = 1.0
        while True:
            trial = t.copy()
            trial[inner] += lam * step
            r_trial = residual(trial)
            trial_norm = float(np.max(np.abs(r_trial)))
            if trial_norm <= norm or lam <= MIN_STEP:
                break
            lam *= STEP_FACTOR
        t, r, norm = trial, r_trial, trial_norm
        change = lam * float(np.max(np.abs(step)))
        logger.debug(f"nonlinear Newton {k}: |R|={norm:.3e} step={change:.3e} lambda={lam}")
        if not np.isfinite(norm):
            raise NumericalFailure("nonlinear solve produced non-finite values",
                                   iteration=k, phase="reference")
        if change < tol:
            logger.log_solver_event("fdm-nonlinear", "converged",
                                    f"eps={eps:g} newton={k} residual={norm:.3e}")
            intensity = sweeper.sweep(sigma * ac * t ** 4)
            info = {'method': "newton", 'iterations': k, 'residual': norm, 'theta': theta}
            return (Field(intensity, {"x": x, "v": v},
                          {"x": mesh.x_rule.weights, "v": np.asarray(mesh.velocity_rule.weights)},
                          name="I", info=info),
                    Field(t, {"x": x}, {"x": mesh.x_rule.weights}, name="T", info=info))
    raise NumericalFailure("nonlinear Newton iteration did not converge",
                           iteration=max_iter, residual=norm, phase="reference")
