"""Limited-memory BFGS with two-loop recursion and Armijo backtracking."""

from collections import deque
from typing import Optional, Tuple

import numpy as np

from .history import ErrorMonitor, LbfgsConfig, LossGrad, OptimResult, TrainingHistory
from ..utils.errors import check_finite
from ..utils.logger import get_logger

PHASE = "lbfgs"


def two_loop_direction(grad: np.ndarray, pairs) -> np.ndarray:
    """-H g with H built from (s, y, rho) pairs and the scaling gamma = s'y / y'y."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def armijo_backtrack(loss_grad: LossGrad, theta: np.ndarray, loss: float,
                     grad: np.ndarray, direction: np.ndarray,
                     cfg: LbfgsConfig) -> Optional[Tuple[float, np.ndarray, float, np.ndarray]]:
    """First step t = 1, shrink^1, ... satisfying f(x + t d) <= f(x) + c1 t g'd."""
    slope = grad @ direction
    t = 1.0
    for _ in range(cfg.max_backtracks):
        trial = theta + t * direction
        trial_loss, trial_grad = loss_grad(trial)
        if np.isfinite(trial_loss) and trial_loss <= loss + cfg.c1 * t * slope:
            return t, trial, trial_loss, trial_grad
        t *= cfg.shrink
    return None


def lbfgs_run(loss_grad: LossGrad, theta0: np.ndarray, cfg: LbfgsConfig,
              max_iter: int, grad_tol: float, monitor: Optional[ErrorMonitor] = None,
              error_every: int = 100, log_every: int = 500,
              iteration_offset: int = 0, record_start: bool = True) -> OptimResult:
    """
    Minimize until ``max_iter`` iterations or ||grad|| < ``grad_tol``.

    History rows are ``iteration_offset + k`` after the k-th step. The starting point is
    row ``iteration_offset`` unless ``record_start`` is off, as when Adam already
    recorded it. A failed line search falls back to a small steepest-descent step; two
    consecutive failures end the run with status ``line_search_failed``.
    """
    logger = get_logger()
    theta = np.array(theta0, dtype=float)
    history = TrainingHistory()
    pairs = deque(maxlen=cfg.memory)

    loss, grad = loss_grad(theta)
    check_finite(loss, "initial loss for L-BFGS", iteration=iteration_offset, phase=PHASE)
    check_finite(grad, "initial gradient for L-BFGS", iteration=iteration_offset, phase=PHASE)
    if record_start:
        history.record(iteration_offset, PHASE, loss,
                       monitor(theta) if monitor is not None else None)
    status = "max_iter"
    failures = 0
    k = 0
    gnorm = float(np.linalg.norm(grad))
    while k < max_iter:
        if gnorm < grad_tol:
            status = "converged"
            break
        it = iteration_offset + k
        if k % log_every == 0:
            logger.log_training_event(PHASE, it, loss, grad_norm=gnorm)

        direction = two_loop_direction(grad, list(pairs))
        if not grad @ direction < 0:
            pairs.clear()
            direction = -grad

        step = armijo_backtrack(loss_grad, theta, loss, grad, direction, cfg)
        if step is None:
            failures += 1
            if failures >= 2:
                status = "line_search_failed"
                break
            logger.warning(f"L-BFGS line search failed at iteration {it}; steepest-descent step")
            pairs.clear()
            new_theta = theta - cfg.fallback_lr * grad
            new_loss, new_grad = loss_grad(new_theta)
        else:
            failures = 0
            _, new_theta, new_loss, new_grad = step

        check_finite(new_loss, "loss during L-BFGS", iteration=it + 1, phase=PHASE,
                     residual=new_loss)
        check_finite(new_grad, "gradient during L-BFGS", iteration=it + 1, phase=PHASE,
                     residual=new_loss)

        s = new_theta - theta
        y = new_grad - grad
        sy = s @ y
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))

        theta, loss, grad = new_theta, new_loss, new_grad
        gnorm = float(np.linalg.norm(grad))
        k += 1
        rel = monitor(theta) if monitor is not None and k % error_every == 0 else None
        history.record(iteration_offset + k, PHASE, loss, rel)

    # the error at the final iterate is always known
    last = history.entries[-1] if history.entries else None
    if monitor is not None and last is not None and last.rel_error is None:
        last.rel_error = monitor(theta)
    logger.log_training_event(PHASE, iteration_offset + k, loss, grad_norm=gnorm, status=status)
    return OptimResult(theta, history, status, k, float(loss), gnorm)
