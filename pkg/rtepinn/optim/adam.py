"""Bias-corrected Adam, the first phase of the two-phase training schedule."""

from typing import Optional

import numpy as np

from .history import AdamConfig, ErrorMonitor, LossGrad, OptimResult, TrainingHistory
from ..utils.errors import check_finite
from ..utils.logger import get_logger

PHASE = "adam"


def _check(loss: float, grad: np.ndarray, k: int) -> None:
    check_finite(loss, "loss during Adam", iteration=k, phase=PHASE, residual=loss)
    check_finite(grad, "gradient during Adam", iteration=k, phase=PHASE, residual=loss)


def adam_run(loss_grad: LossGrad, theta0: np.ndarray, cfg: AdamConfig,
             max_iter: int, loss_tol: float, monitor: Optional[ErrorMonitor] = None,
             error_every: int = 100, log_every: int = 500) -> OptimResult:
    """
    Run Adam until ``max_iter`` steps or until the loss drops below ``loss_tol``.

    Every evaluated loss is recorded; ``monitor`` (e.g. a relative error against a
    reference field) is evaluated every ``error_every`` iterations.
    """
    logger = get_logger()
    theta = np.array(theta0, dtype=float)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    history = TrainingHistory()

    loss, grad = loss_grad(theta)
    _check(loss, grad, 0)
    k = 0
    while k < max_iter and not loss < loss_tol:
        rel = monitor(theta) if monitor is not None and k % error_every == 0 else None
        history.record(k, PHASE, loss, rel)
        if k % log_every == 0:
            logger.log_training_event(PHASE, k, loss)

        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        m_hat = m / (1.0 - cfg.beta1 ** (k + 1))
        v_hat = v / (1.0 - cfg.beta2 ** (k + 1))
        theta = theta - cfg.lr_at(k) * m_hat / (np.sqrt(v_hat) + cfg.eps)

        k += 1
        loss, grad = loss_grad(theta)
        _check(loss, grad, k)

    rel = monitor(theta) if monitor is not None else None
    history.record(k, PHASE, loss, rel)
    status = "converged" if loss < loss_tol else "max_iter"
    logger.log_training_event(PHASE, k, loss, status=status)
    return OptimResult(theta, history, status, k, float(loss), float(np.linalg.norm(grad)))
