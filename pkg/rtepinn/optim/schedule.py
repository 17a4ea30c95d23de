"""Two-phase training: Adam until the loss threshold, then L-BFGS from Adam's final iterate."""

from typing import Optional

import numpy as np

from .adam import adam_run
from .history import (AdamConfig, ErrorMonitor, LbfgsConfig, LossGrad, OptimResult, StopRule,
                      TrainingHistory)
from .lbfgs import lbfgs_run


def two_phase_train(loss_grad: LossGrad, theta0: np.ndarray, adam_cfg: AdamConfig,
                    lbfgs_cfg: LbfgsConfig, stop: StopRule,
                    monitor: Optional[ErrorMonitor] = None, error_every: int = 100,
                    log_every: int = 500) -> OptimResult:
    adam = adam_run(loss_grad, theta0, adam_cfg, stop.adam_max_iter, stop.adam_loss_tol,
                    monitor, error_every, log_every)
    lbfgs = lbfgs_run(loss_grad, adam.params, lbfgs_cfg, stop.lbfgs_max_iter,
                      stop.lbfgs_grad_tol, monitor, error_every, log_every,
                      iteration_offset=adam.iterations, record_start=False)
    history = TrainingHistory()
    history.extend(adam.history)
    history.extend(lbfgs.history)
    return OptimResult(lbfgs.params, history, lbfgs.status,
                       adam.iterations + lbfgs.iterations, lbfgs.loss, lbfgs.grad_norm)
