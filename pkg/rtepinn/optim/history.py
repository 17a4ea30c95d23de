"""Optimizer configuration records and the per-iteration history."""

import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..utils.errors import InvalidArgumentError

LossGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]
ErrorMonitor = Callable[[np.ndarray], float]


@dataclass
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    decay_factor: Optional[float] = None  # lr *= factor every ``decay_every`` steps
    decay_every: Optional[int] = None

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidArgumentError("Adam learning rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise InvalidArgumentError("Adam betas must lie in (0, 1)")
        if (self.decay_factor is None) != (self.decay_every is None):
            raise InvalidArgumentError("lr decay needs both factor and every")

    def lr_at(self, step: int) -> float:
        if self.decay_factor is None:
            return self.lr
        return self.lr * self.decay_factor ** (step // self.decay_every)


@dataclass
class LbfgsConfig:
    memory: Optional[int] = 10  # None keeps every curvature pair
    c1: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 30
    fallback_lr: float = 1e-4

    def __post_init__(self):
        if self.memory is not None and self.memory < 1:
            raise InvalidArgumentError("L-BFGS memory must be at least 1")


@dataclass
class StopRule:
    adam_max_iter: int = 12000
    adam_loss_tol: float = 0.005
    lbfgs_max_iter: int = 10000
    lbfgs_grad_tol: float = 1e-6

    def __post_init__(self):
        if self.adam_max_iter < 0 or self.lbfgs_max_iter < 0:
            raise InvalidArgumentError("iteration budgets must be non-negative")
        if not (self.adam_loss_tol > 0 and self.lbfgs_grad_tol > 0):
            raise InvalidArgumentError("stop thresholds must be positive")


@dataclass
class HistoryEntry:
    iteration: int
    phase: str
    loss: float
    rel_error: Optional[float] = None


@dataclass
class TrainingHistory:
    entries: List[HistoryEntry] = field(default_factory=list)

    def record(self, iteration: int, phase: str, loss: float,
               rel_error: Optional[float] = None) -> None:
        self.entries.append(HistoryEntry(iteration, phase, float(loss), rel_error))

    def extend(self, other: "TrainingHistory") -> None:
        self.entries.extend(other.entries)

    @property
    def losses(self) -> np.ndarray:
        return np.array([e.loss for e in self.entries])

    @property
    def final_loss(self) -> float:
        return self.entries[-1].loss if self.entries else float("nan")

    def __len__(self) -> int:
        return len(self.entries)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["iteration", "phase", "loss", "rel_error"])
            for e in self.entries:
                writer.writerow([e.iteration, e.phase, f"{e.loss:.17g}",
                                 "" if e.rel_error is None else f"{e.rel_error:.17g}"])


@dataclass
class OptimResult:
    params: np.ndarray
    history: TrainingHistory
    status: str
    iterations: int
    loss: float
    grad_norm: float = float("nan")

    def get_status(self) -> dict:
        return {
            'status': self.status,
            'iterations': self.iterations,
            'loss': self.loss,
            'grad_norm': self.grad_norm,
            'history_length': len(self.history),
        }
