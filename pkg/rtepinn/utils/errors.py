"""Exception hierarchy shared by the solvers, trainers and the CLI."""

from typing import Optional

import numpy as np


class RtePinnError(Exception):
    """Root of every error raised by rtepinn."""

    exit_code = 1
    phase: Optional[str] = None


class InvalidArgumentError(RtePinnError, ValueError):
    """A caller passed a value outside the documented domain."""


class ConfigError(RtePinnError):
    """Configuration file or experiment id could not be used."""

    exit_code = 2


class NumericalFailure(RtePinnError, ArithmeticError):
    """Non-finite values, stagnation or a singular system."""

    exit_code = 3

    def __init__(self, message: str, iteration: Optional[int] = None,
                 residual: Optional[float] = None, phase: Optional[str] = None):
        super().__init__(message)
        self.iteration = iteration
        self.residual = residual
        self.phase = phase

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.phase is not None:
            parts.append(f"phase={self.phase}")
        if self.iteration is not None:
            parts.append(f"iteration={self.iteration}")
        if self.residual is not None:
            parts.append(f"residual={self.residual:.3e}")
        return " | ".join(parts)


class TapeError(RtePinnError, RuntimeError):
    """Internal misuse: untracked gradients, evaluation outside a valid domain."""


def check_finite(value, what: str, iteration: Optional[int] = None,
                 phase: Optional[str] = None, residual: Optional[float] = None):
    """Raise NumericalFailure when ``value`` (a number or an array) holds nan or inf."""
    if not np.all(np.isfinite(value)):
        raise NumericalFailure(f"non-finite {what}", iteration=iteration, residual=residual,
                               phase=phase)
    return value
