"""
Discrete scattering operators.

L f(v) = < K(v, .) (f(.) - f(v)) > with the kernel written relative to the normalized
velocity measure, so K == 1 is the isotropic operator <f> - f and the
Henyey-Greenstein kernel reads (1 - h^2) / (1 + h^2 - 2 h cos(a - a')).
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureRule, velocity_average
from ..utils.errors import InvalidArgumentError
from ..utils.logger import get_logger

ISOTROPIC = "isotropic"
HENYEY_GREENSTEIN = "henyey-greenstein"


@dataclass(frozen=True)
class KernelSpec:
    kind: str = ISOTROPIC
    h: float = 0.0

    def __post_init__(self):
        if self.kind not in (ISOTROPIC, HENYEY_GREENSTEIN):
            raise InvalidArgumentError(f"unknown kernel kind '{self.kind}'")
        if self.kind == HENYEY_GREENSTEIN and not 0.0 < self.h < 1.0:
            raise InvalidArgumentError(f"Henyey-Greenstein h must lie in (0, 1), got {self.h}")

    @classmethod
    def isotropic(cls) -> "KernelSpec":
        return cls(ISOTROPIC)

    @classmethod
    def henyey_greenstein(cls, h: float) -> "KernelSpec":
        return cls(HENYEY_GREENSTEIN, h)


def hg_kernel(h: float, angle_difference) -> np.ndarray:
    """Henyey-Greenstein kernel in the normalized-measure convention."""
    return (1.0 - h * h) / (1.0 + h * h - 2.0 * h * np.cos(angle_difference))


class ScatteringOperator:
    """Dense matrix M with (L f)_i = sum_j M_ij f_j on the nodes of ``rule``."""

    def __init__(self, kernel: KernelSpec, rule: QuadratureRule):
        self.kernel = kernel
        self.rule = rule
        n = rule.size
        w = rule.weights / rule.measure

        if kernel.kind == ISOTROPIC:
            transfer = np.tile(w, (n, 1))
            self.normalization = 1.0
        else:
            if not np.isclose(rule.measure, 2.0 * np.pi):
                raise InvalidArgumentError(
                    "Henyey-Greenstein scattering needs an angular rule on [0, 2*pi]")
            raw = hg_kernel(kernel.h, rule.nodes[:, None] - rule.nodes[None, :])
            self.raw_row_sums = raw @ w
            scale = self._symmetric_scaling(raw, w)
            transfer = scale[:, None] * raw * scale[None, :] * w[None, :]
            self.normalization = float(np.mean(scale ** 2))
            get_logger().log_solver_event(
                "scattering", "HG kernel normalized",
                f"h={kernel.h} n={n} factor={self.normalization:.15f}")

        # transfer rows sum to one; w_i * transfer_ij is symmetric
        self.transfer = transfer
        self.matrix = transfer - np.eye(n)

    @staticmethod
    def _symmetric_scaling(raw: np.ndarray, w: np.ndarray, tol: float = 1e-15,
                           max_iter: int = 1000) -> np.ndarray:
        d = 1.0 / np.sqrt(raw @ w)
        for _ in range(max_iter):
            row = d * (raw @ (w * d))
            if np.max(np.abs(row - 1.0)) < tol:
                break
            d = d / np.sqrt(row)
        return d

    def apply(self, samples):
        """L applied along the last axis; accepts arrays or taped tensors."""
        if samples.shape[-1] != self.rule.size:
            raise InvalidArgumentError(
                f"expected {self.rule.size} velocity samples, got {samples.shape[-1]}")
        return samples @ self.matrix.T

    def scatter(self, samples):
        """Gain term sum_j P_ij f_j (equals <f> for the isotropic kernel)."""
        return samples @ self.transfer.T


def apply_L(kernel: KernelSpec, rule: QuadratureRule, samples):
    return ScatteringOperator(kernel, rule).apply(samples)


def average_of_L(kernel: KernelSpec, rule: QuadratureRule, samples) -> float:
    return velocity_average(rule, apply_L(kernel, rule, np.asarray(samples, dtype=float)))
