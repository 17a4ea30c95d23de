#!/usr/bin/env python3
"""
Empirical stability sweep on the toy problem (exact solution f* = 1 - x).

For manufactured perturbations of the exact solution the table records

    ratio = ||f - f*||^2 / E(f)

per Knudsen number, for the macro-micro loss and for the vanilla loss. The stability
constant at one eps is the largest ratio over the candidates. Both numerator and
loss are quadratic in the perturbation size, so the ratio does not depend on it.

Candidates (x-polynomials are Legendre series on [0, 1]):
  macro-micro   rho = 1 - x + delta p(x),   g = delta r(x) P_l(v),  l in {2, 3, 4}
  vanilla       f = 1 - x + delta x (1 - x) q(x)
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import Legendre

from .registry import MACRO_MICRO, VANILLA, build_problem
from ..physics.losses import macro_micro_loss, vanilla_loss
from ..physics.problem import AnalyticField, TrainingSet
from ..utils.errors import InvalidArgumentError
from ..utils.logger import get_logger

DEFAULT_EPSILONS = (1.0, 1e-1, 1e-2, 1e-3)
_X_DEGREE = 4
_G_AMPLITUDE = 0.3
_DOMAIN = [0.0, 1.0]


@dataclass
class StabilityRow:
    loss: str
    epsilon: float
    candidate: int
    error: float
    loss_value: float

    @property
    def ratio(self) -> float:
        return self.error / self.loss_value


@dataclass
class StabilityTable:
    rows: List[StabilityRow] = field(default_factory=list)

    def constants(self, loss: str) -> Dict[float, float]:
        """Largest ratio over the candidates, per eps."""
        out: Dict[float, float] = {}
        for row in self.rows:
            if row.loss == loss:
                out[row.epsilon] = max(out.get(row.epsilon, 0.0), row.ratio)
        return out

    def spread(self, loss: str = MACRO_MICRO) -> float:
        values = list(self.constants(loss).values())
        if not values:
            raise InvalidArgumentError(f"no '{loss}' rows in the stability table")
        return max(values) / min(values)

    def growth(self, loss: str, eps_from: float, eps_to: float) -> float:
        constants = self.constants(loss)
        try:
            return constants[eps_to] / constants[eps_from]
        except KeyError as e:
            raise InvalidArgumentError(f"eps {e.args[0]} was not swept") from None

    def vanilla_growth(self, eps_from: float = 1e-1, eps_to: float = 1e-3) -> float:
        return self.growth(VANILLA, eps_from, eps_to)

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["loss", "epsilon", "candidate", "error", "loss_value", "ratio"])
            for r in self.rows:
                writer.writerow([r.loss, f"{r.epsilon:.17g}", r.candidate, f"{r.error:.17g}",
                                 f"{r.loss_value:.17g}", f"{r.ratio:.17g}"])
        return path

    def as_records(self) -> List[dict]:
        return [{'loss': r.loss, 'epsilon': r.epsilon, 'candidate': r.candidate,
                 'error': r.error, 'loss_value': r.loss_value, 'ratio': r.ratio}
                for r in self.rows]

    def get_status(self) -> dict:
        status = {'rows': len(self.rows)}
        for loss in (MACRO_MICRO, VANILLA):
            if self.constants(loss):
                status[f'{loss}_constants'] = self.constants(loss)
                status[f'{loss}_spread'] = self.spread(loss)
        return status


@dataclass(frozen=True)
class _Candidate:
    p: Legendre
    r: Legendre
    degree: int


def _legendre(coef) -> Legendre:
    return Legendre(coef, domain=_DOMAIN)


def _draw_candidates(n: int, rng: np.random.Generator) -> List[_Candidate]:
    out = []
    for _ in range(n):
        p = _legendre(rng.standard_normal(_X_DEGREE + 1))
        r = _legendre(_G_AMPLITUDE * rng.standard_normal(_X_DEGREE + 1))
        out.append(_Candidate(p, r, int(rng.integers(2, 5))))
    return out


def _vanilla_shapes(n: int, rng: np.random.Generator) -> List[Legendre]:
    """x (1 - x) q(x); the first one is (1 - x)^2 - (1 - x)."""
    shapes = [Legendre.fromroots([0.0, 1.0], domain=_DOMAIN)]
    bubble = -shapes[0]
    for _ in range(n - 1):
        shapes.append(bubble * _legendre(rng.standard_normal(_X_DEGREE - 1)))
    return shapes


def _macro_micro_fields(c: _Candidate, delta: float, eps: float):
    p, dp = c.p, c.p.deriv()
    r, dr = c.r, c.r.deriv()
    pl = Legendre.basis(c.degree)
    rho = AnalyticField(lambda z: 1.0 - z[:, 0] + delta * p(z[:, 0]),
                        [lambda z: -1.0 + delta * dp(z[:, 0])])
    g = AnalyticField(lambda z: delta * r(z[:, 0]) * pl(z[:, 1]),
                      [lambda z: delta * dr(z[:, 0]) * pl(z[:, 1])])
    error = lambda x, v: delta * (p(x) + eps * r(x) * pl(v))
    return rho, g, error


def _squared_error(trainset: TrainingSet, error_fn) -> float:
    x = trainset.space_rules[0].nodes[:, None]
    v = trainset.velocity_rule.nodes[None, :]
    return float(np.sum(trainset.interior_weights * error_fn(x, v) ** 2))


def run_stability_sweep(eps_list: Sequence[float] = DEFAULT_EPSILONS, n_candidates: int = 50,
                        seed: int = 0, delta: float = 1e-2, n_x: int = 80, n_v: int = 60,
                        n_b: int = 60, losses: Sequence[str] = (MACRO_MICRO, VANILLA),
                        ) -> StabilityTable:
    """Tabulate ||f - f*||^2 / E(f) over ``n_candidates`` perturbations at each eps."""
    if n_candidates < 1 or not delta > 0:
        raise InvalidArgumentError("stability sweep needs candidates >= 1 and delta > 0")
    unknown = set(losses) - {MACRO_MICRO, VANILLA}
    if unknown:
        raise InvalidArgumentError(f"stability sweep supports {MACRO_MICRO} and {VANILLA}")
    logger = get_logger()
    rng = np.random.default_rng(seed)
    candidates = _draw_candidates(n_candidates, rng)
    shapes = _vanilla_shapes(n_candidates, rng)
    table = StabilityTable()

    for eps in eps_list:
        problem = build_problem("toy-mm", {'epsilon': float(eps)}, name=f"stability-eps{eps:g}")
        trainset = TrainingSet.build(problem, n_x, n_v, n_b, seed)
        if MACRO_MICRO in losses:
            for k, c in enumerate(candidates):
                rho, g, error = _macro_micro_fields(c, delta, float(eps))
                value = macro_micro_loss(problem, trainset, rho, g,
                                         include_mean_penalty=False).value
                table.rows.append(StabilityRow(MACRO_MICRO, float(eps), k,
                                               _squared_error(trainset, error), value))
        if VANILLA in losses:
            for k, shape in enumerate(shapes):
                d_shape = shape.deriv()
                f = AnalyticField(lambda z, s=shape: 1.0 - z[:, 0] + delta * s(z[:, 0]),
                                  [lambda z, s=d_shape: -1.0 + delta * s(z[:, 0])])
                value = vanilla_loss(problem, trainset, f).value
                error = lambda x, v, s=shape: delta * s(x) * np.ones_like(v)
                table.rows.append(StabilityRow(VANILLA, float(eps), k,
                                               _squared_error(trainset, error), value))
        logger.log_solver_event("stability", "swept", f"eps={eps:g} candidates={n_candidates}")

    status = table.get_status()
    logger.log_experiment_event("stability sweep done", "stability",
                                " ".join(f"{k}={v:.3e}" for k, v in status.items()
                                         if k.endswith("spread")))
    return table
