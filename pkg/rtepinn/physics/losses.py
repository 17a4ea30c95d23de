#!/usr/bin/env python3
"""
Empirical least-squares losses over a :class:`TrainingSet`.

Every loss returns a :class:`LossBreakdown` whose terms are taped tensors, so the same
assembly serves plain evaluation and parameter gradients. Interior sums use the weights
w_ij = (spatial weight) * (velocity weight / |S|); boundary sums use 1/N per face scaled
by the face weight.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .problem import ProblemSpec, TrainingSet
from ..neural.mlp import MlpNetwork, NetworkBundle
from ..neural.tape import Tensor, as_tensor, grad_params
from ..numerics.quadrature import velocity_average
from ..utils.errors import InvalidArgumentError

PROJECTED = "projected"
PRINTED = "printed"


@dataclass
class LossBreakdown:
    total: Tensor
    terms: Dict[str, Tensor]

    @property
    def value(self) -> float:
        return self.total.item()

    def values(self) -> Dict[str, float]:
        return {name: term.item() for name, term in self.terms.items()}

    def get_status(self) -> dict:
        return {'total': self.value, **self.values()}


def breakdown_of(terms: Dict[str, Tensor]) -> LossBreakdown:
    total = None
    for term in terms.values():
        total = term if total is None else total + term
    return LossBreakdown(total, terms)


def weighted_square(residual, weights: np.ndarray) -> Tensor:
    residual = as_tensor(residual)
    return (residual * residual * weights).sum()


def _check_trainset(problem: ProblemSpec, trainset: TrainingSet, dim: Optional[int] = None):
    if trainset.problem is not problem:
        raise InvalidArgumentError("training set was built for a different problem")
    if dim is not None and problem.dim != dim:
        raise InvalidArgumentError(f"this loss needs a {dim}D problem, got {problem.dim}D")


@dataclass
class CorrectorSamples:
    """Frozen corrector values on the interior grid and the boundary samples."""
    interior: np.ndarray
    boundary: Dict[str, np.ndarray]
    interior_dy: Optional[np.ndarray] = None

    @classmethod
    def zeros(cls, trainset: TrainingSet) -> "CorrectorSamples":
        dy = np.zeros(trainset.shape) if trainset.dim == 2 else None
        return cls(np.zeros(trainset.shape),
                   {face: np.zeros(b.size) for face, b in trainset.boundary.items()}, dy)

    @classmethod
    def from_corrector(cls, trainset: TrainingSet, corrector) -> "CorrectorSamples":
        interior = corrector.evaluate(trainset.points).reshape(trainset.shape)
        boundary = {face: corrector.evaluate(b.points) for face, b in trainset.boundary.items()}
        dy = None
        if trainset.dim == 2:
            dy = corrector.evaluate_dy(trainset.points).reshape(trainset.shape)
        return cls(interior, boundary, dy)


def _gamma_samples(trainset: TrainingSet, gamma) -> CorrectorSamples:
    if gamma is None:
        return CorrectorSamples.zeros(trainset)
    if isinstance(gamma, CorrectorSamples):
        return gamma
    return CorrectorSamples.from_corrector(trainset, gamma)


def _boundary_terms(problem: ProblemSpec, trainset: TrainingSet,
                    trace: Callable[[str, np.ndarray], Tensor]) -> Dict[str, Tensor]:
    terms = {}
    for face, bset in trainset.boundary.items():
        misfit = trace(face, bset.points) - bset.data
        weights = np.full(bset.size, problem.face_weight(face) * bset.weight)
        terms[f"boundary_{face}"] = weighted_square(misfit, weights)
    return terms


def vanilla_loss(problem: ProblemSpec, trainset: TrainingSet, f_net) -> LossBreakdown:
    """Residual of the full equation for one network f(x[, y], v) plus inflow misfit."""
    _check_trainset(problem, trainset)
    shape = trainset.shape
    nodes = trainset.velocity_rule.nodes
    if problem.dim == 1:
        jet = f_net.jet(trainset.points, (0,), 1)
        eps = trainset.eps[:, None]
        transport = eps * nodes * jet.dx(0).reshape(shape)
        sigma_a = trainset.sigma_a[:, None]
        sigma_s = trainset.sigma_s[:, None]
    else:
        jet = f_net.jet(trainset.points, (0, 1), 1)
        eps = problem.eps
        transport = eps * (np.cos(nodes) * jet.dx(0).reshape(shape)
                           + np.sin(nodes) * jet.dx(1).reshape(shape))
        sigma_a = trainset.sigma_a[..., None]
        sigma_s = trainset.sigma_s[..., None]
    f = jet.value.reshape(shape)
    residual = (transport - sigma_s * trainset.scattering.apply(f)
                + (eps * eps * sigma_a) * f - (eps * eps) * trainset.source)
    terms = {"pde_residual": weighted_square(residual, trainset.interior_weights)}
    terms.update(_boundary_terms(problem, trainset, lambda face, pts: f_net.jet(pts).value))
    return breakdown_of(terms)


def _macro_micro_1d(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                    gamma: CorrectorSamples, include_mean_penalty: bool) -> LossBreakdown:
    n_x, n_v = trainset.shape
    rule = trainset.velocity_rule
    v = rule.nodes
    rho_jet = rho_net.jet(trainset.space_points, (0,), 1)
    g_jet = g_net.jet(trainset.points, (0,), 1)
    rho = rho_jet.value.reshape(n_x)
    rho_x = rho_jet.dx(0).reshape(n_x, 1)
    g = g_jet.value.reshape(n_x, n_v)
    g_x = g_jet.dx(0).reshape(n_x, n_v)

    eps = trainset.eps[:, None]
    sigma_s = trainset.sigma_s[:, None]
    sigma_a = trainset.sigma_a
    source_avg = velocity_average(rule, trainset.source)
    gamma_avg = velocity_average(rule, gamma.interior)

    # d/dx (eps g) with the analytic eps'
    d_eps_g = trainset.eps_dx[:, None] * g + eps * g_x
    flux = velocity_average(rule, v * d_eps_g)
    macro = flux * (1.0 / trainset.eps) + sigma_a * (rho + gamma_avg) - source_avg
    micro = (v * (rho_x + d_eps_g) - flux.reshape(n_x, 1)
             - sigma_s * trainset.scattering.apply(g)
             + (eps * eps * sigma_a[:, None]) * g
             + eps * sigma_a[:, None] * (gamma.interior - gamma_avg[:, None])
             - eps * (trainset.source - source_avg[:, None]))

    w_x = trainset.space_weights
    terms = {"macro_residual": weighted_square(macro, w_x),
             "micro_residual": weighted_square(micro, trainset.interior_weights)}
    if include_mean_penalty:
        terms["mean_constraint"] = weighted_square(velocity_average(rule, g), w_x)

    def trace(face, pts):
        eps_b = problem.epsilon(pts[:, 0])
        return rho_net.jet(pts[:, :1]).value + eps_b * g_net.jet(pts).value + gamma.boundary[face]

    terms.update(_boundary_terms(problem, trainset, trace))
    return breakdown_of(terms)


def _macro_micro_2d(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                    gamma: CorrectorSamples, include_mean_penalty: bool,
                    micro_form: str) -> LossBreakdown:
    if micro_form not in (PROJECTED, PRINTED):
        raise InvalidArgumentError(f"unknown micro form '{micro_form}'")
    n_x, n_y, n_a = trainset.shape
    rule = trainset.velocity_rule
    cos_a, sin_a = np.cos(rule.nodes), np.sin(rule.nodes)
    eps = problem.eps

    rho_jet = rho_net.jet(trainset.space_points, (0, 1), 1)
    g_jet = g_net.jet(trainset.points, (0, 1), 1)
    rho = rho_jet.value.reshape(n_x, n_y)
    rho_x = rho_jet.dx(0).reshape(n_x, n_y, 1)
    rho_y = rho_jet.dx(1).reshape(n_x, n_y, 1)
    g = g_jet.value.reshape(n_x, n_y, n_a)
    v_grad_g = cos_a * g_jet.dx(0).reshape(n_x, n_y, n_a) + sin_a * g_jet.dx(1).reshape(
        n_x, n_y, n_a)
    avg_v_grad_g = velocity_average(rule, v_grad_g)

    sigma_s = trainset.sigma_s[..., None]
    sigma_a = trainset.sigma_a
    source_avg = velocity_average(rule, trainset.source)
    gamma_avg = velocity_average(rule, gamma.interior)
    sin_dy_gamma = sin_a * gamma.interior_dy
    avg_sin_dy_gamma = velocity_average(rule, sin_dy_gamma)

    macro = (avg_v_grad_g + avg_sin_dy_gamma / eps + sigma_a * (rho + gamma_avg)
             - source_avg)
    streaming = cos_a * rho_x + sin_a * rho_y
    scatter = sigma_s * trainset.scattering.apply(g)
    if micro_form == PROJECTED:
        micro = (streaming + eps * (v_grad_g - avg_v_grad_g.reshape(n_x, n_y, 1))
                 + (sin_dy_gamma - avg_sin_dy_gamma[..., None]) - scatter
                 + (eps * eps * sigma_a[..., None]) * g
                 + eps * sigma_a[..., None] * (gamma.interior - gamma_avg[..., None])
                 - eps * (trainset.source - source_avg[..., None]))
    else:
        micro = (streaming + eps * v_grad_g + sin_dy_gamma - scatter
                 + (eps * sigma_a[..., None]) * (rho.reshape(n_x, n_y, 1) + eps * g
                                                 + gamma.interior)
                 - eps * trainset.source)

    w_xy = trainset.space_weights
    terms = {"macro_residual": weighted_square(macro, w_xy),
             "micro_residual": weighted_square(micro, trainset.interior_weights)}
    if include_mean_penalty:
        terms["mean_constraint"] = weighted_square(velocity_average(rule, g), w_xy)

    def trace(face, pts):
        return rho_net.jet(pts[:, :2]).value + eps * g_net.jet(pts).value + gamma.boundary[face]

    terms.update(_boundary_terms(problem, trainset, trace))
    return breakdown_of(terms)


def macro_micro_loss(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                     include_mean_penalty: bool = True,
                     micro_form: str = PROJECTED) -> LossBreakdown:
    """Macro residual, micro residual, optional <g> penalty and inflow misfit of rho + eps g."""
    _check_trainset(problem, trainset)
    if problem.dim == 1:
        return _macro_micro_1d(problem, trainset, rho_net, g_net, CorrectorSamples.zeros(trainset),
                               include_mean_penalty)
    return _macro_micro_2d(problem, trainset, rho_net, g_net, CorrectorSamples.zeros(trainset),
                           include_mean_penalty, micro_form)


def bl_corrected_loss_1d(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                         corrector, include_mean_penalty: bool = True) -> LossBreakdown:
    """
    Loss of the (rho~, g) system with the frozen layer corrector; ``corrector`` is a
    corrector object, precomputed :class:`CorrectorSamples`, or ``None`` for no layer.
    """
    _check_trainset(problem, trainset, 1)
    return _macro_micro_1d(problem, trainset, rho_net, g_net, _gamma_samples(trainset, corrector),
                           include_mean_penalty)


def bl_corrected_loss_2d(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                         corrector, include_mean_penalty: bool = True,
                         micro_form: str = PROJECTED) -> LossBreakdown:
    _check_trainset(problem, trainset, 2)
    return _macro_micro_2d(problem, trainset, rho_net, g_net, _gamma_samples(trainset, corrector),
                           include_mean_penalty, micro_form)


def hetero_eps_loss(problem: ProblemSpec, trainset: TrainingSet, rho_net, g_net,
                    include_mean_penalty: bool = False) -> LossBreakdown:
    """f = rho + eps(x) g with a spatially varying eps; two residuals plus inflow misfit."""
    _check_trainset(problem, trainset, 1)
    return _macro_micro_1d(problem, trainset, rho_net, g_net, CorrectorSamples.zeros(trainset),
                           include_mean_penalty)


@dataclass(frozen=True)
class RadiativeConstants:
    """Constants of the coupled intensity/temperature system and the temperature data."""
    a: float = 1.0
    c: float = 1.0
    sigma: float = 1.0
    t_left: float = 1.0
    t_right: float = 0.0

    def __post_init__(self):
        if self.a < 0 or self.c < 0 or not self.sigma > 0:
            raise InvalidArgumentError("radiative constants need a, c >= 0 and sigma > 0")

    @property
    def kappa(self) -> float:
        return self.a * self.c / (3.0 * self.sigma)


def nonlinear_loss(trainset: TrainingSet, rho_net, g_net, t_net,
                   constants: RadiativeConstants = RadiativeConstants(),
                   include_mean_penalty: bool = False) -> LossBreakdown:
    """
    Six-term loss of I = rho + eps g coupled to the temperature T:

        <v g_x> - T_xx,   v (rho + eps g)_x - eps T_xx + sigma g,
        eps^2 T_xx - sigma a c T^4 + sigma rho,   intensity inflow misfit,   T(0), T(1).
    """
    problem = trainset.problem
    if problem.dim != 1:
        raise InvalidArgumentError("the radiative system is one-dimensional")
    n_x, n_v = trainset.shape
    rule = trainset.velocity_rule
    v = rule.nodes
    eps = problem.eps
    sigma, ac = constants.sigma, constants.a * constants.c

    x = trainset.space_points
    rho_jet = rho_net.jet(x, (0,), 1)
    t_jet = t_net.jet(x, (0,), 2)
    g_jet = g_net.jet(trainset.points, (0,), 1)
    rho = rho_jet.value.reshape(n_x)
    t = t_jet.value.reshape(n_x)
    t_xx = t_jet.dxx(0).reshape(n_x)
    g = g_jet.value.reshape(n_x, n_v)
    g_x = g_jet.dx(0).reshape(n_x, n_v)

    macro = velocity_average(rule, v * g_x) - t_xx
    micro = (v * (rho_jet.dx(0).reshape(n_x, 1) + eps * g_x) - eps * t_xx.reshape(n_x, 1)
             + sigma * g)
    t2 = t * t
    temperature = (eps * eps) * t_xx - (sigma * ac) * (t2 * t2) + sigma * rho

    w_x = trainset.space_weights
    terms = {"macro_residual": weighted_square(macro, w_x),
             "micro_residual": weighted_square(micro, trainset.interior_weights),
             "temperature_residual": weighted_square(temperature, w_x)}
    if include_mean_penalty:
        terms["mean_constraint"] = weighted_square(velocity_average(rule, g), w_x)
    terms.update(_boundary_terms(
        problem, trainset,
        lambda face, pts: rho_net.jet(pts[:, :1]).value + eps * g_net.jet(pts).value))
    ends = t_net.jet(np.array([[0.0], [1.0]])).value
    terms["temperature_left"] = (ends[0] - constants.t_left) ** 2
    terms["temperature_right"] = (ends[1] - constants.t_right) ** 2
    return breakdown_of(terms)


class PinnObjective:
    """
    Flat-parameter objective over a :class:`NetworkBundle`.

    ``assemble`` maps the bound networks (a name -> network dict) to a LossBreakdown;
    calling the objective returns the loss value and its parameter gradient.
    """

    def __init__(self, bundle: NetworkBundle,
                 assemble: Callable[[Dict[str, MlpNetwork]], LossBreakdown]):
        self.bundle = bundle
        self.assemble = assemble
        self.evaluations = 0

    def breakdown(self, theta: np.ndarray) -> LossBreakdown:
        return self.assemble(self.bundle.bind(np.asarray(theta, dtype=float)))

    def __call__(self, theta: np.ndarray) -> Tuple[float, np.ndarray]:
        self.evaluations += 1
        return grad_params(lambda leaf: self.assemble(self.bundle.bind(leaf)).total, theta)
