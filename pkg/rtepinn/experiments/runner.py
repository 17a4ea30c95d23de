#!/usr/bin/env python3
"""
Experiment driver: build the training set and networks, compute the reference,
train with the two-phase schedule and collect metrics into a ResultRecord.
"""

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import ExperimentConfig
from .metrics import both_errors
from .registry import (ANALYTIC, ANALYTIC_SOLUTIONS, BL_CORRECTED, FDM, HALFSPACE, HETERO,
                       LIMIT, MACRO_MICRO, NONLINEAR, VANILLA)
from .results import ResultRecord, emit_results
from .stability import run_stability_sweep
from ..boundary_layer.corrector import GammaCorrector, GammaCorrector2D, load_corrector
from ..boundary_layer.halfspace import HalfSpaceSpec, solve_halfspace_1d, solve_halfspace_2d
from ..boundary_layer.hfunction import (cached_table, f_bl_infinity_1d, f_bl_infinity_2d,
                                        reflection_bc_1d, reflection_bc_2d)
from ..neural.mlp import IDENTITY, SOFTPLUS, MlpSpec, NetworkBundle
from ..numerics.quadrature import QuadratureRule, gauss_legendre, trapezoid_rule, uniform_rule
from ..optim.schedule import two_phase_train
from ..physics.losses import (CorrectorSamples, LossBreakdown, PinnObjective, RadiativeConstants,
                              bl_corrected_loss_1d, bl_corrected_loss_2d, hetero_eps_loss,
                              macro_micro_loss, nonlinear_loss, vanilla_loss)
from ..physics.problem import ProblemSpec, SolutionBundle, TrainingSet
from ..reference.diffusion import (boundary_from_hfunction_1d, boundary_from_hfunction_2d,
                                   diffusion_limit_solve)
from ..reference.fields import Field, Mesh1D, split_nodes
from ..reference.nonlinear import fdm_nonlinear_1d, limit_profile
from ..reference.transport import fdm_rte_1d, fdm_rte_2d
from ..utils.errors import ConfigError, NumericalFailure, RtePinnError
from ..utils.logger import get_logger

# z samples for the zero-flux check of trained half-space solutions
_FLUX_SAMPLES = 21


@contextmanager
def _phase(name: str, experiment_id: str):
    """Tag failures raised inside the block with the phase they happened in."""
    logger = get_logger()
    logger.log_experiment_event(f"phase {name}", experiment_id)
    try:
        yield
    except RtePinnError as e:
        if e.phase is None:
            e.phase = name
        logger.log_error_with_context(e, f"{experiment_id} [{name}]")
        raise
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        failure = NumericalFailure(f"{type(e).__name__}: {e}", phase=name)
        logger.log_error_with_context(failure, f"{experiment_id} [{name}]")
        raise failure from e
    except OSError as e:
        failure = ConfigError(f"{type(e).__name__}: {e}")
        failure.phase = name
        logger.log_error_with_context(failure, f"{experiment_id} [{name}]")
        raise failure from e


def _radiative_constants(cfg: ExperimentConfig) -> RadiativeConstants:
    p = cfg.section('problem')
    return RadiativeConstants(a=p['a'], c=p['c'], sigma=p['sigma'])


def build_training_set(cfg: ExperimentConfig, problem: ProblemSpec) -> TrainingSet:
    c = cfg.section('collocation')
    x_nodes = None
    if c['x_mesh'] == "split":
        if problem.dim != 1:
            raise ConfigError("split collocation is defined for 1D problems")
        x_nodes = split_nodes(cfg.epsilon, c['split_inner'], c['split_outer'])
    return TrainingSet.build(problem, c['n_x'], c['n_v'], c['n_b'], cfg.seed,
                             n_y=c['n_y'] or None, x_nodes=x_nodes,
                             face_points=c['face_points'] or None)


def network_specs(cfg: ExperimentConfig, kind: str, dim: int) -> Dict[str, MlpSpec]:
    n = cfg.section('network')
    layers, width = n['n_layers'], n['n_width']
    if kind == VANILLA:
        return {"f": MlpSpec.build(dim + 1, layers, width, 1, IDENTITY)}
    specs = {"rho": MlpSpec.build(dim, layers, width, 1, SOFTPLUS),
             "g": MlpSpec.build(dim + 1, layers, width, 1, IDENTITY)}
    if kind == NONLINEAR:
        specs["T"] = MlpSpec.build(1, layers, width, 1, SOFTPLUS)
    return specs


def _assembler(cfg: ExperimentConfig, kind: str, problem: ProblemSpec, trainset: TrainingSet,
               corrector) -> Callable[[dict], LossBreakdown]:
    loss = cfg.section('loss')
    penalty, form = loss['mean_penalty'], loss['micro_form']
    if kind == VANILLA:
        return lambda nets: vanilla_loss(problem, trainset, nets["f"])
    if kind == MACRO_MICRO:
        return lambda nets: macro_micro_loss(problem, trainset, nets["rho"], nets["g"],
                                             penalty, form)
    if kind == BL_CORRECTED:
        samples = CorrectorSamples.from_corrector(trainset, corrector)
        if problem.dim == 1:
            return lambda nets: bl_corrected_loss_1d(problem, trainset, nets["rho"], nets["g"],
                                                     samples, penalty)
        return lambda nets: bl_corrected_loss_2d(problem, trainset, nets["rho"], nets["g"],
                                                 samples, penalty, form)
    if kind == HETERO:
        return lambda nets: hetero_eps_loss(problem, trainset, nets["rho"], nets["g"], penalty)
    if kind == NONLINEAR:
        constants = _radiative_constants(cfg)
        return lambda nets: nonlinear_loss(trainset, nets["rho"], nets["g"], nets["T"],
                                           constants, penalty)
    raise ConfigError(f"unknown loss kind '{kind}'")


def _solution(problem: ProblemSpec, nets: dict, corrector=None) -> SolutionBundle:
    if "f" in nets:
        return SolutionBundle(problem, f=nets["f"])
    return SolutionBundle(problem, rho=nets["rho"], g=nets["g"], corrector=corrector,
                          temperature=nets.get("T"))


def _train_halfspace(cfg: ExperimentConfig, problem: ProblemSpec):
    """Half-space solve(s) for the left-face inflow of ``problem``."""
    hs = cfg.section('halfspace')
    common = dict(n_layers=hs['n_layers'], n_width=hs['n_width'], seed=cfg.seed,
                  adam_cfg=cfg.adam_config(), lbfgs_cfg=cfg.lbfgs_config(), stop=cfg.stop_rule())
    if problem.dim == 1:
        spec = HalfSpaceSpec.from_config(lambda v: problem.inflow_at("left", v), 1, hs)
        return solve_halfspace_1d(spec, **common)
    spec = HalfSpaceSpec.from_config(lambda y, a: problem.inflow_at("left", y, a), 2, hs)
    return solve_halfspace_2d(spec, np.linspace(-1.0, 1.0, hs['y_nodes']),
                              max_workers=hs['max_workers'], **common)


def obtain_corrector(cfg: ExperimentConfig, problem: ProblemSpec):
    """Load the configured corrector checkpoint, or train the half-space problem first."""
    logger = get_logger()
    path = cfg.get('halfspace', 'corrector')
    if path:
        corrector = load_corrector(path)
        if corrector.dim != problem.dim:
            raise ConfigError(f"corrector at {path} is {corrector.dim}D, problem is {problem.dim}D")
        if corrector.epsilon != cfg.epsilon:
            logger.log_solver_event("corrector", "rescaled",
                                    f"eps {corrector.epsilon:g} -> {cfg.epsilon:g}")
            corrector = corrector.rescaled(cfg.epsilon)
        return corrector
    logger.log_experiment_event("training corrector", cfg.experiment_id,
                                "no [halfspace] corrector checkpoint configured")
    trained = _train_halfspace(cfg, problem)
    if problem.dim == 1:
        return GammaCorrector.from_solution(trained, cfg.epsilon)
    return GammaCorrector2D.from_family(trained, cfg.epsilon)


def _density_rule(cfg: ExperimentConfig, dim: int) -> QuadratureRule:
    fdm = cfg.section('fdm')
    if dim == 1:
        return gauss_legendre(fdm['n_v'], -1.0, 1.0)
    return uniform_rule(fdm['n_alpha'], 0.0, 2.0 * np.pi, shift=0.5)


def _reference_mesh(cfg: ExperimentConfig) -> Mesh1D:
    fdm, c = cfg.section('fdm'), cfg.section('collocation')
    kind = fdm['mesh']
    if kind == "auto":
        kind = "layered" if cfg.thin_layer else "uniform"
    if kind == "split":
        return Mesh1D.split(cfg.epsilon, c['split_inner'], c['split_outer'], fdm['n_v'])
    if kind == "layered":
        return Mesh1D.layered(cfg.epsilon, fdm['layer_width'], n_v=fdm['n_v'])
    return Mesh1D.uniform(fdm['n_x'], fdm['n_v'])


def _analytic_reference(cfg: ExperimentConfig, problem: ProblemSpec) -> Field:
    solution = ANALYTIC_SOLUTIONS.get(cfg.experiment_id)
    if solution is None:
        raise ConfigError(f"no analytic solution registered for {cfg.experiment_id}")
    fdm = cfg.section('fdm')
    rule = _density_rule(cfg, problem.dim)
    if problem.dim == 1:
        x = np.linspace(0.0, 1.0, fdm['n_x'])
        values = solution(x[:, None], rule.nodes[None, :]) * np.ones(rule.size)
        return Field(values, {"x": x, "v": rule.nodes},
                     {"x": trapezoid_rule(x).weights, "v": rule.weights}, name="f",
                     info={'solver': ANALYTIC})
    x, y = np.linspace(-1.0, 1.0, fdm['n_x']), np.linspace(-1.0, 1.0, fdm['n_y'])
    values = solution(x[:, None, None], y[None, :, None], rule.nodes) * np.ones(rule.size)
    return Field(values, {"x": x, "y": y, "alpha": rule.nodes}, {"alpha": rule.weights},
                 name="f", info={'solver': ANALYTIC})


def compute_reference(cfg: ExperimentConfig,
                      problem: Optional[ProblemSpec] = None) -> Dict[str, Field]:
    """
    Reference fields of ``cfg``; the first entry is the one the training monitor and
    the headline metric use.
    """
    problem = problem or cfg.problem()
    kind, fdm = cfg.reference_kind, cfg.section('fdm')
    nonlinear = cfg.loss_kind == NONLINEAR
    if kind == ANALYTIC:
        return {"f": _analytic_reference(cfg, problem)}
    if kind == FDM and nonlinear:
        intensity, temperature = fdm_nonlinear_1d(
            _radiative_constants(cfg), cfg.epsilon, Mesh1D.uniform(fdm['n_x'], fdm['n_v']),
            fdm['theta'], inflow=problem.inflow)
        return {"T": temperature, "I": intensity}
    if kind == FDM and problem.dim == 1:
        return {"f": fdm_rte_1d(problem, _reference_mesh(cfg), fdm['theta'], tol=fdm['tol'],
                                max_sweeps=fdm['max_sweeps'],
                                direct_limit=fdm['direct_limit'])}
    if kind == FDM:
        return {"f": fdm_rte_2d(problem, fdm['n_x'], fdm['n_y'], fdm['n_alpha'],
                                tol=fdm['tol'], max_sweeps=fdm['max_sweeps'],
                                max_workers=cfg.get('halfspace', 'max_workers'))}
    if kind == LIMIT and nonlinear:
        x = np.linspace(0.0, 1.0, fdm['n_x'])
        profile = limit_profile(_radiative_constants(cfg), x)
        info = {'solver': "nonlinear-limit"}
        return {"T": Field(profile['T'], {"x": x}, name="T", info=info),
                "rho": Field(profile['rho'], {"x": x}, name="rho0", info=info)}
    if kind == LIMIT:
        hs = cfg.section('halfspace')
        table = cached_table(problem.dim, hs['h_nodes'], hs['h_tol'], hs['h_max_iter'])
        if problem.dim == 1:
            boundary = boundary_from_hfunction_1d(problem, table)
            return {"rho": diffusion_limit_solve(1, boundary, fdm['n_x'],
                                                 sigma_s=problem.sigma_s,
                                                 sigma_a=problem.sigma_a)}
        boundary = boundary_from_hfunction_2d(problem, table)
        return {"rho": diffusion_limit_solve(2, boundary, fdm['n_x'], fdm['n_y'])}
    raise ConfigError(f"{cfg.experiment_id}: no field reference of kind '{kind}'")


def predict(solution: SolutionBundle, reference: Field, rule: QuadratureRule) -> Field:
    """The trained solution sampled on the grid of ``reference``."""
    axes = reference.axes
    if reference.name == "T":
        x = axes["x"]
        values = solution.temperature(x[:, None])
        return Field(values, axes, reference.weights, name="T_pred")
    velocity = reference.velocity_axis
    spatial = [a for k, a in axes.items() if k != velocity]
    mesh = np.meshgrid(*spatial, indexing="ij")
    space_points = np.column_stack([m.ravel() for m in mesh])
    if velocity is not None:
        values = solution.evaluate(space_points, axes[velocity])
    else:
        # the limit density is compared against the smooth part only
        interior = dataclasses.replace(solution, corrector=None)
        values = interior.density(space_points, rule)
    return Field(values.reshape(reference.shape), axes, reference.weights,
                 name=f"{reference.name}_pred")


def _field_metrics(predicted: Dict[str, Field], reference: Dict[str, Field]) -> Dict[str, float]:
    metrics = {}
    for k, (key, ref) in enumerate(reference.items()):
        errors = both_errors(predicted[key], ref)
        prefix = "" if k == 0 else f"{key}_"
        metrics.update({f"{prefix}{name}": value for name, value in errors.items()})
    return metrics


def run_experiment(cfg: ExperimentConfig, corrector=None) -> ResultRecord:
    """Build, reference, train and score one experiment."""
    logger = get_logger()
    started = time.perf_counter()
    experiment_id = cfg.experiment_id
    kind = cfg.loss_kind
    logger.log_experiment_event("start", experiment_id,
                                " ".join(f"{k}={v}" for k, v in cfg.get_status().items()))
    if kind == HALFSPACE:
        return _run_halfspace(cfg, started)

    with _phase("build", experiment_id):
        problem = cfg.problem()
        trainset = build_training_set(cfg, problem)
    if kind == BL_CORRECTED and corrector is None:
        with _phase("corrector", experiment_id):
            corrector = obtain_corrector(cfg, problem)
    with _phase("build", experiment_id):
        bundle = NetworkBundle(network_specs(cfg, kind, problem.dim))
        objective = PinnObjective(bundle, _assembler(cfg, kind, problem, trainset, corrector))
        theta0 = bundle.init_params(cfg.seed)

    with _phase("reference", experiment_id):
        reference = compute_reference(cfg, problem)
        primary = next(iter(reference))
        rule = _density_rule(cfg, problem.dim)

    def monitor(theta: np.ndarray) -> float:
        solution = _solution(problem, bundle.bind(theta), corrector)
        return both_errors(predict(solution, reference[primary], rule),
                           reference[primary])['rel_l2']

    training = cfg.section('training')
    with _phase("train", experiment_id):
        result = two_phase_train(objective, theta0, cfg.adam_config(), cfg.lbfgs_config(),
                                 cfg.stop_rule(), monitor, training['error_every'],
                                 training['log_every'])

    with _phase("metrics", experiment_id):
        nets = bundle.bind(result.params)
        solution = _solution(problem, nets, corrector)
        predicted = {key: predict(solution, ref, rule) for key, ref in reference.items()}
        metrics = {'loss': result.loss, 'iterations': result.iterations,
                   'grad_norm': result.grad_norm,
                   **{f"loss_{k}": v for k, v in objective.breakdown(result.params).values().items()},
                   **_field_metrics(predicted, reference)}

    fields = {f"reference_{k}": f for k, f in reference.items()}
    fields.update({f"predicted_{k}": f for k, f in predicted.items()})
    wall = time.perf_counter() - started
    logger.log_experiment_event("done", experiment_id,
                                f"loss={result.loss:.3e} rel_l2={metrics['rel_l2']:.3e} "
                                f"wall={wall:.1f}s status={result.status}")
    return ResultRecord(experiment_id, cfg.seed, cfg.snapshot(), result.history, fields,
                        metrics, wall_clock=wall, status=result.status,
                        corrector=corrector if kind == BL_CORRECTED else None,
                        networks=nets)


def _run_halfspace(cfg: ExperimentConfig, started: float) -> ResultRecord:
    experiment_id = cfg.experiment_id
    hs = cfg.section('halfspace')
    with _phase("build", experiment_id):
        problem = cfg.problem()
    with _phase("train", experiment_id):
        trained = _train_halfspace(cfg, problem)
    with _phase("reference", experiment_id):
        table = cached_table(problem.dim, hs['h_nodes'], hs['h_tol'], hs['h_max_iter'])
    with _phase("metrics", experiment_id):
        if problem.dim == 1:
            metrics, tables, fields, status = _score_halfspace_1d(problem, trained, table)
            corrector = GammaCorrector.from_solution(trained, cfg.epsilon)
            networks = {"f_bl": trained.network} if trained.result is not None else {}
        else:
            metrics, tables, fields, status = _score_halfspace_2d(problem, trained, table)
            corrector = GammaCorrector2D.from_family(trained, cfg.epsilon)
            networks = {}
    wall = time.perf_counter() - started
    get_logger().log_experiment_event("done", experiment_id,
                                      " ".join(f"{k}={v:.4e}" for k, v in metrics.items()))
    return ResultRecord(experiment_id, cfg.seed, cfg.snapshot(), None, fields, metrics, tables,
                        wall, status, corrector, networks)


def _score_halfspace_1d(problem: ProblemSpec, solution, table) -> Tuple[dict, dict, dict, str]:
    phi = lambda v: problem.inflow_at("left", v)
    spec = solution.spec
    f_inf_ref = f_bl_infinity_1d(phi, table)
    z = np.linspace(0.0, spec.z_max, _FLUX_SAMPLES)
    outgoing = -gauss_legendre(spec.n_v, 0.0, 1.0).nodes[::-1]
    trained = solution.trace(outgoing)
    exact = reflection_bc_1d(phi, table, outgoing)
    weights = gauss_legendre(spec.n_v, 0.0, 1.0).weights[::-1]
    metrics = {'f_inf': solution.f_inf, 'f_inf_reference': f_inf_ref,
               'f_inf_abs_error': abs(solution.f_inf - f_inf_ref),
               'max_abs_flux': float(np.max(np.abs(solution.flux(z)))),
               **{f"reflection_{k}": v
                  for k, v in both_errors(trained, exact, weights).items()}}
    z_grid, v_rule = np.linspace(0.0, spec.z_max, 101), spec.velocity_rule
    values = solution(z_grid[:, None], v_rule.nodes[None, :])
    fields = {"f_bl": Field(values, {"z": z_grid, "v": v_rule.nodes},
                            {"v": v_rule.weights}, name="f_bl")}
    tables = {"reflection": [{'v': float(v), 'trained': float(t), 'hfunction': float(e)}
                             for v, t, e in zip(outgoing, trained, exact)]}
    status = solution.result.status if solution.result is not None else "analytic"
    return metrics, tables, fields, status


def _score_halfspace_2d(problem: ProblemSpec, family, table) -> Tuple[dict, dict, dict, str]:
    phi = lambda y, a: problem.inflow_at("left", y, a)
    y = family.y_grid
    f_inf_ref = f_bl_infinity_2d(phi, table, y)
    j = int(np.argmin(np.abs(y)))
    centre = family.solutions[j]
    beta = centre.spec.velocity_rule.nodes
    beta = beta[np.cos(beta) < 0]
    trained_trace = centre.trace(beta)
    exact_trace = reflection_bc_2d(phi, table, float(y[j]), beta)
    z = np.linspace(0.0, centre.spec.z_max, _FLUX_SAMPLES)
    flux = max(float(np.max(np.abs(s.flux(z)))) for s in family.solutions)
    metrics = {**{f"f_inf_{k}": v
                  for k, v in both_errors(family.f_inf, f_inf_ref,
                                          trapezoid_rule(y).weights).items()},
               'f_inf_max_abs_error': float(np.max(np.abs(family.f_inf - f_inf_ref))),
               'f_inf_centre': float(np.interp(0.0, y, family.f_inf)),
               'f_inf_centre_reference': float(f_bl_infinity_2d(phi, table, 0.0)[0]),
               'max_abs_flux': flux,
               **{f"reflection_{k}": v
                  for k, v in both_errors(trained_trace, exact_trace).items()}}
    fields = {"f_inf": Field(family.f_inf, {"y": y}, name="f_inf"),
              "f_inf_reference": Field(f_inf_ref, {"y": y}, name="f_inf_reference")}
    tables = {"reflection": [{'y': float(y[j]), 'beta': float(b), 'trained': float(t),
                              'hfunction': float(e)}
                             for b, t, e in zip(beta, trained_trace, exact_trace)]}
    statuses = {s.result.status for s in family.solutions if s.result is not None}
    return metrics, tables, fields, ",".join(sorted(statuses)) or "analytic"


def run_and_emit(cfg: ExperimentConfig, corrector=None) -> ResultRecord:
    record = run_experiment(cfg, corrector)
    with _phase("emit", cfg.experiment_id):
        emit_results(record, cfg.output_dir, cfg.formats)
    return record


def run_stability(cfg: ExperimentConfig) -> ResultRecord:
    """The stability sweep with the [stability] and [collocation] settings of ``cfg``."""
    started = time.perf_counter()
    s, c = cfg.section('stability'), cfg.section('collocation')
    with _phase("stability", cfg.experiment_id):
        table = run_stability_sweep(s['epsilons'], s['candidates'], cfg.seed, s['delta'],
                                    c['n_x'], c['n_v'], c['n_b'])
    metrics = {'macro_micro_spread': table.spread(MACRO_MICRO)}
    if min(s['epsilons']) <= 1e-3 < 1e-1 <= max(s['epsilons']):
        metrics['vanilla_growth'] = table.vanilla_growth(1e-1, 1e-3)
    return ResultRecord("stability", cfg.seed, cfg.snapshot(), metrics=metrics,
                        tables={"stability": table.as_records()},
                        wall_clock=time.perf_counter() - started)


def _run_job(cfg: ExperimentConfig) -> Tuple[str, int, str]:
    """Worker entry: (experiment id, exit code, message)."""
    try:
        record = run_and_emit(cfg)
        return cfg.experiment_id, 0, record.status
    except RtePinnError as e:
        return cfg.experiment_id, e.exit_code, str(e)


def run_many(configs: Sequence[ExperimentConfig], jobs: int = 1) -> List[Tuple[str, int, str]]:
    """Independent experiments, ``jobs`` processes at a time; results in input order."""
    if jobs <= 1 or len(configs) <= 1:
        return [_run_job(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, configs))
