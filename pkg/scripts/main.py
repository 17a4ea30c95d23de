#!/usr/bin/env python3
"""
rtepinn - command line entry

    main.py train <config>... [--jobs N] [--long] [--eps E] [--seed S]
    main.py fdm <config>
    main.py hfun --dim {1,2}
    main.py halfspace <config>
    main.py stability <config>
    main.py compare <pred> <ref>

Exit codes: 0 success, 1 other failure, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys
import time
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

import numpy as np

from rtepinn.boundary_layer.hfunction import cached_table, f_bl_infinity_1d, f_bl_infinity_2d
from rtepinn.experiments.config import ExperimentConfig, default_sections
from rtepinn.experiments.metrics import both_errors
from rtepinn.experiments.registry import HALFSPACE
from rtepinn.experiments.results import ResultRecord, emit_results
from rtepinn.experiments.runner import (compute_reference, run_and_emit, run_many,
                                        run_stability)
from rtepinn.reference.fields import Field
from rtepinn.utils.errors import ConfigError, RtePinnError
from rtepinn.utils.logger import get_logger


def print_banner():
    """Print startup banner"""
    print("=" * 60)
    print("🌞 rtepinn - Neural solvers for steady radiative transfer")
    print("   Macro-micro losses, boundary-layer correctors, FDM references")
    print("=" * 60)


def load_experiment(path: str, args) -> ExperimentConfig:
    """Config file plus the --eps/--seed overrides; long runs need --long."""
    cfg = ExperimentConfig.from_toml(path)
    overrides = {}
    if getattr(args, "eps", None) is not None:
        overrides['problem'] = {'epsilon': args.eps}
    if getattr(args, "seed", None) is not None:
        overrides['experiment'] = {'seed': args.seed}
    if overrides:
        cfg = cfg.with_overrides(overrides)
    if cfg.is_long and not getattr(args, "long", False):
        raise ConfigError(f"{cfg.experiment_id} is a long experiment; pass --long to run it")
    return cfg


def _print_metrics(record: ResultRecord):
    print(f"\n📊 {record.experiment_id} (seed {record.seed}) - {record.status}, "
          f"{record.wall_clock:.1f}s")
    for key, value in record.metrics.items():
        print(f"   {key:<28} {value:.6e}")


def cmd_train(args) -> int:
    configs = [load_experiment(path, args) for path in args.configs]
    if len(configs) == 1:
        _print_metrics(run_and_emit(configs[0]))
        return 0
    worst = 0
    for experiment_id, code, message in run_many(configs, args.jobs):
        mark = "✅" if code == 0 else "❌"
        print(f"   {mark} {experiment_id}: {message}")
        worst = max(worst, code)
    return worst


def cmd_fdm(args) -> int:
    cfg = load_experiment(args.config, args)
    started = time.perf_counter()
    reference = compute_reference(cfg)
    record = ResultRecord(cfg.experiment_id, cfg.seed, cfg.snapshot(),
                          fields={f"reference_{k}": f for k, f in reference.items()},
                          wall_clock=time.perf_counter() - started)
    for path in emit_results(record, cfg.output_dir, cfg.formats):
        print(f"   💾 {path}")
    for name, fld in reference.items():
        print(f"   {name}: {fld.shape} via {fld.info.get('method', 'fdm')}")
    return 0


def cmd_hfun(args) -> int:
    hs = default_sections()['halfspace']
    table = cached_table(args.dim, hs['h_nodes'], hs['h_tol'], hs['h_max_iter'])
    status = table.get_status()
    print(f"\n📐 {args.dim}D H-function: {status['nodes']} nodes, "
          f"{status['iterations']} iterations, residual {status['residual']:.3e}")
    if args.dim == 1:
        print(f"   f_inf(1)        = {f_bl_infinity_1d(1.0, table):.6f}")
        print(f"   f_inf(5 sin v)  = {f_bl_infinity_1d(lambda v: 5.0 * np.sin(v), table):.6f}")
    else:
        phi = lambda y, a: (1.0 - y * y) * a
        print(f"   f_inf((1 - y^2) alpha) at y = 0: {f_bl_infinity_2d(phi, table, 0.0)[0]:.6f}")
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.write_csv(path)
        print(f"   💾 {path}")
    return 0


def cmd_halfspace(args) -> int:
    cfg = load_experiment(args.config, args)
    if cfg.loss_kind != HALFSPACE:
        cfg = cfg.with_overrides({'loss': {'kind': HALFSPACE}})
    _print_metrics(run_and_emit(cfg))
    return 0


def cmd_stability(args) -> int:
    cfg = load_experiment(args.config, args)
    record = run_stability(cfg)
    emit_results(record, cfg.output_root / "stability", cfg.formats)
    _print_metrics(record)
    return 0


def _load_field(path: str) -> Field:
    suffix = Path(path).suffix
    try:
        if suffix == ".npz":
            return Field.from_npz(path)
        if suffix == ".csv":
            return Field.from_csv(path)
    except OSError as e:
        raise ConfigError(f"cannot read field {path}: {e}") from e
    raise ConfigError(f"{path}: fields are read from .csv or .npz files")


def cmd_compare(args) -> int:
    errors = both_errors(_load_field(args.pred), _load_field(args.ref))
    print(f"   rel_l2       {errors['rel_l2']:.6e}")
    print(f"   rel_l2_sqrt  {errors['rel_l2_sqrt']:.6e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtepinn", description="Neural RTE solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_run_options(p):
        p.add_argument("--long", action="store_true", help="allow long experiments")
        p.add_argument("--eps", type=float, help="override problem.epsilon")
        p.add_argument("--seed", type=int, help="override experiment.seed")
        return p

    train = with_run_options(sub.add_parser("train", help="train one or more experiments"))
    train.add_argument("configs", nargs="+")
    train.add_argument("--jobs", type=int, default=1, help="experiments run concurrently")
    train.set_defaults(handler=cmd_train)

    for name, handler, text in (("fdm", cmd_fdm, "compute the reference fields"),
                                ("halfspace", cmd_halfspace, "train the half-space problem"),
                                ("stability", cmd_stability, "run the stability sweep")):
        p = with_run_options(sub.add_parser(name, help=text))
        p.add_argument("config")
        p.set_defaults(handler=handler)

    hfun = sub.add_parser("hfun", help="tabulate the Chandrasekhar H-function")
    hfun.add_argument("--dim", type=int, choices=(1, 2), required=True)
    hfun.add_argument("--output", help="CSV file for the table")
    hfun.set_defaults(handler=cmd_hfun)

    compare = sub.add_parser("compare", help="relative L2 error between two field files")
    compare.add_argument("pred")
    compare.add_argument("ref")
    compare.set_defaults(handler=cmd_compare)
    return parser


def main(argv=None) -> int:
    """Main execution function"""
    args = build_parser().parse_args(argv)
    print_banner()
    try:
        return args.handler(args)
    except RtePinnError as e:
        get_logger().log_error_with_context(e, args.command)
        print(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\n🛑 Interrupted")
        return 1


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
