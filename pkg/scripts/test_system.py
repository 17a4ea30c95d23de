#!/usr/bin/env python3
"""
rtepinn - System Test
Quick check that the solvers, losses and references are wired together correctly
"""

import sys
import tempfile
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

import numpy as np


def test_imports():
    """Test that all required modules can be imported"""
    print("🧪 Testing imports...")

    modules = [
        ("rtepinn.numerics", "QuadratureRule"),
        ("rtepinn.neural", "MlpNetwork"),
        ("rtepinn.optim", "two_phase_train"),
        ("rtepinn.physics", "macro_micro_loss"),
        ("rtepinn.boundary_layer", "GammaCorrector"),
        ("rtepinn.reference", "fdm_rte_1d"),
        ("rtepinn.experiments", "ExperimentConfig"),
        ("rtepinn.utils", "get_logger"),
    ]
    for module, name in modules:
        try:
            getattr(__import__(module, fromlist=[name]), name)
            print(f"   ✅ {module}.{name} import successful")
        except (ImportError, AttributeError) as e:
            print(f"   ❌ {module}.{name} import failed: {e}")
            return False
    return True


def test_quadrature():
    """Gauss rules and velocity averages"""
    print("\n📏 Testing quadrature...")

    try:
        from rtepinn.numerics import gauss_legendre, velocity_average

        rule = gauss_legendre(3, -1.0, 1.0)
        quartic = rule.integrate(rule.nodes ** 4)
        print(f"   ✅ int v^4 with 3 Gauss nodes = {quartic:.15f} (exact 0.4)")
        second = velocity_average(gauss_legendre(20, -1.0, 1.0),
                                  gauss_legendre(20, -1.0, 1.0).nodes ** 2)
        print(f"   ✅ <v^2> = {second:.15f} (exact 1/3)")
        return abs(quartic - 0.4) < 1e-12 and abs(second - 1.0 / 3.0) < 1e-12

    except Exception as e:
        print(f"   ❌ Quadrature test failed: {e}")
        return False


def test_losses():
    """Pitfall value of the vanilla loss and the exact macro-micro solution"""
    print("\n📉 Testing losses on the toy problem...")

    try:
        from rtepinn.experiments.registry import build_problem
        from rtepinn.physics import AnalyticField, TrainingSet, macro_micro_loss, vanilla_loss

        eps = 1e-3
        problem = build_problem("toy-mm", {'epsilon': eps})
        trainset = TrainingSet.build(problem, 80, 60, 60, seed=0)

        square = AnalyticField(lambda p: (1.0 - p[:, 0]) ** 2, [lambda p: -2.0 * (1.0 - p[:, 0])])
        value = vanilla_loss(problem, trainset, square).value
        print(f"   ✅ vanilla loss of (1 - x)^2 = {value:.6e} (eps^2/9 = {eps * eps / 9:.6e})")

        rho = AnalyticField(lambda p: 1.0 - p[:, 0], [lambda p: -np.ones(p.shape[0])])
        g = AnalyticField.constant(0.0)
        exact = macro_micro_loss(problem, trainset, rho, g, include_mean_penalty=False).value
        print(f"   ✅ macro-micro loss of the exact solution = {exact:.3e}")
        return abs(value / (eps * eps / 9) - 1.0) < 1e-3 and exact < 1e-12

    except Exception as e:
        print(f"   ❌ Loss test failed: {e}")
        return False


def test_hfunction():
    """H-function far-field constants"""
    print("\n📐 Testing H-functions...")

    try:
        from rtepinn.boundary_layer import cached_table, f_bl_infinity_1d

        table = cached_table(1)
        print(f"   ✅ Table: {table.get_status()}")
        value = f_bl_infinity_1d(lambda v: 5.0 * np.sin(v), table)
        print(f"   ✅ f_inf(5 sin v) = {value:.6f} (3.1889)")
        return abs(value - 3.1889) < 1e-3

    except Exception as e:
        print(f"   ❌ H-function test failed: {e}")
        return False


def test_reference():
    """1D transport reference against the exact toy solution"""
    print("\n🧮 Testing FDM reference...")

    try:
        from rtepinn.experiments.registry import build_problem
        from rtepinn.reference import Mesh1D, fdm_rte_1d

        problem = build_problem("toy-mm", {'epsilon': 1.0})
        field = fdm_rte_1d(problem, Mesh1D.uniform(200, 40))
        error = float(np.max(np.abs(field.values - (1.0 - field.axes["x"])[:, None])))
        print(f"   ✅ sup |f - (1 - x)| = {error:.3e} via {field.info['method']}")
        return error < 5e-3

    except Exception as e:
        print(f"   ❌ Reference test failed: {e}")
        return False


def test_config_loading():
    """Test configuration loading"""
    print("\n⚙️ Testing configuration loading...")

    try:
        from rtepinn.experiments import ExperimentConfig
        from rtepinn.utils.config_manager import load_config

        config = load_config("development")
        print("   ✅ Development config loaded")
        print(f"   📋 Config sections: {list(config.keys())}")

        cfg = ExperimentConfig.from_toml(PROJECT_ROOT / "config" / "experiments" / "toy-mm.toml")
        print(f"   ✅ Experiment config: {cfg.get_status()}")
        return True

    except Exception as e:
        print(f"   ❌ Config loading failed: {e}")
        return False


def test_short_training():
    """A few optimizer steps of the toy experiment, written to a temporary directory"""
    print("\n🏋️ Testing a short training run...")

    try:
        from rtepinn.experiments import ExperimentConfig, emit_results, run_experiment

        cfg = ExperimentConfig.from_id("toy-mm", {
            'network': {'n_layers': 2, 'n_width': 10},
            'collocation': {'n_x': 20, 'n_v': 16, 'n_b': 16},
            'training': {'adam_max_iter': 20, 'lbfgs_max_iter': 5, 'error_every': 10},
            'fdm': {'n_x': 50, 'n_v': 16},
        })
        record = run_experiment(cfg)
        print(f"   ✅ loss={record.metrics['loss']:.3e} rel_l2={record.metrics['rel_l2']:.3e}")
        with tempfile.TemporaryDirectory() as tmp:
            files = emit_results(record, tmp)
            print(f"   ✅ {len(files)} result files written")
        return np.isfinite(record.metrics['loss'])

    except Exception as e:
        print(f"   ❌ Training test failed: {e}")
        return False


def main():
    """Run all tests"""
    print("=" * 60)
    print("🧪 rtepinn - System Test Suite")
    print("   Checking solvers, losses and references")
    print("=" * 60)

    tests = [
        ("Import Tests", test_imports),
        ("Quadrature Tests", test_quadrature),
        ("Loss Tests", test_losses),
        ("H-function Tests", test_hfunction),
        ("Reference Tests", test_reference),
        ("Configuration Tests", test_config_loading),
        ("Training Tests", test_short_training),
    ]

    passed = 0
    total = len(tests)

    for test_name, test_func in tests:
        print(f"\n🔍 Running {test_name}...")
        if test_func():
            passed += 1
            print(f"✅ {test_name} PASSED")
        else:
            print(f"❌ {test_name} FAILED")

    print("\n" + "=" * 60)
    print(f"🏆 TEST RESULTS: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All tests passed!")
        print("   Run './run.sh train toy-mm' for a full experiment")
        print("   Run './run.sh demo' for the pitfall demonstration")
    else:
        print("⚠️ Some tests failed. Check the error messages above.")
        return 1

    return 0


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
