#!/usr/bin/env python3
"""
rtepinn - Pitfall Demo
Narrated walk through the small-Knudsen failure of the vanilla loss
"""

import signal
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

import numpy as np

from rtepinn.experiments.metrics import relative_l2
from rtepinn.experiments.registry import MACRO_MICRO, VANILLA, build_problem
from rtepinn.experiments.stability import run_stability_sweep
from rtepinn.physics import AnalyticField, TrainingSet, macro_micro_loss, vanilla_loss

EPSILONS = (1.0, 1e-1, 1e-2, 1e-3)


def signal_handler(signum, frame):
    """Handle Ctrl+C gracefully"""
    print("\n🛑 Demo interrupted")
    sys.exit(0)


def print_demo_banner():
    """Print demo banner"""
    print("=" * 70)
    print("🏆 rtepinn - Pitfall Demo")
    print("    Why the plain residual loss fails as eps -> 0")
    print("    Showing: vanilla loss -> macro-micro loss -> stability")
    print("=" * 70)


def section(title):
    print("\n" + "=" * 50)
    print(title)
    print("=" * 50)


def _wrong_candidate():
    """f = (1 - x)^2: satisfies the inflow data but not the transport equation."""
    return AnalyticField(lambda p: (1.0 - p[:, 0]) ** 2, [lambda p: -2.0 * (1.0 - p[:, 0])])


def demo_1_vanilla_pitfall():
    """Demo 1: the vanilla loss rewards a wrong solution"""
    section("📉 DEMO 1: A WRONG CANDIDATE WITH A TINY VANILLA LOSS")
    print("📐 Toy problem: eps v f_x = <f> - f - eps v on [0, 1], f(0, v>0) = 1, f(1, v<0) = 0")
    print("🎯 Exact solution: f = 1 - x")
    print("🧪 Candidate: f = (1 - x)^2, which is wrong by O(1)")

    print(f"\n   {'eps':>8} {'vanilla loss':>14} {'eps^2/9':>12} {'rel. error':>11}")
    for eps in EPSILONS:
        problem = build_problem("toy-vanilla", {'epsilon': eps})
        trainset = TrainingSet.build(problem, 80, 60, 60, seed=0)
        x = trainset.space_rules[0].nodes
        loss = vanilla_loss(problem, trainset, _wrong_candidate()).value
        error = relative_l2((1.0 - x) ** 2, 1.0 - x, take_sqrt=True,
                            weights=trainset.space_rules[0].weights)
        print(f"   {eps:>8.0e} {loss:>14.4e} {eps * eps / 9:>12.4e} {error:>11.3f}")

    print("\n💡 The loss shrinks like eps^2 while the error stays near 0.32.")
    print("   An optimizer has no reason to prefer the true solution.")


def demo_2_macro_micro():
    """Demo 2: the macro-micro loss keeps the error visible"""
    section("🔬 DEMO 2: MACRO-MICRO DECOMPOSITION f = rho + eps g")
    print("🧠 The loss now penalizes the macro and micro equations separately")

    exact_rho = AnalyticField(lambda p: 1.0 - p[:, 0], [lambda p: -np.ones(p.shape[0])])
    wrong_rho = AnalyticField(lambda p: (1.0 - p[:, 0]) ** 2, [lambda p: -2.0 * (1.0 - p[:, 0])])
    g = AnalyticField.constant(0.0)

    print(f"\n   {'eps':>8} {'exact (1 - x)':>15} {'wrong (1 - x)^2':>17}")
    for eps in EPSILONS:
        problem = build_problem("toy-mm", {'epsilon': eps})
        trainset = TrainingSet.build(problem, 80, 60, 60, seed=0)
        exact = macro_micro_loss(problem, trainset, exact_rho, g,
                                 include_mean_penalty=False).value
        wrong = macro_micro_loss(problem, trainset, wrong_rho, g,
                                 include_mean_penalty=False).value
        print(f"   {eps:>8.0e} {exact:>15.3e} {wrong:>17.3e}")

    print("\n✅ The exact solution has zero loss at every eps")
    print("✅ The wrong candidate keeps an O(1) loss")


def demo_3_stability(n_candidates=20):
    """Demo 3: stability constants over eps"""
    section("📊 DEMO 3: EMPIRICAL STABILITY CONSTANTS")
    print(f"🎲 {n_candidates} random perturbations of the exact solution per eps")
    print("📐 Constant = max over candidates of ||f - f*||^2 / loss")

    table = run_stability_sweep(EPSILONS, n_candidates=n_candidates, seed=0)
    mm = table.constants(MACRO_MICRO)
    va = table.constants(VANILLA)
    print(f"\n   {'eps':>8} {'macro-micro':>14} {'vanilla':>14}")
    for eps in EPSILONS:
        print(f"   {eps:>8.0e} {mm[eps]:>14.4e} {va[eps]:>14.4e}")

    print(f"\n   macro-micro spread over eps: {table.spread(MACRO_MICRO):.2f}")
    print(f"   vanilla growth from 1e-1 to 1e-3: {table.vanilla_growth():.1f}x")
    print("\n💡 Only the macro-micro constant stays bounded uniformly in eps.")


def main():
    """Main demo execution"""
    signal.signal(signal.SIGINT, signal_handler)

    print_demo_banner()

    try:
        demo_1_vanilla_pitfall()
        demo_2_macro_micro()
        demo_3_stability()
    except Exception as e:
        print(f"❌ Demo failed: {e}")
        return 1

    print("\n🎉 Demo complete!")
    print("   Train both models with './run.sh train toy-vanilla' and './run.sh train toy-mm'")
    return 0


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
