import numpy as np
import pytest

from rtepinn.optim import (AdamConfig, LbfgsConfig, StopRule, TrainingHistory, adam_run,
                           lbfgs_run, two_loop_direction, two_phase_train)
from rtepinn.utils.errors import InvalidArgumentError, NumericalFailure


def quadratic(scales):
    scales = np.asarray(scales, dtype=float)

    def loss_grad(theta):
        return float(0.5 * np.sum(scales * theta ** 2)), scales * theta
    return loss_grad


def rosenbrock(theta):
    x, y = theta
    loss = (1 - x) ** 2 + 100 * (y - x * x) ** 2
    grad = np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])
    return float(loss), grad


class TestAdam:
    def test_first_step_has_length_lr(self):
        result = adam_run(quadratic([1.0, 4.0]), np.array([1.0, -1.0]), AdamConfig(lr=1e-2),
                          max_iter=1, loss_tol=1e-12)
        np.testing.assert_allclose(result.params, [1.0 - 1e-2, -1.0 + 1e-2], rtol=1e-6)
        assert result.iterations == 1
        assert result.status == "max_iter"

    def test_stops_at_loss_threshold(self):
        result = adam_run(quadratic([1.0, 1.0]), np.array([3.0, 3.0]), AdamConfig(lr=0.1),
                          max_iter=5000, loss_tol=1e-3)
        assert result.status == "converged"
        assert result.loss < 1e-3
        assert result.iterations < 5000

    def test_history_holds_every_iteration(self):
        result = adam_run(quadratic([1.0]), np.array([1.0]), AdamConfig(), max_iter=7,
                          loss_tol=1e-12)
        assert len(result.history) == 8
        assert [e.phase for e in result.history.entries] == ["adam"] * 8

    def test_monitor_runs_every_error_every(self):
        calls = []
        result = adam_run(quadratic([1.0]), np.array([1.0]), AdamConfig(), max_iter=10,
                          loss_tol=1e-12, monitor=lambda th: calls.append(1) or 0.5,
                          error_every=5)
        errors = [e.rel_error for e in result.history.entries]
        assert errors[0] == 0.5 and errors[5] == 0.5 and errors[1] is None
        assert len(calls) == 3

    def test_learning_rate_decay(self):
        cfg = AdamConfig(lr=1e-2, decay_factor=0.5, decay_every=10)
        assert cfg.lr_at(9) == 1e-2
        assert cfg.lr_at(10) == 5e-3
        assert cfg.lr_at(25) == 2.5e-3

    def test_non_finite_loss_raises(self):
        with pytest.raises(NumericalFailure) as info:
            adam_run(lambda th: (float("nan"), th), np.ones(2), AdamConfig(), 5, 1e-3)
        assert info.value.phase == "adam"

    def test_invalid_config_raises(self):
        with pytest.raises(InvalidArgumentError):
            AdamConfig(lr=0.0)
        with pytest.raises(InvalidArgumentError):
            AdamConfig(decay_factor=0.5)


class TestLbfgs:
    def test_two_loop_without_pairs_is_steepest_descent(self):
        g = np.array([1.0, -2.0])
        np.testing.assert_array_equal(two_loop_direction(g, []), -g)

    def test_two_loop_is_exact_newton_on_a_diagonal_quadratic(self):
        scales = np.array([2.0, 2.0])
        s = np.array([1.0, 0.5])
        y = scales * s
        pairs = [(s, y, 1.0 / (s @ y))]
        g = np.array([4.0, -6.0])
        np.testing.assert_allclose(two_loop_direction(g, pairs), -g / 2.0)

    def test_quadratic_converges_quickly(self):
        result = lbfgs_run(quadratic([1.0, 10.0, 100.0]), np.array([1.0, 1.0, 1.0]),
                           LbfgsConfig(), max_iter=30, grad_tol=1e-10)
        assert result.status == "converged"
        assert result.grad_norm < 1e-10
        assert result.iterations <= 30

    def test_rosenbrock(self):
        result = lbfgs_run(rosenbrock, np.array([-1.2, 1.0]), LbfgsConfig(), max_iter=200,
                           grad_tol=1e-10)
        assert result.loss < 1e-8
        np.testing.assert_allclose(result.params, [1.0, 1.0], atol=1e-3)

    def test_iteration_offset_shifts_history(self):
        result = lbfgs_run(quadratic([1.0, 2.0]), np.ones(2), LbfgsConfig(), max_iter=3,
                           grad_tol=1e-14, iteration_offset=100)
        assert result.history.entries[0].iteration == 100

    def test_non_finite_step_raises_with_context(self):
        def blows_up(theta):
            if theta[0] < 0.99995:
                return float("nan"), np.full(2, np.nan)
            return quadratic([1.0, 1.0])(theta)
        with pytest.raises(NumericalFailure) as info:
            lbfgs_run(blows_up, np.array([1.0, 1.0]), LbfgsConfig(max_backtracks=1), 5, 1e-12)
        assert info.value.phase == "lbfgs"
        assert info.value.iteration == 1

    def test_rows_follow_the_steps(self):
        result = lbfgs_run(quadratic([1.0, 2.0]), np.ones(2), LbfgsConfig(), max_iter=3,
                           grad_tol=1e-14, iteration_offset=100, record_start=False)
        assert result.iterations >= 1
        assert [e.iteration for e in result.history.entries] == \
            list(range(101, 101 + result.iterations))

    def test_unbounded_memory(self):
        result = lbfgs_run(quadratic([1.0, 3.0]), np.ones(2), LbfgsConfig(memory=None),
                           max_iter=50, grad_tol=1e-10)
        assert result.status == "converged"

    def test_non_finite_start_raises(self):
        with pytest.raises(NumericalFailure):
            lbfgs_run(lambda th: (float("inf"), th), np.ones(2), LbfgsConfig(), 5, 1e-6)

    def test_invalid_memory_raises(self):
        with pytest.raises(InvalidArgumentError):
            LbfgsConfig(memory=0)


class TestTwoPhase:
    def test_phases_are_tagged_in_order(self):
        result = two_phase_train(quadratic([1.0, 5.0]), np.array([2.0, 2.0]), AdamConfig(lr=0.05),
                                 LbfgsConfig(), StopRule(20, 1e-12, 50, 1e-10))
        phases = [e.phase for e in result.history.entries]
        assert phases[0] == "adam" and phases[-1] == "lbfgs"
        assert phases == sorted(phases)
        iterations = [e.iteration for e in result.history.entries]
        assert iterations == sorted(iterations)
        assert result.grad_norm < 1e-10

    @pytest.mark.parametrize("stop", [StopRule(0, 0.005, 40, 1e-10),
                                      StopRule(1000, float("inf"), 40, 1e-10)])
    def test_no_adam_budget_is_pure_lbfgs(self, stop):
        theta0 = np.array([1.5, -0.5])
        loss_grad = quadratic([1.0, 7.0])
        combined = two_phase_train(loss_grad, theta0, AdamConfig(), LbfgsConfig(), stop)
        direct = lbfgs_run(loss_grad, theta0, LbfgsConfig(), stop.lbfgs_max_iter,
                           stop.lbfgs_grad_tol)
        np.testing.assert_array_equal(combined.params, direct.params)
        assert combined.iterations == direct.iterations

    def test_handoff_iteration_is_recorded_once(self):
        result = two_phase_train(quadratic([1.0, 5.0]), np.array([2.0, 2.0]), AdamConfig(lr=0.05),
                                 LbfgsConfig(), StopRule(20, 1e-12, 50, 1e-10))
        iterations = [e.iteration for e in result.history.entries]
        assert len(iterations) == len(set(iterations))
        assert np.all(np.diff(iterations) == 1)
        handoff = [e for e in result.history.entries if e.iteration == 20]
        assert [e.phase for e in handoff] == ["adam"]
        assert iterations[-1] == result.iterations

    def test_final_row_carries_the_error(self):
        result = two_phase_train(quadratic([1.0, 5.0]), np.array([2.0, 2.0]), AdamConfig(lr=0.05),
                                 LbfgsConfig(), StopRule(5, 1e-12, 7, 1e-10),
                                 monitor=lambda th: float(np.linalg.norm(th)), error_every=100)
        last = result.history.entries[-1]
        assert last.rel_error == pytest.approx(np.linalg.norm(result.params))

    def test_stop_rule_validation(self):
        with pytest.raises(InvalidArgumentError):
            StopRule(adam_loss_tol=0.0)
        with pytest.raises(InvalidArgumentError):
            StopRule(adam_max_iter=-1)


def test_history_csv(tmp_path):
    history = TrainingHistory()
    history.record(0, "adam", 1.0, 0.25)
    history.record(1, "lbfgs", 0.5)
    path = tmp_path / "history.csv"
    history.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,phase,loss,rel_error"
    assert lines[1] == "0,adam,1,0.25"
    assert lines[2] == "1,lbfgs,0.5,"
    assert history.final_loss == 0.5
