import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import quad
import hypothesis.strategies as st

from rtepinn.numerics import (QuadratureRule, TensorGrid, gauss_legendre, trapezoid_rule,
                              uniform_rule, velocity_average)
from rtepinn.utils.errors import InvalidArgumentError


def test_two_point_gauss_nodes():
    rule = gauss_legendre(2, -1.0, 1.0)
    np.testing.assert_allclose(rule.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], atol=1e-15)


def test_three_point_gauss_is_exact_for_quartic():
    rule = gauss_legendre(3, -1.0, 1.0)
    assert rule.integrate(rule.nodes ** 4) == pytest.approx(0.4, abs=1e-14)


@given(st.integers(min_value=1, max_value=40))
def test_gauss_weights_sum_to_interval_length(n):
    rule = gauss_legendre(n, 0.0, 3.0)
    assert rule.weights.sum() == pytest.approx(3.0, abs=1e-12)
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)


@given(st.integers(min_value=1, max_value=12))
def test_gauss_degree_of_exactness(n):
    rule = gauss_legendre(n, -1.0, 1.0)
    degree = 2 * n - 2 if n > 1 else 0
    exact = 2.0 / (degree + 1) if degree % 2 == 0 else 0.0
    assert rule.integrate(rule.nodes ** degree) == pytest.approx(exact, abs=1e-12)


def test_uniform_rule_nodes_and_weights():
    rule = uniform_rule(4, 0.0, 1.0)
    np.testing.assert_allclose(rule.nodes, [0.0, 0.25, 0.5, 0.75])
    np.testing.assert_allclose(rule.weights, [0.25] * 4)


def test_uniform_rule_integrates_cosine_over_a_period():
    rule = uniform_rule(40, 0.0, 2 * np.pi)
    assert rule.integrate(np.cos(rule.nodes)) == pytest.approx(0.0, abs=1e-14)


def test_closed_uniform_rule_is_trapezoid():
    rule = uniform_rule(5, 0.0, 1.0, closed=True)
    np.testing.assert_allclose(rule.weights, [0.125, 0.25, 0.25, 0.25, 0.125])
    assert rule.nodes[-1] == 1.0


def test_velocity_averages_of_moments():
    rule = gauss_legendre(20, -1.0, 1.0)
    assert velocity_average(rule, rule.nodes) == pytest.approx(0.0, abs=1e-15)
    assert velocity_average(rule, rule.nodes ** 2) == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_velocity_average_works_on_the_last_axis():
    rule = gauss_legendre(8, -1.0, 1.0)
    samples = np.outer([1.0, 2.0, 3.0], np.ones(8))
    np.testing.assert_allclose(velocity_average(rule, samples), [1.0, 2.0, 3.0])


def test_velocity_average_rejects_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        velocity_average(gauss_legendre(8, -1.0, 1.0), np.ones(7))


@pytest.mark.parametrize("n, lo, hi", [(0, 0.0, 1.0), (-3, 0.0, 1.0),
                                       (4, 0.0, np.inf), (4, np.nan, 1.0), (4, 1.0, 1.0)])
def test_invalid_rules_raise(n, lo, hi):
    with pytest.raises(InvalidArgumentError):
        gauss_legendre(n, lo, hi)


def test_tensor_grid_integrates_products():
    grid = TensorGrid([gauss_legendre(4, 0.0, 1.0), gauss_legendre(4, -1.0, 1.0)])
    pts = grid.points()
    assert grid.shape == (4, 4)
    assert pts.shape == (16, 2)
    assert grid.integrate(pts[:, 0] * pts[:, 1] ** 2) == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_trapezoid_rule_on_nonuniform_nodes():
    rule = trapezoid_rule([0.0, 0.1, 0.5, 1.0])
    assert rule.integrate(1.0 - rule.nodes) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        trapezoid_rule([0.0, 0.5, 0.5])


@pytest.mark.parametrize("lo, hi", [(-1.0, 1.0), (0.0, 1.0), (0.0, 2 * np.pi)])
def test_gauss_matches_adaptive_quadrature(lo, hi):
    def f(v):
        return np.exp(0.5 * v) * np.cos(3.0 * v)
    rule = gauss_legendre(30, lo, hi)
    expected, _ = quad(f, lo, hi, epsabs=1e-14, epsrel=1e-14)
    with np.errstate(all="raise"):
        assert rule.integrate(f(rule.nodes)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("weights", [[0.5, 0.0, 0.5], [1.0, -0.25, 0.25]])
def test_rule_rejects_non_positive_weights(weights):
    with pytest.raises(InvalidArgumentError):
        QuadratureRule(np.array([0.0, 0.5, 1.0]), np.array(weights), (0.0, 1.0), "trapezoid")
