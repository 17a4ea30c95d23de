import numpy as np
import pytest

from rtepinn.boundary_layer import (HalfSpaceSpec, cached_table, f_bl_infinity_1d,
                                    halfspace_loss, solve_halfspace_1d, solve_halfspace_2d)
from rtepinn.optim import AdamConfig, StopRule
from rtepinn.physics import AnalyticField
from rtepinn.utils.errors import InvalidArgumentError

FAST_STOP = StopRule(adam_max_iter=3000, adam_loss_tol=1e-5, lbfgs_max_iter=3000,
                     lbfgs_grad_tol=1e-8)


def small_spec(inflow, dim=1):
    return HalfSpaceSpec(inflow, dim=dim, z_max=10.0, n_z=100, n_v=16, n_b=40)


class TestSpec:
    def test_z_rule_is_left_point(self):
        rule = small_spec(lambda v: v).z_rule
        assert rule.nodes[0] == 0.0
        np.testing.assert_allclose(rule.weights, 0.1)

    def test_velocity_rules(self):
        assert small_spec(lambda v: v).velocity_rule.interval == (-1.0, 1.0)
        rule = small_spec(lambda y, a: a, dim=2).velocity_rule
        assert rule.interval == (0.0, 2 * np.pi)
        np.testing.assert_allclose(small_spec(lambda y, a: a, dim=2).mu(rule.nodes),
                                   np.cos(rule.nodes))

    @pytest.mark.parametrize("kwargs", [{'z_max': 0.0}, {'n_z': 1}, {'dim': 3},
                                        {'output_margin': 0.9}])
    def test_invalid_settings(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            HalfSpaceSpec(lambda v: v, **kwargs)

    def test_from_config_uses_library_defaults(self):
        spec = HalfSpaceSpec.from_config(lambda v: v, n_v=8)
        assert spec.z_max == 10.0
        assert spec.n_z == 400
        assert spec.n_v == 8

    def test_output_margin_scales_the_sup_norm(self):
        assert HalfSpaceSpec(lambda v: v).output_margin == 1.2
        assert HalfSpaceSpec(lambda v: v, output_margin=1.0).output_margin == 1.0

    def test_from_config_reads_an_experiment_section(self):
        section = {'z_max': 6.0, 'n_z': 50, 'n_v': 10, 'n_b': 12, 'output_margin': 1.0,
                   'y_nodes': 5, 'corrector': None}
        spec = HalfSpaceSpec.from_config(lambda y, a: a, 2, section)
        assert (spec.dim, spec.z_max, spec.n_z, spec.n_v, spec.n_b) == (2, 6.0, 50, 10, 12)
        assert spec.output_margin == 1.0


class TestLoss:
    def test_constant_solves_the_problem(self):
        spec = small_spec(lambda v: 2.0)
        velocities = np.linspace(0.05, 1.0, 10)
        loss = halfspace_loss(spec, AnalyticField.constant(2.0), velocities, np.full(10, 2.0))
        assert set(loss.terms) == {"residual", "zero_flux", "boundary"}
        assert loss.value < 1e-24

    def test_boundary_misfit_is_a_mean(self):
        spec = small_spec(lambda v: 1.0)
        loss = halfspace_loss(spec, AnalyticField.constant(0.0), np.linspace(0.1, 1.0, 4),
                              np.array([1.0, 2.0, 3.0, 4.0]))
        assert loss.values()["boundary"] == pytest.approx(7.5)


class TestZeroInflow:
    def test_1d_zero_inflow_skips_training(self):
        solution = solve_halfspace_1d(small_spec(lambda v: 0.0 * v))
        assert solution.result is None
        assert solution.f_inf == 0.0
        np.testing.assert_array_equal(solution.trace(np.array([-0.5, -0.1])), 0.0)
        np.testing.assert_array_equal(solution.flux([0.0, 5.0]), 0.0)

    def test_2d_family_of_zero_inflows(self):
        spec = small_spec(lambda y, a: (1.0 - y * y) * np.ones_like(a), dim=2)
        family = solve_halfspace_2d(spec, [-1.0, 1.0])
        np.testing.assert_array_equal(family.f_inf, [0.0, 0.0])
        assert family.get_status()['y_nodes'] == 2

    def test_dimension_checks(self):
        with pytest.raises(InvalidArgumentError):
            solve_halfspace_1d(small_spec(lambda y, a: a, dim=2))
        with pytest.raises(InvalidArgumentError):
            solve_halfspace_2d(small_spec(lambda v: v), [0.0, 1.0])

    def test_y_grid_must_increase(self):
        with pytest.raises(InvalidArgumentError):
            solve_halfspace_2d(small_spec(lambda y, a: a, dim=2), [0.5, 0.0])


@pytest.mark.long
class TestTraining:
    def test_constant_inflow(self):
        solution = solve_halfspace_1d(small_spec(lambda v: np.ones_like(v)), n_layers=3,
                                      n_width=20, seed=0, adam_cfg=AdamConfig(lr=1e-3),
                                      stop=FAST_STOP)
        assert solution.f_inf == pytest.approx(1.0, abs=2e-2)
        assert solution.network.spec.c_a == pytest.approx(1.2)

    def test_five_sine_inflow_matches_the_h_function(self):
        phi = lambda v: 5.0 * np.sin(v)
        solution = solve_halfspace_1d(small_spec(phi), n_layers=3, n_width=20, seed=0,
                                      stop=FAST_STOP)
        expected = f_bl_infinity_1d(phi, cached_table(1))
        assert solution.f_inf == pytest.approx(expected, rel=3e-2)
        assert abs(solution.flux(5.0)[0]) < 5e-2
