import numpy as np
import pytest
from scipy.optimize import brentq

from rtepinn.boundary_layer import cached_table, f_bl_infinity_1d
from rtepinn.experiments.registry import build_problem
from rtepinn.physics import ProblemSpec, RadiativeConstants
from rtepinn.reference import (Field, Mesh1D, boundary_from_hfunction_1d, diffusion_limit_solve,
                               fdm_nonlinear_1d, fdm_rte_1d, fdm_rte_2d, limit_profile,
                               nonlinear_limit_solve, split_nodes)
from rtepinn.utils.errors import ConfigError, InvalidArgumentError, NumericalFailure


def interior(x, lo=0.1, hi=0.9):
    return (x >= lo) & (x <= hi)


class TestMesh:
    def test_uniform(self):
        mesh = Mesh1D.uniform(11, 8)
        assert mesh.n_x == 11 and mesh.n_v == 8
        assert mesh.average_weights.sum() == pytest.approx(1.0)
        assert mesh.x_rule.weights.sum() == pytest.approx(1.0)

    def test_odd_velocity_count_raises(self):
        with pytest.raises(InvalidArgumentError):
            Mesh1D.uniform(10, 7)

    def test_nodes_must_increase(self):
        with pytest.raises(InvalidArgumentError):
            Mesh1D(np.array([0.0, 0.5, 0.5, 1.0]), Mesh1D.uniform(3, 4).velocity_rule)

    def test_split_nodes(self):
        x = split_nodes(1e-3, 150, 50)
        assert x.size == 200
        assert np.sum(x < 1e-3) == 150
        assert x[-1] == 1.0
        with pytest.raises(InvalidArgumentError):
            split_nodes(1.5)

    def test_layered_mesh(self):
        mesh = Mesh1D.layered(1e-3, n_left=30, n_mid=40, n_right=20, n_v=8)
        assert mesh.kind == "layered"
        assert mesh.n_x == 90
        assert np.sum(mesh.x < 1e-2) == 30
        with pytest.raises(InvalidArgumentError):
            Mesh1D.layered(0.1)


class TestField:
    @pytest.fixture
    def field(self):
        x, v = np.linspace(0.0, 1.0, 5), np.array([-0.5, 0.5])
        values = np.outer(1.0 - x, np.ones(2)) + 0.1 * v[None, :]
        return Field(values, {"x": x, "v": v}, {"v": np.array([1.0, 1.0])}, name="f")

    def test_npz_round_trip_is_exact(self, field, tmp_path):
        loaded = Field.from_npz(field.to_npz(tmp_path / "f.npz"))
        np.testing.assert_array_equal(loaded.values, field.values)
        np.testing.assert_array_equal(loaded.axes["x"], field.axes["x"])
        np.testing.assert_array_equal(loaded.weights["v"], field.weights["v"])
        assert loaded.name == "f"

    def test_csv_round_trip(self, field, tmp_path):
        path = field.to_csv(tmp_path / "f.csv")
        assert path.read_text().splitlines()[0] == "x,v,f"
        loaded = Field.from_csv(path)
        np.testing.assert_allclose(loaded.values, field.values, rtol=1e-15, atol=0)
        assert list(loaded.axes) == ["x", "v"]

    def test_density_averages_the_velocity_axis(self, field):
        rho = field.density()
        np.testing.assert_allclose(rho.values, 1.0 - field.axes["x"])
        assert rho.velocity_axis is None
        with pytest.raises(InvalidArgumentError):
            rho.density()

    def test_non_finite_values_raise(self):
        with pytest.raises(NumericalFailure):
            Field(np.array([0.0, np.nan]), {"x": np.array([0.0, 1.0])})

    def test_shape_mismatch_raises(self):
        with pytest.raises(InvalidArgumentError):
            Field(np.zeros(3), {"x": np.array([0.0, 1.0])})

    def test_partial_grid_csv_raises(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,v,f\n0,0,1\n1,0,1\n0,1,1\n")
        with pytest.raises(ConfigError):
            Field.from_csv(path)


class TestTransport1D:
    def test_toy_problem_at_unit_epsilon(self):
        problem = build_problem("toy-mm", {'epsilon': 1.0})
        field = fdm_rte_1d(problem, Mesh1D.uniform(200, 16))
        expected = 1.0 - field.axes["x"][:, None]
        assert np.max(np.abs(field.values - expected)) < 5e-3
        assert field.info['method'] == "direct"
        assert field.info['theta'] == 1.0

    def test_direct_and_source_iteration_agree(self):
        problem = build_problem("ex5.1", {'epsilon': 0.5})
        mesh = Mesh1D.uniform(41, 16)
        direct = fdm_rte_1d(problem, mesh, method="direct")
        iterated = fdm_rte_1d(problem, mesh, method="source-iteration", tol=1e-13)
        np.testing.assert_allclose(iterated.values, direct.values, atol=1e-10)
        assert 0.0 < iterated.info['spectral_radius'] < 1.0

    def test_diamond_scheme_conserves_flux(self):
        problem = build_problem("ex5.1", {'epsilon': 0.2})
        mesh = Mesh1D.uniform(51, 16)
        field = fdm_rte_1d(problem, mesh, theta=0.5)
        flux = field.values @ (mesh.average_weights * mesh.v)
        assert np.ptp(flux) < 1e-10

    def test_inflow_is_imposed(self):
        problem = build_problem("ex5.1", {'epsilon': 0.5})
        mesh = Mesh1D.uniform(21, 8)
        field = fdm_rte_1d(problem, mesh)
        np.testing.assert_array_equal(field.values[0, mesh.v > 0], 1.0)
        np.testing.assert_array_equal(field.values[-1, mesh.v < 0], 0.0)

    def test_unknown_method_raises(self):
        problem = build_problem("ex5.1", {'epsilon': 0.5})
        with pytest.raises(InvalidArgumentError):
            fdm_rte_1d(problem, Mesh1D.uniform(11, 4), method="gmres")

    def test_theta_range(self):
        problem = build_problem("ex5.1", {'epsilon': 0.5})
        with pytest.raises(InvalidArgumentError):
            fdm_rte_1d(problem, Mesh1D.uniform(11, 4), theta=0.25)

    def test_2d_problem_is_rejected(self):
        problem = build_problem("ex5.2", {'epsilon': 0.5})
        with pytest.raises(InvalidArgumentError):
            fdm_rte_1d(problem, Mesh1D.uniform(11, 4))

    @pytest.mark.long
    def test_thin_layer_density_on_the_refined_mesh(self):
        eps = 1e-3
        problem = build_problem("ex5.6", {'epsilon': eps})
        field = fdm_rte_1d(problem, Mesh1D.layered(eps), theta=0.5)
        rho = field.density()
        x = rho.axes["x"]
        far_field = f_bl_infinity_1d(lambda v: 5.0 * np.sin(v), cached_table(1))
        mask = interior(x)
        np.testing.assert_allclose(rho.values[mask], far_field * (1.0 - x[mask]), rtol=2e-2)


class TestTransport2D:
    def test_constant_inflow_gives_a_constant(self):
        ones = {face: (lambda s, a: np.ones_like(s))
                for face in ("left", "right", "bottom", "top")}
        problem = ProblemSpec(2, 0.5, ones)
        field = fdm_rte_2d(problem, n_x=9, n_y=9, n_alpha=8, method="source-iteration",
                           tol=1e-12)
        np.testing.assert_allclose(field.values, 1.0, atol=1e-10)
        assert field.shape == (9, 9, 8)

    def test_gmres_matches_source_iteration(self):
        problem = build_problem("ex5.4", {'epsilon': 0.5, 'kernel_h': 0.5})
        a = fdm_rte_2d(problem, n_x=9, n_y=9, n_alpha=8, method="source-iteration", tol=1e-12)
        b = fdm_rte_2d(problem, n_x=9, n_y=9, n_alpha=8, method="gmres", tol=1e-12)
        np.testing.assert_allclose(b.values, a.values, atol=1e-8)
        assert a.info['hg_normalization'] > 0

    def test_grid_validation(self):
        problem = build_problem("ex5.2", {'epsilon': 0.5})
        with pytest.raises(InvalidArgumentError):
            fdm_rte_2d(problem, n_x=2, n_y=9, n_alpha=8)
        with pytest.raises(InvalidArgumentError):
            fdm_rte_2d(build_problem("ex5.1", {'epsilon': 0.5}))


class TestDiffusionLimit:
    def test_linear_profile(self):
        rho = diffusion_limit_solve(1, {"left": 1.0, "right": 0.0}, n_x=21)
        np.testing.assert_allclose(rho.values, 1.0 - rho.axes["x"], atol=1e-13)
        assert rho.name == "rho0"

    def test_quadratic_on_a_non_uniform_mesh(self):
        x = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(3).uniform(0, 1, 30)]))
        rho = diffusion_limit_solve(1, {}, x_nodes=x, source=2.0 / 3.0)
        np.testing.assert_allclose(rho.values, x * (1.0 - x), atol=1e-10)

    def test_2d_harmonic_data(self):
        boundary = {"left": lambda s: s - 1.0, "right": lambda s: s + 1.0,
                    "bottom": lambda s: s - 1.0, "top": lambda s: s + 1.0}
        rho = diffusion_limit_solve(2, boundary, n_x=11)
        X, Y = np.meshgrid(rho.axes["x"], rho.axes["y"], indexing="ij")
        np.testing.assert_allclose(rho.values, X + Y, atol=1e-11)

    def test_invalid_arguments(self):
        with pytest.raises(InvalidArgumentError):
            diffusion_limit_solve(3, {})
        with pytest.raises(InvalidArgumentError):
            diffusion_limit_solve(2, {"front": 1.0})
        with pytest.raises(InvalidArgumentError):
            diffusion_limit_solve(1, {}, x_nodes=[0.0, 1.0])

    def test_boundary_values_from_the_h_function(self):
        problem = build_problem("ex5.6", {'epsilon': 1e-3})
        boundary = boundary_from_hfunction_1d(problem, cached_table(1))
        assert boundary["left"] == pytest.approx(3.1889, abs=1e-3)
        assert boundary["right"] == 0.0


class TestNonlinearLimit:
    @pytest.mark.parametrize("kappa", [0.0, 1.0 / 3.0, 5.0])
    def test_matches_bisection(self, kappa):
        x = np.linspace(0.0, 1.0, 17)
        expected = [brentq(lambda t: kappa * t ** 4 + t - (kappa + 1.0) * (1.0 - xi), 0.0, 1.0,
                           xtol=1e-14) for xi in x]
        np.testing.assert_allclose(nonlinear_limit_solve(kappa, x), expected, atol=1e-10)

    def test_domain(self):
        with pytest.raises(InvalidArgumentError):
            nonlinear_limit_solve(1.0, [1.5])
        with pytest.raises(InvalidArgumentError):
            nonlinear_limit_solve(-1.0, [0.5])

    def test_profile_derivatives(self):
        constants = RadiativeConstants()
        x = np.linspace(0.1, 0.9, 9)
        h = 1e-5
        p = limit_profile(constants, x)
        up, down = limit_profile(constants, x + h), limit_profile(constants, x - h)
        np.testing.assert_allclose(p['T_x'], (up['T'] - down['T']) / (2 * h), rtol=1e-6)
        np.testing.assert_allclose(p['T_xx'], (up['T_x'] - down['T_x']) / (2 * h), rtol=1e-5)
        np.testing.assert_allclose(p['rho'], p['T'] ** 4)

    @pytest.mark.long
    def test_transport_approaches_the_limit(self):
        constants = RadiativeConstants()
        intensity, temperature = fdm_nonlinear_1d(constants, 1e-3,
                                                  Mesh1D.layered(1e-3, n_v=40))
        x = temperature.axes["x"]
        mask = interior(x)
        expected = nonlinear_limit_solve(constants.kappa, x[mask])
        np.testing.assert_allclose(temperature.values[mask], expected, rtol=2e-2)
        assert intensity.info['method'] == "newton"

    def test_moderate_epsilon_converges(self):
        intensity, temperature = fdm_nonlinear_1d(RadiativeConstants(), 0.5,
                                                  Mesh1D.uniform(41, 8))
        assert temperature.values[0] == 1.0 and temperature.values[-1] == 0.0
        assert intensity.shape == (41, 8)
        assert np.all(np.isfinite(intensity.values))
