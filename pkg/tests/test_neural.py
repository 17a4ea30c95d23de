import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from rtepinn.neural import (IDENTITY, SCALED_SIGMOID, SOFTPLUS, MlpNetwork, MlpSpec,
                            NetworkBundle, Tensor, forward, forward_jet, grad_params,
                            init_params, load_network, save_network)
from rtepinn.neural.jets import input_jet, jet_tanh
from rtepinn.neural.tape import exp, sigmoid, softplus, tanh
from rtepinn.utils.errors import ConfigError, InvalidArgumentError, TapeError


def numeric_grad(fn, theta, h=1e-6):
    out = np.zeros_like(theta)
    for k in range(theta.size):
        step = np.zeros_like(theta)
        step[k] = h
        out[k] = (fn(theta + step) - fn(theta - step)) / (2 * h)
    return out


class TestTape:
    def test_polynomial_gradient(self):
        value, grad = grad_params(lambda t: (t * t * t).sum() + (t @ np.array([1.0, 2.0])),
                                  np.array([1.0, -2.0]))
        assert value == pytest.approx(1.0 - 8.0 + 1.0 - 4.0)
        np.testing.assert_allclose(grad, [3.0 + 1.0, 12.0 + 2.0])

    def test_broadcasting_and_indexing(self, rng):
        a = rng.standard_normal((3, 4))

        def loss(t):
            m = t.reshape(3, 4)
            return ((m * a + m[0]) ** 2).mean()

        theta = rng.standard_normal(12)
        _, grad = grad_params(loss, theta)
        np.testing.assert_allclose(
            grad, numeric_grad(lambda th: grad_params(loss, th)[0], theta), atol=1e-5)

    @pytest.mark.parametrize("op", [tanh, sigmoid, softplus, exp])
    def test_activation_gradients(self, op, rng):
        theta = rng.standard_normal(5)
        loss = lambda t: (op(t) * np.arange(1.0, 6.0)).sum()
        _, grad = grad_params(loss, theta)
        np.testing.assert_allclose(
            grad, numeric_grad(lambda th: grad_params(loss, th)[0], theta), atol=1e-5)

    def test_division_by_tensor(self):
        _, grad = grad_params(lambda t: (1.0 / t).sum(), np.array([2.0, 4.0]))
        np.testing.assert_allclose(grad, [-0.25, -1.0 / 16.0])

    def test_untracked_loss_has_zero_gradient(self):
        value, grad = grad_params(lambda t: Tensor(3.0), np.ones(4))
        assert value == 3.0
        np.testing.assert_array_equal(grad, np.zeros(4))

    def test_non_tensor_loss_raises(self):
        with pytest.raises(TapeError):
            grad_params(lambda t: 1.0, np.ones(2))

    def test_backward_needs_a_scalar(self):
        t = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(TapeError):
            (t * 2.0).backward()


class TestJets:
    def test_tanh_jet_at_zero(self):
        jet = jet_tanh(input_jet(np.zeros((1, 1)), [0], order=2))
        assert jet.value.data[0, 0] == 0.0
        assert jet.d1[0].data[0, 0] == pytest.approx(1.0)
        assert jet.d2[0].data[0, 0] == pytest.approx(0.0)

    def test_network_derivatives_match_finite_differences(self, rng):
        spec = MlpSpec.build(2, 3, 12)
        params = init_params(spec, seed=3)
        pts = rng.uniform(-1, 1, (6, 2))
        jet = forward_jet(params, spec, pts, active_coords=[0, 1], order=2).column(0)
        h1, h2 = 1e-6, 1e-4
        for c in (0, 1):
            e = np.zeros(2)
            e[c] = 1.0
            f_plus = forward(params, spec, pts + h1 * e)[:, 0]
            f_minus = forward(params, spec, pts - h1 * e)[:, 0]
            np.testing.assert_allclose(jet.dx(c).data, (f_plus - f_minus) / (2 * h1), atol=1e-6)
            f_plus = forward(params, spec, pts + h2 * e)[:, 0]
            f_minus = forward(params, spec, pts - h2 * e)[:, 0]
            f_mid = forward(params, spec, pts)[:, 0]
            np.testing.assert_allclose(jet.dxx(c).data, (f_plus - 2 * f_mid + f_minus) / h2 ** 2,
                                       atol=1e-4)

    def test_parameter_gradient_through_derivative(self, rng):
        spec = MlpSpec.build(2, 2, 8, output_activation=SOFTPLUS)
        theta = init_params(spec, seed=1)
        pts = rng.uniform(-1, 1, (5, 2))

        def loss(t):
            jet = forward_jet(t, spec, pts, active_coords=[0], order=2).column(0)
            return (jet.dx(0) ** 2).sum() + (jet.dxx(0) * jet.value).sum()

        _, grad = grad_params(loss, theta)
        np.testing.assert_allclose(
            grad, numeric_grad(lambda th: grad_params(loss, th)[0], theta), atol=1e-5)

    def test_second_partials_must_be_requested(self):
        spec = MlpSpec.build(1, 1, 4)
        jet = forward_jet(init_params(spec, 0), spec, np.zeros((2, 1)), [0], order=1).column(0)
        with pytest.raises(InvalidArgumentError):
            jet.dxx(0)


class TestMlp:
    def test_output_activations_at_zero_parameters(self):
        x = np.zeros((3, 2))
        soft = MlpNetwork(MlpSpec.build(2, 2, 5, output_activation=SOFTPLUS),
                          init_params(MlpSpec.build(2, 2, 5), 0, zero=True))
        np.testing.assert_allclose(soft(x), np.log(2.0))
        spec = MlpSpec.build(2, 2, 5, output_activation=SCALED_SIGMOID, c_a=5.0)
        np.testing.assert_allclose(MlpNetwork(spec, init_params(spec, 0, zero=True))(x), 2.5)

    def test_parameter_count(self):
        spec = MlpSpec.build(2, 4, 50)
        assert spec.n_params == 3 * 50 + 3 * 51 * 50 + 51

    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_initialization_is_reproducible(self, seed):
        spec = MlpSpec.build(2, 2, 6)
        np.testing.assert_array_equal(init_params(spec, seed), init_params(spec, seed))

    def test_invalid_specs_raise(self):
        with pytest.raises(InvalidArgumentError):
            MlpSpec((4, 5, 1))
        with pytest.raises(InvalidArgumentError):
            MlpSpec((2, 5, 1), output_activation="relu")
        with pytest.raises(InvalidArgumentError):
            MlpSpec((2, 5, 1), output_activation=SCALED_SIGMOID, c_a=0.0)

    def test_wrong_input_dimension_raises(self):
        net = MlpNetwork(MlpSpec.build(2, 1, 4))
        with pytest.raises(InvalidArgumentError):
            net(np.zeros((3, 3)))

    def test_bundle_packs_networks_with_distinct_seeds(self):
        bundle = NetworkBundle({'rho': MlpSpec.build(1, 2, 6, output_activation=SOFTPLUS),
                                'g': MlpSpec.build(2, 2, 6)})
        theta = bundle.init_params(seed=4)
        assert theta.shape == (bundle.n_params,)
        nets = bundle.bind(theta)
        np.testing.assert_array_equal(nets['g'].params, init_params(bundle.specs['g'], 5))
        with pytest.raises(InvalidArgumentError):
            bundle.bind(theta[:-1])


class TestCheckpoint:
    def test_save_and_load(self, tmp_path):
        spec = MlpSpec.build(2, 2, 7, output_activation=SCALED_SIGMOID, c_a=6.0)
        net = MlpNetwork(spec, seed=11)
        path = save_network(tmp_path / "net.txt", net, seed=11, metadata={'f_inf': 3.1889})
        loaded, meta = load_network(path)
        assert loaded.spec == spec
        np.testing.assert_array_equal(loaded.params, net.params)
        assert meta['seed'] == "11"
        assert float(meta['f_inf']) == 3.1889
        pts = np.random.default_rng(0).uniform(size=(4, 2))
        np.testing.assert_array_equal(loaded(pts), net(pts))

    def test_header_starts_with_magic(self, tmp_path):
        path = save_network(tmp_path / "net.txt", MlpNetwork(MlpSpec.build(1, 1, 3)))
        assert path.read_text().startswith("# rtepinn-network 1")

    def test_foreign_file_raises(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("# something else\n1.0\n")
        with pytest.raises(ConfigError):
            load_network(path)

    def test_truncated_parameters_raise(self, tmp_path):
        path = save_network(tmp_path / "net.txt", MlpNetwork(MlpSpec.build(1, 1, 3)))
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(ConfigError):
            load_network(path)
