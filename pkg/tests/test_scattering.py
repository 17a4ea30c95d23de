import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from rtepinn.numerics import (KernelSpec, ScatteringOperator, apply_L, average_of_L,
                              gauss_legendre, uniform_rule)
from rtepinn.numerics.scattering import hg_kernel
from rtepinn.utils.errors import InvalidArgumentError


@pytest.fixture
def angles():
    return uniform_rule(40, 0.0, 2 * np.pi)


def test_isotropic_operator_is_average_minus_identity():
    rule = gauss_legendre(16, -1.0, 1.0)
    f = rule.nodes ** 2 + rule.nodes
    expected = 1.0 / 3.0 - f
    np.testing.assert_allclose(apply_L(KernelSpec.isotropic(), rule, f), expected, atol=1e-14)


def test_isotropic_operator_kills_constants():
    rule = gauss_legendre(10, -1.0, 1.0)
    np.testing.assert_allclose(apply_L(KernelSpec.isotropic(), rule, np.full(10, 3.0)), 0.0,
                               atol=1e-14)


@given(st.floats(min_value=0.05, max_value=0.9))
def test_hg_transfer_rows_sum_to_one(h):
    op = ScatteringOperator(KernelSpec.henyey_greenstein(h), uniform_rule(40, 0.0, 2 * np.pi))
    np.testing.assert_allclose(op.transfer.sum(axis=1), 1.0, atol=1e-12)


@given(st.floats(min_value=0.05, max_value=0.9))
def test_hg_operator_is_conservative(h):
    rule = uniform_rule(40, 0.0, 2 * np.pi)
    f = np.cos(rule.nodes) + 2.0 + np.sin(3 * rule.nodes)
    assert average_of_L(KernelSpec.henyey_greenstein(h), rule, f) == pytest.approx(0.0, abs=1e-12)


def test_hg_transfer_is_symmetric_under_the_weights(angles):
    op = ScatteringOperator(KernelSpec.henyey_greenstein(0.5), angles)
    weighted = angles.weights[:, None] * op.transfer
    np.testing.assert_allclose(weighted, weighted.T, atol=1e-14)


def test_hg_normalization_is_close_to_one(angles):
    op = ScatteringOperator(KernelSpec.henyey_greenstein(0.5), angles)
    np.testing.assert_allclose(op.raw_row_sums, 1.0, atol=1e-10)
    assert op.normalization == pytest.approx(1.0, abs=1e-8)


def test_hg_with_vanishing_anisotropy_is_isotropic(angles):
    hg = ScatteringOperator(KernelSpec.henyey_greenstein(1e-10), angles)
    iso = ScatteringOperator(KernelSpec.isotropic(), angles)
    np.testing.assert_allclose(hg.matrix, iso.matrix, atol=1e-8)


def test_hg_kernel_peaks_forward():
    values = hg_kernel(0.5, np.array([0.0, np.pi / 2, np.pi]))
    assert values[0] == pytest.approx(3.0)
    assert values[2] == pytest.approx(1.0 / 3.0)
    assert values[0] > values[1] > values[2]


@pytest.mark.parametrize("h", [0.0, 1.0, -0.2, 1.5])
def test_invalid_anisotropy_raises(h):
    with pytest.raises(InvalidArgumentError):
        KernelSpec.henyey_greenstein(h)


def test_hg_needs_a_full_circle():
    with pytest.raises(InvalidArgumentError):
        ScatteringOperator(KernelSpec.henyey_greenstein(0.5), gauss_legendre(8, -1.0, 1.0))


def test_apply_checks_sample_count(angles):
    op = ScatteringOperator(KernelSpec.isotropic(), angles)
    with pytest.raises(InvalidArgumentError):
        op.apply(np.ones(angles.size + 1))
