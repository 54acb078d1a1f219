"""Model construction: exact matrix elements, bands, and validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqmag import (ModelSpec, ParameterError, build_ladder_power,
                     build_system, momentum_matrix)

SQ2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# ladder powers


def test_first_power_is_the_scaled_hopping_matrix():
    m = build_ladder_power(1.0, 1, 2)
    assert np.allclose(m, [[0.0, 1.0 / SQ2], [1.0 / SQ2, 0.0]], atol=1e-15)


def test_zeroth_power_is_identity():
    assert np.array_equal(build_ladder_power(1.0, 0, 3), np.eye(3))


def test_quartic_ground_state_element():
    # <0|x^4|0> = 3/(4 w0^2)
    m = build_ladder_power(1.0, 4, 1)
    assert m.shape == (1, 1)
    assert m[0, 0] == pytest.approx(0.75, abs=1e-14)


@pytest.mark.parametrize("k", range(9))
def test_cropping_after_padding_is_exact(k):
    # bandwidth k: padding beyond k cannot change the leading block, so the
    # builder must agree with a deliberately over-padded computation
    dim = 6
    x_big = build_ladder_power(1.0, 1, dim + k + 4)
    ref = np.linalg.matrix_power(x_big, k)[:dim, :dim] if k else np.eye(dim)
    got = build_ladder_power(1.0, k, dim)
    assert np.allclose(got, ref, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_frequency_scaling_of_ladder_powers(k):
    w0 = 2.7
    a = build_ladder_power(w0, k, 5)
    b = build_ladder_power(1.0, k, 5) * w0 ** (-k / 2.0)
    assert np.allclose(a, b, rtol=1e-13)


def test_x_squared_trace_closed_form():
    w0, dim = 1.7, 9
    m = build_ladder_power(w0, 2, dim)
    want = sum((2 * i + 1) / (2 * w0) for i in range(dim))
    assert np.trace(m) == pytest.approx(want, rel=1e-13)


@given(k=st.integers(min_value=0, max_value=8),
       dim=st.integers(min_value=1, max_value=12))
@settings(max_examples=40, deadline=None)
def test_ladder_powers_symmetric_and_banded(k, dim):
    m = build_ladder_power(1.3, k, dim)
    assert np.array_equal(m, m.T)
    i, j = np.nonzero(np.abs(m) > 0)
    if i.size:
        assert int(np.max(np.abs(i - j))) <= k


def test_ladder_power_rejects_out_of_range():
    with pytest.raises(ParameterError):
        build_ladder_power(1.0, 9, 4)
    with pytest.raises(ParameterError):
        build_ladder_power(1.0, 2, 0)
    with pytest.raises(ParameterError):
        build_ladder_power(0.0, 2, 4)


# ---------------------------------------------------------------------------
# momentum matrix


def test_momentum_matrix_two_level():
    m = momentum_matrix(1.0, 2)
    assert np.allclose(m, [[0.0, -1j / SQ2], [1j / SQ2, 0.0]], atol=1e-15)


def test_momentum_matrix_frequency_two():
    assert momentum_matrix(2.0, 2)[1, 0] == pytest.approx(1j, abs=1e-15)


@given(dim=st.integers(min_value=1, max_value=20))
@settings(max_examples=20, deadline=None)
def test_momentum_matrix_hermitian(dim):
    m = momentum_matrix(1.0, dim)
    assert np.allclose(m, m.conj().T, atol=1e-15)


# ---------------------------------------------------------------------------
# model systems


def test_linearly_driven_oscillator_matrices():
    sys3 = build_system(ModelSpec.driven_ho(1.0, 1.0), 3)
    assert np.allclose(np.diag(sys3.h0), [0.0, 1.0, 2.0])
    assert sys3.h1[0, 1] == pytest.approx(1.0 / SQ2, rel=1e-14)


def test_zero_quartic_reduces_to_linear_drive():
    a = build_system(ModelSpec.anharmonic_osc(1.0, 1.0, 0.0), 3)
    b = build_system(ModelSpec.driven_ho(1.0, 1.0), 3)
    assert np.array_equal(a.h0, b.h0)
    assert np.array_equal(a.h1, b.h1)


def test_kicked_rotor_small_window():
    sys3 = build_system(ModelSpec.kicked_rotor(1.0), 3)
    assert np.allclose(np.diag(sys3.h0), [0.5, 0.0, 0.5])
    off = np.diag(sys3.h1, k=1)
    assert np.allclose(off, [0.5, 0.5])
    assert np.allclose(np.diag(sys3.h1), 0.0)


@pytest.mark.parametrize("spec", [
    ModelSpec.driven_ho(1.0, 1.0),
    ModelSpec.parametric_ho(1.0, 0.1),
    ModelSpec.anharmonic_osc(1.0, 1.0, 0.7),
    ModelSpec.kicked_rotor(1.0),
])
@pytest.mark.parametrize("dim", [3, 9, 33])
def test_system_parts_hermitian_and_banded(spec, dim):
    system = build_system(spec, dim)
    for h, width in ((system.h0, 4), (system.h1, 2)):
        scale = max(np.linalg.norm(h), 1.0)
        assert np.linalg.norm(h - h.conj().T) / scale < 1e-13
        assert np.allclose(h.imag, 0.0)
        i, j = np.nonzero(np.abs(h) > 0)
        if i.size:
            assert int(np.max(np.abs(i - j))) <= width


def test_model_parameter_validation():
    with pytest.raises(ParameterError):
        ModelSpec.driven_ho(0.0, 1.0)
    with pytest.raises(ParameterError):
        ModelSpec.anharmonic_osc(1.0, 1.0, -0.5)
    with pytest.raises(ParameterError):
        build_system(ModelSpec.kicked_rotor(1.0), 4)   # even window
    with pytest.raises(ParameterError):
        build_system(ModelSpec.driven_ho(1.0, 1.0), 1)
