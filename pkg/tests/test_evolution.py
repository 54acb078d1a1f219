"""Single-period propagators and stroboscopic evolution."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqmag import (FloqmagError, ModelSpec, ParameterError,
                     ValidationError, build_system, floquet_operator,
                     hermitian_phase_exp, kicked_rotor_operator,
                     stroboscopic_energies)

from conftest import ground_state

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# phase exponentials


def test_phase_exp_of_diagonal_matrix():
    u = hermitian_phase_exp(np.diag([0.0, 1.0, 2.0]).astype(complex), np.pi)
    assert np.allclose(u, np.diag([1.0, -1.0, 1.0]), atol=1e-14)


def test_phase_exp_zero_scale_is_identity():
    h = np.array([[1.0, 0.3], [0.3, -0.5]], dtype=complex)
    assert np.allclose(hermitian_phase_exp(h, 0.0), np.eye(2), atol=1e-15)


def test_phase_exp_matches_taylor_series():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = 0.5 * (a + a.conj().T)
    s = 0.7
    term = np.eye(6, dtype=complex)
    ref = term.copy()
    for k in range(1, 21):
        term = term @ (-1j * s * h) / k
        ref += term
    assert np.linalg.norm(hermitian_phase_exp(h, s) - ref) < 1e-10


def test_phase_exp_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian_phase_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


# ---------------------------------------------------------------------------
# step-drive propagator


def test_undriven_propagator_is_diagonal_phases():
    system = build_system(ModelSpec.driven_ho(1.0, 0.0), 3)
    op = floquet_operator(system, 1.0)
    assert np.allclose(op.u, np.diag(np.exp(-1j * np.arange(3.0))),
                       atol=1e-13)


def test_short_period_propagator_near_identity(driven16):
    op = floquet_operator(driven16, 1e-8)
    assert np.linalg.norm(op.u - np.eye(16)) < 1e-6


@pytest.mark.parametrize("dim,t", [(8, 0.3), (16, 1.0), (32, 5.0)])
def test_propagator_unitary(dim, t):
    system = build_system(ModelSpec.anharmonic_osc(1.0, 1.0, 1.0), dim)
    op = floquet_operator(system, t)
    defect = np.linalg.norm(op.u.conj().T @ op.u - np.eye(dim))
    assert defect / np.sqrt(dim) < 1e-11


def test_undriven_periods_compose():
    system = build_system(ModelSpec.driven_ho(1.0, 0.0), 12)
    u1 = floquet_operator(system, 0.7).u
    u2 = floquet_operator(system, 1.9).u
    u12 = floquet_operator(system, 2.6).u
    assert np.allclose(u12, u2 @ u1, atol=1e-12)


def test_propagator_rejects_kicked_spec():
    system = build_system(ModelSpec.kicked_rotor(1.0), 5)
    with pytest.raises(FloqmagError):
        floquet_operator(system, 1.0)


# ---------------------------------------------------------------------------
# kicked rotor


def test_kickless_rotor_is_free_rotation():
    op = kicked_rotor_operator(ModelSpec.kicked_rotor(0.0), 2.0, 5)
    n = np.arange(-2, 3, dtype=float)
    assert np.allclose(op.u, np.diag(np.exp(-1j * 2.0 * n**2 / 2.0)),
                       atol=1e-13)


def test_momentum_shift_symmetry_at_commensurate_period():
    # deep in the interior the propagator is Toeplitz: shifting both indices
    # by one leaves entries unchanged (truncation effects decay like a
    # Bessel tail away from the lattice edge, hence the margin of 8)
    op = kicked_rotor_operator(ModelSpec.kicked_rotor(1.0), 4.0 * np.pi, 33)
    dev = np.abs(op.u[8:-8, 8:-8] - op.u[7:-9, 7:-9]).max()
    assert dev < 1e-12


def test_momentum_shift_symmetry_breaks_at_golden_period():
    op = kicked_rotor_operator(ModelSpec.kicked_rotor(1.0),
                               4.0 * np.pi * GOLDEN, 33)
    dev = np.abs(op.u[8:-8, 8:-8] - op.u[7:-9, 7:-9]).max()
    assert dev > 1e-3


# ---------------------------------------------------------------------------
# stroboscopic energies


def test_eigenstate_start_stays_at_zero_energy():
    system = build_system(ModelSpec.driven_ho(1.0, 0.0), 8)
    op = floquet_operator(system, 1.3)
    energies = stroboscopic_energies(op, ground_state(8), system.h0, 20)
    assert np.allclose(energies, 0.0, atol=1e-12)


def test_zero_steps_returns_initial_expectation(aho64):
    op = floquet_operator(aho64, 1.0)
    psi0 = ground_state(64)
    energies = stroboscopic_energies(op, psi0, aho64.h0, 0)
    want = float(np.real(psi0.conj() @ aho64.h0 @ psi0))
    assert energies.shape == (1,)
    assert energies[0] == pytest.approx(want, abs=1e-12)


def test_norm_preserved_over_many_steps(aho64):
    op = floquet_operator(aho64, 1.0)
    psi = ground_state(64)
    for _ in range(10_000):
        psi = op.u @ psi
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-8


def test_unnormalized_start_rejected(aho64):
    op = floquet_operator(aho64, 1.0)
    bad = np.full(64, 0.5, dtype=np.complex128)
    with pytest.raises((ValidationError, ParameterError)):
        stroboscopic_energies(op, bad, aho64.h0, 3)


@given(t=st.floats(min_value=0.1, max_value=6.0),
       dim=st.sampled_from([8, 16]))
@settings(max_examples=15, deadline=None)
def test_driven_propagators_unitary_property(t, dim):
    system = build_system(ModelSpec.driven_ho(1.0, 1.0), dim)
    op = floquet_operator(system, t)
    defect = np.linalg.norm(op.u @ op.u.conj().T - np.eye(dim))
    assert defect < 1e-11 * np.sqrt(dim)
