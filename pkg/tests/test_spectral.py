"""Quasi-energy spectra, entropies, averaged energies, gap statistics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqmag import (DegeneracyWarning, ModelSpec, ParameterError,
                     ValidationError, ZeroSpacingWarning, build_system,
                     diagonalize, finite_time_energy, floquet_operator,
                     level_spacing_stats, long_time_energy,
                     reference_distributions, shannon_entropy)
from floqmag.evolution import FloquetOperator

from conftest import ground_state


def _operator_from_unitary(u, period=1.0):
    """Wrap a bare unitary for the spectral routines."""
    dim = u.shape[0]
    system = build_system(ModelSpec.driven_ho(1.0, 0.0), dim)
    return FloquetOperator(u=np.asarray(u, dtype=complex), period=period,
                           system=system)


# ---------------------------------------------------------------------------
# diagonalization


def test_diagonal_unitary_phases_sorted():
    u = np.diag(np.exp(-1j * np.array([0.0, 1.0, 2.0])))
    spec = diagonalize(_operator_from_unitary(u))
    # eigenvalue e^{-i mu} maps these to mu = 0, 1, 2, ascending
    assert np.allclose(spec.quasi_energies, [0.0, 1.0, 2.0], atol=1e-12)


def test_identity_has_all_zero_phases():
    spec = diagonalize(_operator_from_unitary(np.eye(4, dtype=complex)))
    assert np.allclose(spec.quasi_energies, 0.0, atol=1e-14)


def test_phases_live_in_the_half_open_interval(aho64):
    spec = diagonalize(floquet_operator(aho64, 5.0))
    assert np.all(spec.quasi_energies >= -np.pi)
    assert np.all(spec.quasi_energies < np.pi)
    assert np.all(np.diff(spec.quasi_energies) >= 0.0)


def test_eigen_residual_small(aho_spectrum_512):
    spec = aho_spectrum_512
    system = build_system(ModelSpec.anharmonic_osc(1.0, 1.0, 1.0), 512)
    u = floquet_operator(system, 1.0).u
    resid = u @ spec.states - spec.states * np.exp(-1j * spec.quasi_energies)
    assert np.max(np.linalg.norm(resid, axis=0)) < 1e-9


def test_completeness_of_overlaps(aho_spectrum_512):
    psi0 = ground_state(512)
    weights = np.abs(aho_spectrum_512.states.conj().T @ psi0) ** 2
    assert weights.sum() == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# entropy


def test_basis_state_has_zero_entropy():
    assert shannon_entropy(ground_state(7)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("k", [2, 3, 8])
def test_uniform_superposition_entropy(k):
    state = np.zeros(16, dtype=complex)
    state[:k] = 1.0 / np.sqrt(k)
    assert shannon_entropy(state) == pytest.approx(np.log(k), rel=1e-12)


def test_entropy_rejects_unnormalized():
    with pytest.raises(ValidationError):
        shannon_entropy(np.array([0.5, 0.5], dtype=complex))


@given(st.integers(min_value=2, max_value=24),
       st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_entropy_bounds(dim, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    s = shannon_entropy(v)
    assert -1e-12 <= s <= np.log(dim) + 1e-12


# ---------------------------------------------------------------------------
# averaged energies


def test_undriven_eigenstate_long_time_energy():
    system = build_system(ModelSpec.driven_ho(1.0, 0.0), 8)
    spec = diagonalize(floquet_operator(system, 0.37))
    psi0 = np.zeros(8, dtype=complex)
    psi0[3] = 1.0
    e = long_time_energy(spec, psi0, system.h0)
    assert e == pytest.approx(3.0, abs=1e-10)


def test_degenerate_phases_raise_warning():
    spec = diagonalize(_operator_from_unitary(np.eye(5, dtype=complex)))
    with pytest.warns(DegeneracyWarning):
        long_time_energy(spec, ground_state(5), np.diag(np.arange(5.0)))


def test_zero_window_finite_average_is_initial_energy(aho64):
    op = floquet_operator(aho64, 1.0)
    psi0 = ground_state(64)
    want = float(np.real(psi0.conj() @ aho64.h0 @ psi0))
    assert finite_time_energy(op, psi0, aho64.h0, 0) == pytest.approx(
        want, abs=1e-12)


def test_finite_average_converges_to_spectral_average(aho64):
    op = floquet_operator(aho64, 1.0)
    psi0 = ground_state(64)
    e_inf = long_time_energy(diagonalize(op), psi0, aho64.h0)
    e_fin = finite_time_energy(op, psi0, aho64.h0, 100_000)
    assert abs(e_fin - e_inf) / abs(e_inf) < 0.01


# ---------------------------------------------------------------------------
# gap statistics


def test_equal_spacing_gives_unit_ratios():
    mu = np.linspace(-2.0, 2.0, 9)
    spec = diagonalize(_operator_from_unitary(np.diag(np.exp(-1j * mu))))
    stats = level_spacing_stats(spec)
    assert stats.ratios.shape == (7,)
    assert np.allclose(stats.ratios, 1.0, atol=1e-8)
    assert stats.mean_r == pytest.approx(1.0, abs=1e-8)


def test_ratio_count_and_mean_definition(aho64):
    stats = level_spacing_stats(diagonalize(floquet_operator(aho64, 1.0)))
    assert stats.ratios.size == 62
    assert np.all((stats.ratios >= 0.0) & (stats.ratios <= 1.0))
    assert stats.mean_r == pytest.approx(float(stats.ratios.mean()),
                                         abs=1e-15)
    assert stats.hist_counts.sum() == stats.ratios.size


def test_exact_degeneracy_flags_zero_spacing():
    mu = np.array([-1.0, 0.0, 0.0, 1.0])
    spec = diagonalize(_operator_from_unitary(np.diag(np.exp(-1j * mu))))
    with pytest.warns(ZeroSpacingWarning):
        stats = level_spacing_stats(spec)
    assert stats.zero_spacing_count >= 1
    assert np.min(stats.ratios) == 0.0


# ---------------------------------------------------------------------------
# reference gap densities


def test_reference_density_endpoints():
    wd0, poi0 = reference_distributions(np.array([0.0]))
    assert wd0[0] == pytest.approx(0.0, abs=1e-15)
    assert poi0[0] == pytest.approx(2.0, abs=1e-15)
    wd1, poi1 = reference_distributions(np.array([1.0]))
    assert wd1[0] == pytest.approx(27.0 * 2.0 / (4.0 * 3.0**2.5), rel=1e-13)
    assert poi1[0] == pytest.approx(0.5, rel=1e-13)


def test_reference_densities_normalized_and_mean():
    r = np.linspace(0.0, 1.0, 200_001)
    wd, poi = reference_distributions(r)
    assert np.trapezoid(poi, r) == pytest.approx(1.0, abs=1e-10)
    assert np.trapezoid(wd, r) == pytest.approx(1.0, abs=1e-7)
    assert np.trapezoid(r * poi, r) == pytest.approx(0.386, abs=1e-3)
    assert np.trapezoid(r * wd, r) == pytest.approx(0.536, abs=1e-3)


def test_reference_density_domain_check():
    with pytest.raises(ParameterError):
        reference_distributions(np.array([1.5]))
