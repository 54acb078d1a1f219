"""Cross-checks of the independent reference routes against one another."""

import numpy as np
import pytest
from scipy.linalg import expm, logm

from floqmag import (AnalyticHF, BranchWrapWarning, ModelSpec, ParameterError,
                     analytic_hf_driven_ho, bch_reference, build_system,
                     floquet_operator, hermitian_phase_exp, hf_from_log,
                     parametric_monodromy)

# ---------------------------------------------------------------------------
# closed-form effective Hamiltonian of the linear step drive


def test_small_period_limit_is_the_static_ladder():
    h = analytic_hf_driven_ho(1.0, 0.7, 1e-8, 8)
    assert np.allclose(h, np.diag(np.arange(8.0)), atol=1e-8)


def test_quarter_period_tangent_value():
    # omega0 = 1, T = pi: tan(pi/4) = 1, so the drift equals g and the
    # (0, 1) entry is -g * <0|p|1> = i * g / sqrt(2)
    h = analytic_hf_driven_ho(1.0, 0.1, np.pi, 4)
    assert h[0, 1] == pytest.approx(0.1j / np.sqrt(2), abs=1e-15)
    assert h[1, 0] == pytest.approx(-0.1j / np.sqrt(2), abs=1e-15)


def test_displaced_spectrum_is_equally_spaced():
    # H = (p - c)^2/2 + omega0^2 x^2/2 - c^2/2 keeps the ladder spacing and
    # shifts every level down by c^2/2; truncation only disturbs the edge
    h = analytic_hf_driven_ho(1.0, 0.5, 1.0, 128)
    ev = np.linalg.eigvalsh(h)
    assert np.abs(np.diff(ev[:64]) - 1.0).max() < 1e-12
    c = 0.5 * np.tan(0.25)
    assert ev[0] == pytest.approx(-c * c / 2.0, abs=1e-12)


def test_pole_detection_brackets_the_resonances():
    assert AnalyticHF(1.0, 0.3, 2.0 * np.pi).near_pole
    assert AnalyticHF(1.0, 0.3, 6.0 * np.pi + 1e-8).near_pole
    assert not AnalyticHF(1.0, 0.3, 2.0 * np.pi + 1e-3).near_pole
    assert AnalyticHF(2.0, 0.3, np.pi).near_pole


def test_drift_refuses_to_evaluate_at_a_pole():
    with pytest.raises(ParameterError):
        AnalyticHF(1.0, 0.3, 2.0 * np.pi).drift_coefficient


def test_closed_form_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        AnalyticHF(0.0, 0.3, 1.0)
    with pytest.raises(ParameterError):
        AnalyticHF(1.0, 0.3, -1.0)
    with pytest.raises(ParameterError):
        AnalyticHF(1.0, 0.3, 1.0).matrix(0)


# ---------------------------------------------------------------------------
# principal-branch logarithm route


def test_log_of_free_evolution_recovers_the_ladder():
    spec = ModelSpec.driven_ho(omega0=1.0, g=0.0)
    u = floquet_operator(build_system(spec, 6), T=0.5)
    h = hf_from_log(u)
    assert np.allclose(h, np.diag(np.arange(6.0)), atol=1e-10)


def test_log_result_is_exactly_hermitian():
    spec = ModelSpec.driven_ho(omega0=1.0, g=0.4)
    h = hf_from_log(floquet_operator(build_system(spec, 12), T=0.9))
    assert np.array_equal(h, h.conj().T)


def test_reexponentiating_the_log_recovers_the_propagator():
    spec = ModelSpec.driven_ho(omega0=1.0, g=0.4)
    u = floquet_operator(build_system(spec, 16), T=0.7)
    again = hermitian_phase_exp(hf_from_log(u), u.period)
    assert np.linalg.norm(again - u.u) < 1e-9


def test_eigenphase_at_the_seam_warns():
    # free evolution at T = pi puts the odd levels exactly on the branch cut
    spec = ModelSpec.driven_ho(omega0=1.0, g=0.0)
    u = floquet_operator(build_system(spec, 4), T=np.pi)
    with pytest.warns(BranchWrapWarning):
        hf_from_log(u)


def test_log_route_matches_closed_form_at_small_period():
    spec = ModelSpec.driven_ho(omega0=1.0, g=0.5)
    u = floquet_operator(build_system(spec, 64), T=0.04)
    got = hf_from_log(u)[:8, :8]
    want = analytic_hf_driven_ho(1.0, 0.5, 0.04, 64)[:8, :8]
    # a global diagonal shift is unobservable; compare after removing it
    shift = np.mean(np.diag(got - want).real)
    assert np.linalg.norm(got - want - shift * np.eye(8)) < 1e-6


# ---------------------------------------------------------------------------
# closed-form combination terms


def test_commuting_factors_collapse_to_the_sum():
    x = np.diag([1.0 + 0j, 2.0, -0.5])
    y = np.diag([0.2 + 0j, -1.0, 0.7])
    r1, r2, r3, r4 = bch_reference(x, y)
    assert np.array_equal(r1, x + y)
    for r in (r2, r3, r4):
        assert not np.any(r)


def test_vanishing_first_factor_leaves_the_second():
    y = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    r1, r2, r3, r4 = bch_reference(np.zeros((2, 2), dtype=complex), y)
    assert np.array_equal(r1, y)
    for r in (r2, r3, r4):
        assert not np.any(r)


def _random_antihermitian_pair():
    rng = np.random.default_rng(42)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    return (a - a.conj().T) / 2.0, (b - b.conj().T) / 2.0


def test_terms_match_matrix_log_to_fifth_order():
    a, b = _random_antihermitian_pair()

    def resid(eps):
        z = logm(expm(eps * a) @ expm(eps * b))
        return np.linalg.norm(z - sum(bch_reference(eps * a, eps * b)))

    small, large = resid(0.02), resid(0.05)
    assert small < 1e-8
    # residual must scale like the fifth power of the amplitude
    assert large / small == pytest.approx((0.05 / 0.02) ** 5, rel=0.3)


# ---------------------------------------------------------------------------
# classical monodromy


def test_unmodulated_trace_is_twice_the_cosine():
    for t in (0.3, 1.0, np.pi, 5.7):
        r = parametric_monodromy(omega0=1.0, g=0.0, T=t)
        assert r.trace == pytest.approx(2.0 * np.cos(t), abs=1e-12)
        assert not r.unstable


def test_monodromy_is_area_preserving():
    for g, t in ((0.1, np.pi), (2.0, 1.3), (1.0, 0.8), (0.5, 6.0)):
        r = parametric_monodromy(omega0=1.0, g=g, T=t)
        assert np.linalg.det(r.matrix) == pytest.approx(1.0, abs=1e-10)


def test_primary_tongue_verdicts():
    assert parametric_monodromy(1.0, 0.1, np.pi).unstable
    assert not parametric_monodromy(1.0, 0.1, 0.5 * np.pi).unstable


def test_degenerate_half_frequency_branch():
    # g = omega0^2 makes the soft half-period a free drift; still symplectic
    r = parametric_monodromy(omega0=1.0, g=1.0, T=2.0)
    assert np.linalg.det(r.matrix) == pytest.approx(1.0, abs=1e-12)


def test_monodromy_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        parametric_monodromy(0.0, 0.1, 1.0)
    with pytest.raises(ParameterError):
        parametric_monodromy(1.0, 0.1, 0.0)
