"""Multi-limb arithmetic: exactness against mpmath, backend agreement."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqmag.xprec import (BACKEND, DDMatrix, QDMatrix, dd_recip_int,
                           qd_recip_int)
from floqmag.xprec import _fallback as ef

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)
# products of subnormals lose the error term; the transform's contract
# only covers results in the normal range
normal = finite.filter(lambda x: x == 0.0 or abs(x) > 1e-120)


def _mp(x):
    # binary-exact conversion; string parsing would re-round at workprec
    return mpmath.mpf(float(x))


# ---------------------------------------------------------------------------
# error-free transforms and limb arithmetic


@given(a=finite, b=finite)
@settings(max_examples=200, deadline=None)
def test_two_sum_is_error_free(a, b):
    s, e = ef.two_sum(a, b)
    with mpmath.workprec(200):
        assert _mp(s) + _mp(e) == _mp(a) + _mp(b)


@given(a=normal, b=normal)
@settings(max_examples=200, deadline=None)
def test_two_prod_is_error_free(a, b):
    p, e = ef.two_prod(a, b)
    with mpmath.workprec(200):
        assert _mp(p) + _mp(e) == _mp(a) * _mp(b)


@given(a=finite, b=finite, c=finite, d=finite)
@settings(max_examples=100, deadline=None)
def test_paired_limb_product_accuracy(a, b, c, d):
    xh, xl = ef.two_sum(a, b * 1e-18)
    yh, yl = ef.two_sum(c, d * 1e-18)
    ph, pl = ef.dd_mul(xh, xl, yh, yl)
    with mpmath.workprec(300):
        exact = (_mp(xh) + _mp(xl)) * (_mp(yh) + _mp(yl))
        got = _mp(ph) + _mp(pl)
        err = abs(got - exact)
        assert err <= abs(exact) * mpmath.mpf(2) ** -98 + mpmath.mpf(10) ** -320


def test_limb_sqrt_of_two():
    h, l = ef.dd_sqrt(np.float64(2.0), np.float64(0.0))
    with mpmath.workprec(200):
        err = abs(_mp(h) + _mp(l) - mpmath.sqrt(2))
        assert err < mpmath.mpf(2) ** -100


def test_integer_reciprocal_pairs():
    h, l = dd_recip_int(3)
    with mpmath.workprec(200):
        err = abs(_mp(h) + _mp(l) - mpmath.mpf(1) / 3)
        assert err < mpmath.mpf(2) ** -104
    q = qd_recip_int(7)
    with mpmath.workprec(400):
        got = sum(_mp(x) for x in q)
        assert abs(got - mpmath.mpf(1) / 7) < mpmath.mpf(2) ** -200


# ---------------------------------------------------------------------------
# matrices


def _random_dd(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = DDMatrix.from_complex(a)
    # populate low limbs so tests see genuine two-limb values
    m.re[1] = rng.standard_normal((n, n)) * 1e-20
    m.im[1] = rng.standard_normal((n, n)) * 1e-20
    return m


def _mp_matrix(m):
    n, k = m.shape
    re = [[_mp(m.re[0, i, j]) + _mp(m.re[1, i, j]) for j in range(k)]
          for i in range(n)]
    im = [[_mp(m.im[0, i, j]) + _mp(m.im[1, i, j]) for j in range(k)]
          for i in range(n)]
    return re, im


def _mp_matmul(a, b):
    (ar, ai), (br, bi) = a, b
    n = len(ar)
    cr = [[sum(ar[i][l] * br[l][j] - ai[i][l] * bi[l][j] for l in range(n))
           for j in range(n)] for i in range(n)]
    ci = [[sum(ar[i][l] * bi[l][j] + ai[i][l] * br[l][j] for l in range(n))
           for j in range(n)] for i in range(n)]
    return cr, ci


def test_round_trip_through_complex():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert np.array_equal(DDMatrix.from_complex(a).to_complex(), a)


def test_two_limb_matmul_against_mpmath():
    rng = np.random.default_rng(5)
    a, b = _random_dd(rng, 3), _random_dd(rng, 3)
    c = a @ b
    with mpmath.workprec(300):
        cr, ci = _mp_matmul(_mp_matrix(a), _mp_matrix(b))
        for i in range(3):
            for j in range(3):
                got = _mp(c.re[0, i, j]) + _mp(c.re[1, i, j]) \
                    + 1j * (_mp(c.im[0, i, j]) + _mp(c.im[1, i, j]))
                want = cr[i][j] + 1j * ci[i][j]
                scale = max(abs(want), mpmath.mpf(1))
                assert abs(got - want) / scale < mpmath.mpf(2) ** -96


def test_four_limb_matmul_against_mpmath():
    rng = np.random.default_rng(6)
    a3 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b3 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a, b = QDMatrix.from_complex(a3), QDMatrix.from_complex(b3)
    c = a @ b
    with mpmath.workprec(500):
        am = ([[_mp(x) for x in row] for row in a3.real],
              [[_mp(x) for x in row] for row in a3.imag])
        bm = ([[_mp(x) for x in row] for row in b3.real],
              [[_mp(x) for x in row] for row in b3.imag])
        cr, ci = _mp_matmul(am, bm)
        for i in range(3):
            for j in range(3):
                got_r = sum(_mp(c.re[k, i, j]) for k in range(4))
                got_i = sum(_mp(c.im[k, i, j]) for k in range(4))
                want = cr[i][j] + 1j * ci[i][j]
                scale = max(abs(want), mpmath.mpf(1))
                assert abs(got_r + 1j * got_i - want) / scale \
                    < mpmath.mpf(2) ** -200


def test_imaginary_unit_rotation_is_exact():
    rng = np.random.default_rng(8)
    m = _random_dd(rng, 4)
    r = m.times_i().times_i().times_i().times_i()
    assert np.array_equal(r.re, m.re)
    assert np.array_equal(r.im, m.im)


def test_mask_zeroes_exactly():
    rng = np.random.default_rng(9)
    m = _random_dd(rng, 4)
    keep = np.zeros((4, 4))
    keep[0, 1] = 1.0
    r = m.mask(keep)
    assert r.re[0, 0, 1] == m.re[0, 0, 1]
    r.re[0, 0, 1] = 0.0
    r.im[0, 0, 1] = 0.0
    r.re[1, 0, 1] = 0.0
    r.im[1, 0, 1] = 0.0
    assert not np.any(r.re) and not np.any(r.im)


def test_hermitian_defect_resolves_below_double_noise():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    h = DDMatrix.from_complex(a + a.conj().T)
    # inject an asymmetry far below double roundoff of the entries
    h.re[1, 0, 1] += 1e-22
    defect = h.herm_defect()
    assert 0.0 < defect < 1e-20


def test_frobenius_norm_matches_numpy_on_exact_values():
    a = np.array([[3.0, 4.0], [0.0, 0.0]], dtype=complex)
    h, l = DDMatrix.from_complex(a).frob()
    assert h == 5.0
    assert abs(l) < 1e-15


# ---------------------------------------------------------------------------
# backend dispatch


def test_backend_reports_a_known_kernel_set():
    assert BACKEND in ("compiled", "fallback")


@pytest.mark.skipif(BACKEND != "compiled",
                    reason="compiled kernels not available")
def test_compiled_and_fallback_products_agree_bitwise():
    from floqmag.xprec import _core
    rng = np.random.default_rng(12)
    n = 7
    a_re = rng.standard_normal((2, n, n))
    a_im = rng.standard_normal((2, n, n))
    b_re = rng.standard_normal((2, n, n))
    b_im = rng.standard_normal((2, n, n))
    a_re[1] *= 1e-18
    a_im[1] *= 1e-18
    b_re[1] *= 1e-18
    b_im[1] *= 1e-18
    fast = _core.dd_matmul(a_re, a_im, b_re, b_im)
    slow = ef.dd_matmul(a_re, a_im, b_re, b_im)
    for f, s in zip(fast, slow):
        assert np.array_equal(f, s)
