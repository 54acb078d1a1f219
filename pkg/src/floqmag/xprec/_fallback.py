"""Vectorized double-double / quad-double arithmetic on float64 limb arrays.

A double-double (dd) value is an unevaluated sum hi + lo of two floats
with |lo| <= 1/2 ulp(hi), giving ~32 significant decimal digits; a
quad-double (qd) value is a sum of four non-overlapping floats giving
~64 digits.  All operations below follow the classical error-free
transforms (Knuth two_sum, Dekker split/two_prod) and the Hida-Li-Bailey
quad-double algorithms ("sloppy" variants for + and *, which are the
ones their library uses for array work).

Everything here acts elementwise on numpy arrays (or scalars) carrying
the limbs, so the same code serves scalar coefficient tables and whole
matrices.  The matrix products `dd_matmul` / `qd_matmul` at the bottom
are the reference implementations of the compiled kernels in _core.pyx;
they loop over the contraction index with broadcasting and are the
fallback used when the extension is unavailable.

Accuracy notes:
  * two_prod uses the Dekker split, not fma, because numpy exposes no
    elementwise fma.  Both give the exact product error.
  * dd addition is the accurate (ieee) variant, not the sloppy one:
    the BCH recursion this backs is dominated by cancelling sums, which
    is exactly where sloppy dd addition loses digits.
  * qd renormalization reproduces the branching of the reference
    implementation exactly, via masks, so compiled and fallback results
    agree bit for bit.
"""
from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


# ----------------------------------------------------------------- float64 EFTs
def two_sum(a, b):
    """s + e == a + b exactly, s = fl(a+b)."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    """two_sum assuming |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def split(a):
    """Dekker split into 26+27 bit halves, a == hi + lo."""
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def two_prod(a, b):
    """p + e == a * b exactly, p = fl(a*b)."""
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def three_sum(a, b, c):
    """(a', b', c') with a'+b'+c' == a+b+c, magnitudes decreasing."""
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    b2, c2 = two_sum(t2, t3)
    return a2, b2, c2


def three_sum2(a, b, c):
    """three_sum keeping only two output components."""
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    return a2, t2 + t3


# ----------------------------------------------------------------- double-double
def dd_add(xh, xl, yh, yl):
    """Accurate dd + dd."""
    sh, se = two_sum(xh, yh)
    th, te = two_sum(xl, yl)
    se = se + th
    sh, se = quick_two_sum(sh, se)
    se = se + te
    return quick_two_sum(sh, se)


def dd_sub(xh, xl, yh, yl):
    return dd_add(xh, xl, -yh, -yl)


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return quick_two_sum(p, e)


def dd_mul_d(xh, xl, y):
    """dd times exact double."""
    p, e = two_prod(xh, y)
    e = e + xl * y
    return quick_two_sum(p, e)


def dd_div(xh, xl, yh, yl):
    """Long division with three quotient terms (~full dd accuracy)."""
    q1 = xh / yh
    rh, rl = dd_sub(xh, xl, *dd_mul_d(yh, yl, q1))
    q2 = rh / yh
    rh, rl = dd_sub(rh, rl, *dd_mul_d(yh, yl, q2))
    q3 = rh / yh
    qh, ql = quick_two_sum(q1, q2)
    return dd_add(qh, ql, q3, np.zeros_like(q3))


def dd_sqrt(xh, xl):
    """One dd Newton step on the double sqrt (Karp-Markstein form)."""
    r = 1.0 / np.sqrt(np.where(xh > 0.0, xh, 1.0))
    y = xh * r
    # y2 = y*y exactly; correction dy = (x - y^2) * r / 2
    y2h, y2l = two_prod(y, y)
    dh, dl = dd_sub(xh, xl, y2h, y2l)
    dy = dh * r * 0.5
    h, e = quick_two_sum(y, dy)
    zero = xh <= 0.0
    return np.where(zero, 0.0, h), np.where(zero, 0.0, e)


# ----------------------------------------------------------------- quad-double
def _renorm5(c0, c1, c2, c3, c4):
    """Renormalize five limbs to four, matching the reference branching."""
    s, c4 = quick_two_sum(c3, c4)
    s, c3 = quick_two_sum(c2, s)
    s, c2 = quick_two_sum(c1, s)
    c0, c1 = quick_two_sum(c0, s)

    s0, s1 = quick_two_sum(c0, c1)
    zero = np.zeros_like(s0)

    # branch s1 != 0
    a1, a2 = quick_two_sum(s1, c2)
    #   branch a2 != 0
    b2, b3 = quick_two_sum(a2, c3)
    #     b3 != 0 -> (s0, a1, b2, b3 + c4);  b3 == 0 -> (s0, a1, b2 + c4, 0)
    #   branch a2 == 0
    p1, p2 = quick_two_sum(a1, c3)
    q2, q3 = quick_two_sum(p2, c4)
    r1, r2 = quick_two_sum(p1, c4)
    # branch s1 == 0
    d0, d1 = quick_two_sum(s0, c2)
    #   branch d1 != 0
    e1, e2 = quick_two_sum(d1, c3)
    f2, f3 = quick_two_sum(e2, c4)
    g1, g2 = quick_two_sum(e1, c4)
    #   branch d1 == 0
    h0, h1 = quick_two_sum(d0, c3)
    i1, i2 = quick_two_sum(h1, c4)
    j0, j1 = quick_two_sum(h0, c4)

    m1 = s1 != 0.0
    ma2 = a2 != 0.0
    mb3 = b3 != 0.0
    mp2 = p2 != 0.0
    md1 = d1 != 0.0
    me2 = e2 != 0.0
    mh1 = h1 != 0.0

    # assemble limb by limb; np.where cascades mirror the branch tree
    o0 = np.where(m1, s0, np.where(md1, d0, np.where(mh1, h0, j0)))
    o1 = np.where(
        m1,
        np.where(ma2, a1, np.where(mp2, p1, r1)),
        np.where(md1, np.where(me2, e1, g1), np.where(mh1, i1, j1)),
    )
    o2 = np.where(
        m1,
        np.where(
            ma2,
            np.where(mb3, b2, b2 + c4),
            np.where(mp2, q2, r2),
        ),
        np.where(md1, np.where(me2, f2, g2), np.where(mh1, i2, zero)),
    )
    o3 = np.where(
        m1,
        np.where(ma2, np.where(mb3, b3 + c4, zero), np.where(mp2, q3, zero)),
        np.where(md1, np.where(me2, f3, zero), zero),
    )
    return o0, o1, o2, o3


def qd_add(x0, x1, x2, x3, y0, y1, y2, y3):
    s0, t0 = two_sum(x0, y0)
    s1, t1 = two_sum(x1, y1)
    s2, t2 = two_sum(x2, y2)
    s3, t3 = two_sum(x3, y3)
    s1, t0 = two_sum(s1, t0)
    s2, t0, t1 = three_sum(s2, t0, t1)
    s3, t0 = three_sum2(s3, t0, t2)
    t0 = t0 + t1 + t3
    return _renorm5(s0, s1, s2, s3, t0)


def qd_neg(x0, x1, x2, x3):
    return -x0, -x1, -x2, -x3


def qd_sub(x0, x1, x2, x3, y0, y1, y2, y3):
    return qd_add(x0, x1, x2, x3, -y0, -y1, -y2, -y3)


def qd_mul(x0, x1, x2, x3, y0, y1, y2, y3):
    p0, q0 = two_prod(x0, y0)
    p1, q1 = two_prod(x0, y1)
    p2, q2 = two_prod(x1, y0)
    p3, q3 = two_prod(x0, y2)
    p4, q4 = two_prod(x1, y1)
    p5, q5 = two_prod(x2, y0)
    p1, p2, q0 = three_sum(p1, p2, q0)
    p2, q1, q2 = three_sum(p2, q1, q2)
    p3, p4, p5 = three_sum(p3, p4, p5)
    s0, t0 = two_sum(p2, p3)
    s1, t1 = two_sum(q1, p4)
    s2 = q2 + p5
    s1, t0 = two_sum(s1, t0)
    s2 = s2 + (t0 + t1)
    s1 = s1 + (x0 * y3 + x1 * y2 + x2 * y1 + x3 * y0 + q0 + q3 + q4 + q5)
    return _renorm5(p0, p1, s0, s1, s2)


def qd_div(x, y):
    """Scalar qd / qd via four quotient refinements."""
    x = tuple(np.asarray(v, dtype=np.float64) for v in x)
    y = tuple(np.asarray(v, dtype=np.float64) for v in y)
    zero = np.zeros_like(x[0])
    q = []
    r = x
    for _ in range(4):
        qi = r[0] / y[0]
        q.append(qi)
        r = qd_sub(*r, *qd_mul(*y, qi, zero, zero, zero))
    return _renorm5(q[0], q[1], q[2], q[3], r[0] / y[0])


def dd_to_qd(h, l):
    zero = np.zeros_like(h)
    return h, l, zero, zero


def qd_to_dd(a0, a1, a2, a3):
    return quick_two_sum(a0, a1 + (a2 + a3))


# ----------------------------------------------------------------- matmuls
def dd_matmul(a_re, a_im, b_re, b_im):
    """Complex dd matrix product.

    a_re, a_im: (2, n, m) limb stacks (hi plane, lo plane); b likewise
    (2, m, p).  Returns (c_re, c_im) with shape (2, n, p).
    """
    n, m = a_re.shape[1], a_re.shape[2]
    p = b_re.shape[2]
    crh = np.zeros((n, p))
    crl = np.zeros((n, p))
    cih = np.zeros((n, p))
    cil = np.zeros((n, p))
    for k in range(m):
        arh = a_re[0, :, k, None]
        arl = a_re[1, :, k, None]
        aih = a_im[0, :, k, None]
        ail = a_im[1, :, k, None]
        brh = b_re[0, None, k, :]
        brl = b_re[1, None, k, :]
        bih = b_im[0, None, k, :]
        bil = b_im[1, None, k, :]
        rr_h, rr_l = dd_mul(arh, arl, brh, brl)
        ii_h, ii_l = dd_mul(aih, ail, bih, bil)
        ri_h, ri_l = dd_mul(arh, arl, bih, bil)
        ir_h, ir_l = dd_mul(aih, ail, brh, brl)
        re_h, re_l = dd_sub(rr_h, rr_l, ii_h, ii_l)
        im_h, im_l = dd_add(ri_h, ri_l, ir_h, ir_l)
        crh, crl = dd_add(crh, crl, re_h, re_l)
        cih, cil = dd_add(cih, cil, im_h, im_l)
    return np.stack([crh, crl]), np.stack([cih, cil])


def qd_matmul(a_re, a_im, b_re, b_im):
    """Complex qd matrix product on (4, n, m) limb stacks."""
    n, m = a_re.shape[1], a_re.shape[2]
    p = b_re.shape[2]
    cre = [np.zeros((n, p)) for _ in range(4)]
    cim = [np.zeros((n, p)) for _ in range(4)]
    for k in range(m):
        ar = tuple(a_re[q, :, k, None] for q in range(4))
        ai = tuple(a_im[q, :, k, None] for q in range(4))
        br = tuple(b_re[q, None, k, :] for q in range(4))
        bi = tuple(b_im[q, None, k, :] for q in range(4))
        rr = qd_mul(*ar, *br)
        ii = qd_mul(*ai, *bi)
        ri = qd_mul(*ar, *bi)
        ir = qd_mul(*ai, *br)
        re = qd_sub(*rr, *ii)
        im = qd_add(*ri, *ir)
        cre = list(qd_add(*cre, *re))
        cim = list(qd_add(*cim, *im))
    return np.stack(cre), np.stack(cim)
