# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: language_level=3
"""Compiled double-double / quad-double complex matmul kernels.

Same contracts and limb-stack layout as _fallback.dd_matmul /
qd_matmul; see that module for algorithm references.  two_prod here
uses libc fma rather than the Dekker split -- both are exact product
transforms, so compiled and fallback results agree bit for bit (the
accumulation order over the contraction index is the same k-ascending
order in both).

Build flags matter: -ffp-contract=off keeps the compiler from fusing
the error-free transforms into fmas of its own, which would break
them.  Never compile this with -ffast-math.
"""

from libc.math cimport fma

import numpy as np


cdef inline (double, double) two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    cdef double bb = s - a
    return s, (a - (s - bb)) + (b - bb)


cdef inline (double, double) quick_two_sum(double a, double b) noexcept nogil:
    cdef double s = a + b
    return s, b - (s - a)


cdef inline (double, double) two_prod(double a, double b) noexcept nogil:
    cdef double p = a * b
    return p, fma(a, b, -p)


cdef inline (double, double, double) three_sum(double a, double b, double c) noexcept nogil:
    cdef double t1, t2, t3, a2, b2, c2
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    b2, c2 = two_sum(t2, t3)
    return a2, b2, c2


cdef inline (double, double) three_sum2(double a, double b, double c) noexcept nogil:
    cdef double t1, t2, t3, a2
    t1, t2 = two_sum(a, b)
    a2, t3 = two_sum(c, t1)
    return a2, t2 + t3


cdef inline (double, double) dd_add(double xh, double xl, double yh, double yl) noexcept nogil:
    cdef double sh, se, th, te
    sh, se = two_sum(xh, yh)
    th, te = two_sum(xl, yl)
    se = se + th
    sh, se = quick_two_sum(sh, se)
    se = se + te
    return quick_two_sum(sh, se)


cdef inline (double, double) dd_mul(double xh, double xl, double yh, double yl) noexcept nogil:
    cdef double p, e
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return quick_two_sum(p, e)


def dd_matmul(double[:, :, ::1] a_re, double[:, :, ::1] a_im,
              double[:, :, ::1] b_re, double[:, :, ::1] b_im):
    """Complex dd matrix product on (2, n, m) limb stacks."""
    cdef Py_ssize_t n = a_re.shape[1]
    cdef Py_ssize_t m = a_re.shape[2]
    cdef Py_ssize_t p = b_re.shape[2]
    c_re_np = np.zeros((2, n, p))
    c_im_np = np.zeros((2, n, p))
    cdef double[:, :, ::1] c_re = c_re_np
    cdef double[:, :, ::1] c_im = c_im_np
    cdef Py_ssize_t i, k, j
    cdef double arh, arl, aih, ail, brh, brl, bih, bil
    cdef double rrh, rrl, iih, iil, rih, ril, irh, irl
    cdef double reh, rel, imh, iml
    with nogil:
        for i in range(n):
            for k in range(m):
                arh = a_re[0, i, k]
                arl = a_re[1, i, k]
                aih = a_im[0, i, k]
                ail = a_im[1, i, k]
                if arh == 0.0 and aih == 0.0 and arl == 0.0 and ail == 0.0:
                    continue  # exact-zero row entry contributes exactly nothing
                for j in range(p):
                    brh = b_re[0, k, j]
                    brl = b_re[1, k, j]
                    bih = b_im[0, k, j]
                    bil = b_im[1, k, j]
                    rrh, rrl = dd_mul(arh, arl, brh, brl)
                    iih, iil = dd_mul(aih, ail, bih, bil)
                    rih, ril = dd_mul(arh, arl, bih, bil)
                    irh, irl = dd_mul(aih, ail, brh, brl)
                    reh, rel = dd_add(rrh, rrl, -iih, -iil)
                    imh, iml = dd_add(rih, ril, irh, irl)
                    c_re[0, i, j], c_re[1, i, j] = dd_add(
                        c_re[0, i, j], c_re[1, i, j], reh, rel)
                    c_im[0, i, j], c_im[1, i, j] = dd_add(
                        c_im[0, i, j], c_im[1, i, j], imh, iml)
    return c_re_np, c_im_np


cdef inline (double, double, double, double) renorm5(
        double c0, double c1, double c2, double c3, double c4) noexcept nogil:
    cdef double s0, s1, s
    cdef double s2 = 0.0
    cdef double s3 = 0.0
    s, c4 = quick_two_sum(c3, c4)
    s, c3 = quick_two_sum(c2, s)
    s, c2 = quick_two_sum(c1, s)
    c0, c1 = quick_two_sum(c0, s)
    s0, s1 = quick_two_sum(c0, c1)
    if s1 != 0.0:
        s1, s2 = quick_two_sum(s1, c2)
        if s2 != 0.0:
            s2, s3 = quick_two_sum(s2, c3)
            if s3 != 0.0:
                s3 = s3 + c4
            else:
                s2 = s2 + c4
        else:
            s1, s2 = quick_two_sum(s1, c3)
            if s2 != 0.0:
                s2, s3 = quick_two_sum(s2, c4)
            else:
                s1, s2 = quick_two_sum(s1, c4)
    else:
        s0, s1 = quick_two_sum(s0, c2)
        if s1 != 0.0:
            s1, s2 = quick_two_sum(s1, c3)
            if s2 != 0.0:
                s2, s3 = quick_two_sum(s2, c4)
            else:
                s1, s2 = quick_two_sum(s1, c4)
        else:
            s0, s1 = quick_two_sum(s0, c3)
            if s1 != 0.0:
                s1, s2 = quick_two_sum(s1, c4)
            else:
                s0, s1 = quick_two_sum(s0, c4)
    return s0, s1, s2, s3


cdef inline (double, double, double, double) qd_add(
        double x0, double x1, double x2, double x3,
        double y0, double y1, double y2, double y3) noexcept nogil:
    cdef double s0, s1, s2, s3, t0, t1, t2, t3
    s0, t0 = two_sum(x0, y0)
    s1, t1 = two_sum(x1, y1)
    s2, t2 = two_sum(x2, y2)
    s3, t3 = two_sum(x3, y3)
    s1, t0 = two_sum(s1, t0)
    s2, t0, t1 = three_sum(s2, t0, t1)
    s3, t0 = three_sum2(s3, t0, t2)
    t0 = t0 + t1 + t3
    return renorm5(s0, s1, s2, s3, t0)


cdef inline (double, double, double, double) qd_mul(
        double x0, double x1, double x2, double x3,
        double y0, double y1, double y2, double y3) noexcept nogil:
    cdef double p0, p1, p2, p3, p4, p5
    cdef double q0, q1, q2, q3, q4, q5
    cdef double s0, s1, s2, t0, t1
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
    return renorm5(p0, p1, s0, s1, s2)


def qd_matmul(double[:, :, ::1] a_re, double[:, :, ::1] a_im,
              double[:, :, ::1] b_re, double[:, :, ::1] b_im):
    """Complex qd matrix product on (4, n, m) limb stacks."""
    cdef Py_ssize_t n = a_re.shape[1]
    cdef Py_ssize_t m = a_re.shape[2]
    cdef Py_ssize_t p = b_re.shape[2]
    c_re_np = np.zeros((4, n, p))
    c_im_np = np.zeros((4, n, p))
    cdef double[:, :, ::1] c_re = c_re_np
    cdef double[:, :, ::1] c_im = c_im_np
    cdef Py_ssize_t i, k, j
    cdef double ar0, ar1, ar2, ar3, ai0, ai1, ai2, ai3
    cdef double br0, br1, br2, br3, bi0, bi1, bi2, bi3
    cdef double rr0, rr1, rr2, rr3, ii0, ii1, ii2, ii3
    cdef double ri0, ri1, ri2, ri3, ir0, ir1, ir2, ir3
    cdef double re0, re1, re2, re3, im0, im1, im2, im3
    with nogil:
        for i in range(n):
            for k in range(m):
                ar0 = a_re[0, i, k]
                ar1 = a_re[1, i, k]
                ar2 = a_re[2, i, k]
                ar3 = a_re[3, i, k]
                ai0 = a_im[0, i, k]
                ai1 = a_im[1, i, k]
                ai2 = a_im[2, i, k]
                ai3 = a_im[3, i, k]
                if (ar0 == 0.0 and ai0 == 0.0 and ar1 == 0.0 and ai1 == 0.0
                        and ar2 == 0.0 and ai2 == 0.0 and ar3 == 0.0 and ai3 == 0.0):
                    continue
                for j in range(p):
                    br0 = b_re[0, k, j]
                    br1 = b_re[1, k, j]
                    br2 = b_re[2, k, j]
                    br3 = b_re[3, k, j]
                    bi0 = b_im[0, k, j]
                    bi1 = b_im[1, k, j]
                    bi2 = b_im[2, k, j]
                    bi3 = b_im[3, k, j]
                    rr0, rr1, rr2, rr3 = qd_mul(ar0, ar1, ar2, ar3, br0, br1, br2, br3)
                    ii0, ii1, ii2, ii3 = qd_mul(ai0, ai1, ai2, ai3, bi0, bi1, bi2, bi3)
                    ri0, ri1, ri2, ri3 = qd_mul(ar0, ar1, ar2, ar3, bi0, bi1, bi2, bi3)
                    ir0, ir1, ir2, ir3 = qd_mul(ai0, ai1, ai2, ai3, br0, br1, br2, br3)
                    re0, re1, re2, re3 = qd_add(rr0, rr1, rr2, rr3, -ii0, -ii1, -ii2, -ii3)
                    im0, im1, im2, im3 = qd_add(ri0, ri1, ri2, ri3, ir0, ir1, ir2, ir3)
                    c_re[0, i, j], c_re[1, i, j], c_re[2, i, j], c_re[3, i, j] = qd_add(
                        c_re[0, i, j], c_re[1, i, j], c_re[2, i, j], c_re[3, i, j],
                        re0, re1, re2, re3)
                    c_im[0, i, j], c_im[1, i, j], c_im[2, i, j], c_im[3, i, j] = qd_add(
                        c_im[0, i, j], c_im[1, i, j], c_im[2, i, j], c_im[3, i, j],
                        im0, im1, im2, im3)
    return c_re_np, c_im_np
