"""Complex matrices in double-double / quad-double precision.

Layout is structure-of-arrays: a DDMatrix holds limb stacks re, im of
shape (2, n, m) (hi plane, lo plane) and a QDMatrix holds (4, n, m).
This keeps every elementwise operation a handful of whole-array numpy
calls and matches what the compiled matmul kernels expect.

Only the products go through the selected backend; sums, scalings and
norms are cheap enough in vectorized numpy that a compiled path would
not pay for itself.
"""
from __future__ import annotations

import numpy as np

from . import _fallback as ef
from ._backend import dd_matmul, qd_matmul


def _tree_pairs(arrs):
    """Halve-and-add reduction; deterministic regardless of length."""
    n = arrs[0].size
    parts = [a.ravel() for a in arrs]
    while n > 1:
        if n % 2:
            parts = [np.concatenate([a, [0.0]]) for a in parts]
            n += 1
        h = n // 2
        lo = [a[:h] for a in parts]
        hi = [a[h:] for a in parts]
        parts = list(_TREE_ADD[len(parts)](*lo, *hi))
        n = h
    return tuple(a[0] for a in parts)


_TREE_ADD = {2: ef.dd_add, 4: ef.qd_add}


class DDMatrix:
    """Complex (n, m) matrix with double-double entries."""

    __slots__ = ("re", "im")
    nlimb = 2
    digits = 32

    def __init__(self, re, im):
        self.re = re
        self.im = im

    # -- constructors -------------------------------------------------
    @classmethod
    def from_complex(cls, a):
        a = np.asarray(a, dtype=np.complex128)
        zero = np.zeros(a.shape)
        return cls(np.stack([a.real.copy(), zero]), np.stack([a.imag.copy(), zero.copy()]))

    @classmethod
    def zeros(cls, n, m=None):
        m = n if m is None else m
        return cls(np.zeros((2, n, m)), np.zeros((2, n, m)))

    @classmethod
    def eye(cls, n):
        out = cls.zeros(n)
        out.re[0] = np.eye(n)
        return out

    # -- views --------------------------------------------------------
    @property
    def shape(self):
        return self.re.shape[1:]

    def to_complex(self):
        return (self.re[0] + self.re[1]) + 1j * (self.im[0] + self.im[1])

    def copy(self):
        return DDMatrix(self.re.copy(), self.im.copy())

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        rh, rl = ef.dd_add(self.re[0], self.re[1], other.re[0], other.re[1])
        ih, il = ef.dd_add(self.im[0], self.im[1], other.im[0], other.im[1])
        return DDMatrix(np.stack([rh, rl]), np.stack([ih, il]))

    def __sub__(self, other):
        rh, rl = ef.dd_sub(self.re[0], self.re[1], other.re[0], other.re[1])
        ih, il = ef.dd_sub(self.im[0], self.im[1], other.im[0], other.im[1])
        return DDMatrix(np.stack([rh, rl]), np.stack([ih, il]))

    def __neg__(self):
        return DDMatrix(-self.re, -self.im)

    def __matmul__(self, other):
        c_re, c_im = dd_matmul(self.re, self.im, other.re, other.im)
        return DDMatrix(c_re, c_im)

    def scale(self, s):
        """Multiply by a real scalar given as a dd pair (hi, lo)."""
        sh, sl = s
        rh, rl = ef.dd_mul(self.re[0], self.re[1], sh, sl)
        ih, il = ef.dd_mul(self.im[0], self.im[1], sh, sl)
        return DDMatrix(np.stack([rh, rl]), np.stack([ih, il]))

    def times_i(self):
        """Multiply by the imaginary unit (exact)."""
        return DDMatrix(-self.im, self.re.copy())

    def mask(self, keep):
        """Zero entries where ``keep`` (0/1 float array) is 0; exact."""
        return DDMatrix(self.re * keep, self.im * keep)

    def conj_t(self):
        return DDMatrix(np.ascontiguousarray(self.re.transpose(0, 2, 1)),
                        -np.ascontiguousarray(self.im.transpose(0, 2, 1)))

    # -- norms --------------------------------------------------------
    def frob2(self):
        """Squared Frobenius norm as a dd pair."""
        rr = ef.dd_mul(self.re[0], self.re[1], self.re[0], self.re[1])
        ii = ef.dd_mul(self.im[0], self.im[1], self.im[0], self.im[1])
        h, l = ef.dd_add(*rr, *ii)
        return _tree_pairs([h, l])

    def frob(self):
        return ef.dd_sqrt(*self.frob2())

    def abs2_element(self, i, j):
        re = (self.re[0, i, j], self.re[1, i, j])
        im = (self.im[0, i, j], self.im[1, i, j])
        h, l = ef.dd_add(*ef.dd_mul(*re, *re), *ef.dd_mul(*im, *im))
        return h, l

    def herm_defect(self):
        """Relative deviation from Hermiticity, ||A - A^dag||_F / ||A||_F.

        Computed natively in dd so that defects far below double
        roundoff are still resolved.
        """
        d = self - self.conj_t()
        d2h, d2l = d.frob2()
        n2h, n2l = self.frob2()
        if n2h == 0.0:
            return 0.0
        qh, ql = ef.dd_div(d2h, d2l, n2h, n2l)
        rh, _ = ef.dd_sqrt(qh, ql)
        return float(rh)


class QDMatrix:
    """Complex (n, m) matrix with quad-double entries."""

    __slots__ = ("re", "im")
    nlimb = 4
    digits = 64

    def __init__(self, re, im):
        self.re = re
        self.im = im

    @classmethod
    def from_complex(cls, a):
        a = np.asarray(a, dtype=np.complex128)
        re = np.zeros((4,) + a.shape)
        im = np.zeros((4,) + a.shape)
        re[0] = a.real
        im[0] = a.imag
        return cls(re, im)

    @classmethod
    def from_dd(cls, a):
        re = np.zeros((4,) + a.shape)
        im = np.zeros((4,) + a.shape)
        re[:2] = a.re
        im[:2] = a.im
        return cls(re, im)

    @classmethod
    def zeros(cls, n, m=None):
        m = n if m is None else m
        return cls(np.zeros((4, n, m)), np.zeros((4, n, m)))

    @classmethod
    def eye(cls, n):
        re = np.zeros((4, n, n))
        re[0] = np.eye(n)
        return cls(re, np.zeros((4, n, n)))

    @property
    def shape(self):
        return self.re.shape[1:]

    def to_complex(self):
        return (self.re[0] + self.re[1]) + 1j * (self.im[0] + self.im[1])

    def to_dd(self):
        rh, rl = ef.qd_to_dd(*self.re)
        ih, il = ef.qd_to_dd(*self.im)
        return DDMatrix(np.stack([rh, rl]), np.stack([ih, il]))

    def __add__(self, other):
        r = ef.qd_add(*self.re, *other.re)
        i = ef.qd_add(*self.im, *other.im)
        return QDMatrix(np.stack(r), np.stack(i))

    def __sub__(self, other):
        r = ef.qd_sub(*self.re, *other.re)
        i = ef.qd_sub(*self.im, *other.im)
        return QDMatrix(np.stack(r), np.stack(i))

    def __neg__(self):
        return QDMatrix(-self.re, -self.im)

    def __matmul__(self, other):
        c_re, c_im = qd_matmul(self.re, self.im, other.re, other.im)
        return QDMatrix(c_re, c_im)

    def scale(self, s):
        """Multiply by a real scalar given as a qd 4-tuple."""
        r = ef.qd_mul(*self.re, *s)
        i = ef.qd_mul(*self.im, *s)
        return QDMatrix(np.stack(r), np.stack(i))

    def times_i(self):
        return QDMatrix(-self.im, self.re.copy())

    def mask(self, keep):
        return QDMatrix(self.re * keep, self.im * keep)

    def conj_t(self):
        return QDMatrix(np.ascontiguousarray(self.re.transpose(0, 2, 1)),
                        -np.ascontiguousarray(self.im.transpose(0, 2, 1)))

    def frob2(self):
        rr = ef.qd_mul(*self.re, *self.re)
        ii = ef.qd_mul(*self.im, *self.im)
        s = ef.qd_add(*rr, *ii)
        return _tree_pairs(list(s))

    def herm_defect(self):
        d = self - self.conj_t()
        d2 = d.frob2()
        n2 = self.frob2()
        if n2[0] == 0.0:
            return 0.0
        q = ef.qd_div(d2, n2)
        return float(np.sqrt(q[0]))

    def abs2_element(self, i, j):
        re = tuple(self.re[q, i, j] for q in range(4))
        im = tuple(self.im[q, i, j] for q in range(4))
        s = ef.qd_add(*ef.qd_mul(*re, *re), *ef.qd_mul(*im, *im))
        return s


# ------------------------------------------------------------- scalar helpers
def dd_recip_int(m):
    """1/m as a dd pair (m a positive int)."""
    one = np.float64(1.0)
    return ef.dd_div(one, np.float64(0.0), np.float64(m), np.float64(0.0))


def qd_recip_int(m):
    zero = np.float64(0.0)
    return ef.qd_div((np.float64(1.0), zero, zero, zero),
                     (np.float64(m), zero, zero, zero))
