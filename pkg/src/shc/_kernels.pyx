# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bessel kernel, long double arithmetic throughout.

Same contract as ``shc._kernels_py.jv``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, round
from libc.math cimport sinl, cosl, sqrtl, powl, fabsl, tgammal

cnp.import_array()

cdef extern from *:
    """
    static const long double SHC_PI = 3.141592653589793238462643383279502884L;
    static const long double SHC_EPS = 1.0842021724855044340e-19L;
    """
    long double PI "SHC_PI"
    long double EPS "SHC_EPS"

cdef int SERIES_MAX_TERMS = 400


cdef long double _rgamma(long double x) nogil:
    if x <= 0 and x == floor(<double>x):
        return 0.0
    return 1.0 / tgammal(x)


cdef long double _series(long double v, long double x, long double rg) nogil:
    cdef long double h = x / 2
    cdef long double t = powl(h, v) * rg
    cdef long double s = t
    cdef long double q = -h * h
    cdef int k
    for k in range(1, SERIES_MAX_TERMS):
        t = t * q / (<long double>k * (<long double>k + v))
        s = s + t
        if k > h and fabsl(t) <= EPS * fabsl(s) * 0.25:
            break
    return s


cdef long double _hankel(long double v, long double x, int max_terms, int exact) nogil:
    cdef long double mu = 4 * v * v
    cdef long double term = 1, new, p = 1, q = 0, w
    cdef long double eight_x = 8 * x
    cdef int k, sign
    for k in range(1, max_terms):
        new = term * (mu - <long double>((2 * k - 1) * (2 * k - 1))) / (<long double>k * eight_x)
        if not exact and fabsl(new) > fabsl(term):
            break
        term = new
        sign = 1 if (k // 2) % 2 == 0 else -1
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        if not exact and fabsl(term) <= EPS * 0.25:
            break
    w = x - (v / 2 + <long double>0.25) * PI
    return sqrtl(2 / (PI * x)) * (p * cosl(w) - q * sinl(w))


def jv(double order, x, double cutoff=17.0, int terms=8):
    """J_order(x) for x > 0, evaluated in long double."""
    cdef cnp.ndarray xa = np.ascontiguousarray(x, dtype=np.longdouble)
    cdef long double[::1] xv = xa
    cdef cnp.ndarray out = np.empty_like(xa)
    cdef long double[::1] ov = out
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double v = order
    cdef double r
    cdef int m, half = 0, n_exact = 0
    cdef long double lv, rg
    if v < 0 and v == floor(v):
        m = <int>(-v)
        res = jv(<double>m, xa, cutoff, terms)
        return res if m % 2 == 0 else -res
    r = v - 0.5
    if fabs(r - round(r)) < 1e-13:
        half = 1
        v = round(r) + 0.5
        n_exact = <int>(fabs(v) + 0.5) + 2
    lv = v
    rg = _rgamma(lv + 1)
    with nogil:
        for i in range(n):
            if half:
                if fabs(v) == 0.5 or (xv[i] >= 1 and xv[i] >= fabs(v)):
                    ov[i] = _hankel(lv, xv[i], n_exact, 1)
                else:
                    ov[i] = _series(lv, xv[i], rg)
            elif xv[i] < cutoff:
                ov[i] = _series(lv, xv[i], rg)
            else:
                ov[i] = _hankel(lv, xv[i], 2 * terms, 0)
    return out
