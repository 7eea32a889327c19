"""Pure numpy implementation of the Bessel kernel.

All arithmetic is carried out in ``numpy.longdouble`` so that the phase of the
Hankel expansion and the alternating power series keep a few guard digits
beyond double precision.  The compiled module ``shc._kernels`` exposes the
same function with the same semantics.
"""

import math

import numpy as np

LD = np.longdouble
PI = LD("3.141592653589793238462643383279502884")
EPS = np.finfo(LD).eps
SERIES_MAX_TERMS = 400


def _rgamma(x):
    """1/Gamma(x) in double precision, zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _is_half_integer(v):
    r = v - 0.5
    return abs(r - round(r)) < 1e-13


def _series(v, x):
    h = x / 2
    t = np.power(h, LD(v)) * LD(_rgamma(v + 1.0))
    s = t.copy()
    q = -h * h
    hmax = float(np.max(h)) if h.size else 0.0
    for k in range(1, SERIES_MAX_TERMS):
        t = t * q / (LD(k) * (LD(k) + LD(v)))
        s = s + t
        if k > hmax and np.all(np.abs(t) <= EPS * np.abs(s) * 0.25):
            break
    return s


def _hankel(v, x, max_terms, exact=False):
    mu = 4 * LD(v) * LD(v)
    term = np.ones_like(x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    eight_x = 8 * x
    for k in range(1, max_terms):
        new = term * (mu - LD(2 * k - 1) ** 2) / (LD(k) * eight_x)
        # stop each lane once the series starts to diverge
        if not exact:
            active &= ~(np.abs(new) > np.abs(term))
        term = np.where(active, new, term)
        if not np.any(active):
            break
        sign = 1 if (k // 2) % 2 == 0 else -1
        if k % 2 == 0:
            p = np.where(active, p + sign * term, p)
        else:
            q = np.where(active, q + sign * term, q)
        if not exact and np.all(np.abs(term) <= EPS * 0.25):
            break
    w = x - (LD(v) / 2 + LD(0.25)) * PI
    return np.sqrt(2 / (PI * x)) * (p * np.cos(w) - q * np.sin(w))


def jv(order, x, cutoff=17.0, terms=8):
    """J_order(x) for x > 0, evaluated in long double.

    ``x`` is a 1-D array.  Points below ``cutoff`` use the power series, the
    others the Hankel expansion with at most ``terms`` terms in each of P and Q.
    """
    x = np.asarray(x, dtype=LD)
    v = float(order)
    if v < 0 and v == math.floor(v):
        m = int(-v)
        return (-1) ** m * jv(float(m), x, cutoff, terms)
    out = np.empty_like(x)
    if x.size == 0:
        return out
    if _is_half_integer(v):
        v = round(v - 0.5) + 0.5
        # the Hankel expansion terminates for half-integer orders
        n_exact = int(abs(v) + 0.5) + 2
        if abs(v) == 0.5:
            return _hankel(v, x, n_exact, exact=True)
        # a finite sum, but it cancels badly for x much below the order
        big = x >= max(1.0, abs(v))
        out[big] = _hankel(v, x[big], n_exact, exact=True)
        out[~big] = _series(v, x[~big])
        return out
    small = x < cutoff
    if np.any(small):
        out[small] = _series(v, x[small])
    if np.any(~small):
        out[~small] = _hankel(v, x[~small], 2 * terms)
    return out
