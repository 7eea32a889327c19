"""Real-order Bessel functions of the first kind and related identities.

Values are computed in long double by the kernel selected in
:mod:`shc._backend` and returned as double unless a ``*_ld`` variant is used.
Below ``series_cutoff`` the ascending power series is summed; beyond it the
Hankel expansion

    J_v(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w),   w = x - v pi/2 - pi/4,

is used with the coefficients a_k(v) = prod_{j<=k} (4v^2 - (2j-1)^2) / (k! 8^k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError

LD = np.longdouble
PI_LD = LD("3.141592653589793238462643383279502884")


@dataclass(frozen=True)
class EvalRegime:
    """Switch point between power series and Hankel expansion."""

    series_cutoff: float = 17.0
    asymptotic_terms: int = 8

    def __post_init__(self):
        if not self.series_cutoff >= 8:
            raise DomainError("series_cutoff must be >= 8")
        if not 1 <= self.asymptotic_terms <= 8:
            raise DomainError("asymptotic_terms must lie in [1, 8]")


DEFAULT_REGIME = EvalRegime()


def gamma_real(x: float) -> float:
    """Euler Gamma function on the real line."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError("gamma_real needs a finite argument")
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """1/Gamma(x), equal to 0 at the poles."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _as_positive_ld(x):
    arr = np.atleast_1d(np.asarray(x, dtype=LD)).ravel()
    if arr.size and not np.all(arr > 0):
        raise DomainError("Bessel evaluation needs x > 0")
    return arr


def _shape_back(x, values, dtype=float):
    if np.ndim(x) == 0:
        return dtype(values[0])
    return values.astype(dtype).reshape(np.shape(x))


def bessel_j_ld(order: float, x, regime: EvalRegime = DEFAULT_REGIME) -> np.ndarray:
    """J_order on a 1-D array of positive abscissae, long double output."""
    arr = _as_positive_ld(x)
    return _backend.jv(float(order), arr, regime.series_cutoff, regime.asymptotic_terms)


def bessel_j(order: float, x, regime: EvalRegime = DEFAULT_REGIME):
    """J_order(x) for x > 0 (scalar or array)."""
    return _shape_back(x, bessel_j_ld(order, x, regime))


def branch_values(order: float, x, regime: EvalRegime = DEFAULT_REGIME):
    """(power series, Hankel expansion) values of J_order at x, forced branch each."""
    arr = _as_positive_ld(x)
    series = _backend.jv(float(order), arr, math.inf, regime.asymptotic_terms)
    hankel = _backend.jv(float(order), arr, 0.0, regime.asymptotic_terms)
    return series, hankel


def branch_disagreement(order: float, x, regime: EvalRegime = DEFAULT_REGIME) -> float:
    """max |series - Hankel| / sqrt(2/(pi x)).

    The envelope replaces |J| in the denominator because J vanishes at its
    zeros, where a pointwise relative difference is meaningless.
    """
    arr = _as_positive_ld(x)
    s, h = branch_values(order, arr, regime)
    env = np.sqrt(2 / (PI_LD * arr))
    return float(np.max(np.abs(s - h) / env))


def bessel_j_prime_ld(order: float, x, regime: EvalRegime = DEFAULT_REGIME) -> np.ndarray:
    arr = _as_positive_ld(x)
    lo = _backend.jv(float(order) - 1.0, arr, regime.series_cutoff, regime.asymptotic_terms)
    hi = _backend.jv(float(order) + 1.0, arr, regime.series_cutoff, regime.asymptotic_terms)
    return (lo - hi) / 2


def bessel_j_prime(order: float, x, regime: EvalRegime = DEFAULT_REGIME):
    """dJ_order/dx via J' = (J_{order-1} - J_{order+1}) / 2."""
    return _shape_back(x, bessel_j_prime_ld(order, x, regime))


def wronskian_residual(nu: float, x, regime: EvalRegime = DEFAULT_REGIME):
    """(J_nu J'_{-nu} - J'_nu J_{-nu})(x) + 2 sin(nu pi)/(pi x)."""
    if not 0 < nu < 1:
        raise DomainError("wronskian_residual needs 0 < nu < 1")
    arr = _as_positive_ld(x)
    jp = bessel_j_ld(nu, arr, regime)
    jm = bessel_j_ld(-nu, arr, regime)
    dp = bessel_j_prime_ld(nu, arr, regime)
    dm = bessel_j_prime_ld(-nu, arr, regime)
    res = jp * dm - dp * jm + 2 * np.sin(LD(nu) * PI_LD) / (PI_LD * arr)
    return _shape_back(x, res)


def product_upper_bound_check(nu: float, x: float) -> bool:
    """True iff J_nu(x) J_{-nu}(x) < sin(nu pi)/(nu pi)."""
    if not 0 < nu < 1:
        raise DomainError("product bound needs 0 < nu < 1")
    arr = _as_positive_ld(x)
    prod = bessel_j_ld(nu, arr) * bessel_j_ld(-nu, arr)
    bound = np.sin(LD(nu) * PI_LD) / (LD(nu) * PI_LD)
    return bool(np.all(prod < bound))


def mcmahon_guess(order: float, n) -> np.ndarray:
    """McMahon's large-n approximation of the n-th positive zero."""
    n = np.asarray(n, dtype=float)
    mu = 4.0 * order * order
    beta = (n + order / 2 - 0.25) * math.pi
    b8 = 8.0 * beta
    return beta - (mu - 1) / b8 - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8**3)


def _refine_zeros(order, lo, hi, guess, max_iter=100):
    """Safeguarded Newton on J_order inside [lo, hi] (vectorised, long double)."""
    lo = lo.astype(LD)
    hi = hi.astype(LD)
    f_lo = bessel_j_ld(order, lo)
    x = np.clip(guess.astype(LD), lo, hi)
    eps = np.finfo(LD).eps
    for _ in range(max_iter):
        f = bessel_j_ld(order, x)
        d = bessel_j_prime_ld(order, x)
        same = np.sign(f) == np.sign(f_lo)
        lo = np.where(same, x, lo)
        f_lo = np.where(same, f, f_lo)
        hi = np.where(same, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / d
        nxt = x - step
        bad = ~np.isfinite(nxt) | (nxt <= lo) | (nxt >= hi)
        nxt = np.where(bad, (lo + hi) / 2, nxt)
        done = (np.abs(nxt - x) <= 4 * eps * np.abs(x)) | (f == 0) | (hi - lo <= 4 * eps * hi)
        x = nxt
        if np.all(done):
            return x
    raise ConvergenceError(f"zero refinement for order {order} did not converge")


@lru_cache(maxsize=128)
def _zero_table(order: float, count: int) -> np.ndarray:
    r = order - 0.5
    if abs(r - round(r)) < 1e-13 and abs(order) == 0.5:
        k = np.arange(1, count + 1, dtype=LD)
        z = (k - (LD(0.5) if order < 0 else LD(0))) * PI_LD
        out = z.astype(float)
        out.flags.writeable = False
        return out
    # scan for sign changes; J_order > 0 near 0+ for order > -1
    top = float(mcmahon_guess(order, count)) + 3.0
    step = 0.25
    grid = np.arange(step, top + step, step)
    vals = bessel_j_ld(order, grid)
    signs = np.sign(vals)
    prev = np.concatenate(([1.0], signs[:-1]))
    idx = np.nonzero(signs * prev <= 0)[0]
    if idx.size < count:
        raise ConvergenceError(f"zero scan for order {order} found {idx.size} < {count} zeros")
    idx = idx[:count]
    lo = np.where(idx > 0, grid[idx - 1], 1e-300)
    hi = grid[idx]
    exact = signs[idx] == 0
    guess = mcmahon_guess(order, np.arange(1, count + 1))
    guess = np.where((guess > lo) & (guess < hi), guess, (lo + hi) / 2)
    z = _refine_zeros(order, lo, hi, guess)
    z = np.where(exact, hi, z).astype(float)
    z.flags.writeable = False
    return z


def bessel_zeros(order: float, count: int) -> np.ndarray:
    """The first ``count`` positive zeros of J_order, order > -1."""
    if not order > -1:
        raise DomainError("zeros are computed for order > -1")
    if count < 1:
        return np.empty(0)
    # round the table size up so that growing requests share cache entries
    size = max(64, 1 << (int(count) - 1).bit_length())
    return _zero_table(float(order), size)[:count]


def bessel_zero(order: float, n: int) -> float:
    """The n-th positive zero j_{order,n}."""
    if n < 1:
        raise DomainError("zero index starts at 1")
    return float(bessel_zeros(order, n)[n - 1])


def _same_primitive(order, a, t):
    z = a * t
    j = bessel_j_ld(order, z)[0]
    d = bessel_j_prime_ld(order, z)[0]
    return t * t / 2 * ((1 - LD(order) ** 2 / (z * z)) * j * j + d * d)


def _cross_primitive(nu, a, t):
    z = a * t
    jp, jm = bessel_j_ld(nu, z)[0], bessel_j_ld(-nu, z)[0]
    dp, dm = bessel_j_prime_ld(nu, z)[0], bessel_j_prime_ld(-nu, z)[0]
    return t * t / 2 * ((1 - LD(nu) ** 2 / (z * z)) * jp * jm + dp * dm)


def bessel_product_integral(
    kind: str, order: float, a: float, alpha: float = 0.0, beta: float = 1.0, sign: int = 1
) -> float:
    """Closed form of int_alpha^beta x J(ax) J(ax) dx.

    ``kind='same_order'`` integrates J_{sign*order}^2, ``kind='cross_order'``
    integrates J_order J_{-order}.  Needs 0 < order < 1.
    """
    if not 0 < order < 1:
        raise DomainError("closed-form integrals need 0 < order < 1")
    if not (a > 0 and 0 <= alpha < beta):
        raise DomainError("need a > 0 and 0 <= alpha < beta")
    a = LD(a)
    if kind == "same_order":
        v = order if sign > 0 else -order
        val = _same_primitive(v, a, LD(beta))
        if alpha > 0:
            val -= _same_primitive(v, a, LD(alpha))
    elif kind == "cross_order":
        val = _cross_primitive(order, a, LD(beta))
        if alpha > 0:
            val -= _cross_primitive(order, a, LD(alpha))
        else:
            val += LD(order) * np.sin(LD(order) * PI_LD) / (PI_LD * a * a)
    else:
        raise DomainError(f"unknown integral kind {kind!r}")
    return float(val)
