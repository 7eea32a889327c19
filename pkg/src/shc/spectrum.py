"""Eigenvalues and eigenfunctions of -d^2/dx^2 + (nu^2 - 1/4)/x^2 on (-1, 1).

The operator acts on (-1,0) and (0,1) separately.  Near 0 every element of
the domain behaves like c1 |x|^{nu+1/2} + c2 |x|^{-nu+1/2} on each side, and
the transmission conditions couple the two sides:

    c1- + c2- + c1+ + c2+ = 0,
    (nu+1/2) c1- + (1/2-nu) c2- = (nu+1/2) c1+ + (1/2-nu) c2+,

with Dirichlet conditions at -1 and 1.  Eigenvalues are indexed globally,
0 = lam_0 < lam_1 < ..., and eigenfunctions with even index are even.  With
s = sqrt(E), gamma_ratio = Gamma(nu+1)/Gamma(1-nu) and
odd_factor = (1-2nu)/(1+2nu), the index-n eigenvalue solves

    factor * gamma_ratio * (s/2)^{-2 nu} J_nu(s) = J_{-nu}(s),

with factor = 1 for even and odd_factor for odd indices.  Each root is
located by bisection inside an interval bounded by squared Bessel zeros,
in long double arithmetic.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BracketError, DomainError
from .quadrature import FULL, QuadratureConfig, as_region, integrate, integrate_estimate
from .special_functions import (
    PI_LD,
    bessel_j_ld,
    bessel_j_prime_ld,
    bessel_zeros,
)

LD = np.longdouble
EPS_LD = np.finfo(LD).eps
HALF_SNAP = 1e-10
MAX_BISECTION = 200


@dataclass(frozen=True)
class SpectralParameter:
    """The order nu in (0,1) and the constants derived from it."""

    nu: float
    c_nu: float = field(init=False)
    gamma_ratio: float = field(init=False)
    odd_factor: float = field(init=False)

    def __post_init__(self):
        nu = float(self.nu)
        if not 0 < nu < 1:
            raise DomainError("nu must lie in (0, 1)")
        if abs(nu - 0.5) < HALF_SNAP:
            nu = 0.5
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "c_nu", nu * nu - 0.25)
        object.__setattr__(self, "gamma_ratio", math.gamma(nu + 1) / math.gamma(1 - nu))
        object.__setattr__(self, "odd_factor", (1 - 2 * nu) / (1 + 2 * nu))

    @property
    def is_half(self) -> bool:
        return self.nu == 0.5

    def factor(self, parity: str) -> float:
        return 1.0 if parity == "even" else self.odd_factor

    def d_nu(self, E: float) -> float:
        """D_nu(E) = gamma_ratio (sqrt(E)/2)^{-2nu} / (1+2nu)."""
        if not E > 0:
            raise DomainError("D_nu needs E > 0")
        return self.gamma_ratio * (math.sqrt(E) / 2) ** (-2 * self.nu) / (1 + 2 * self.nu)


def parity_of(n: int) -> str:
    return "even" if n % 2 == 0 else "odd"


def _as_param(param) -> SpectralParameter:
    return param if isinstance(param, SpectralParameter) else SpectralParameter(float(param))


def _secular(param: SpectralParameter, factor, E):
    """factor * gamma_ratio (s/2)^{-2nu} J_nu(s) - J_{-nu}(s), pole free."""
    s = np.sqrt(np.asarray(E, dtype=LD))
    nu = param.nu
    jp = bessel_j_ld(nu, s)
    jm = bessel_j_ld(-nu, s)
    return LD(factor) * LD(param.gamma_ratio) * np.power(s / 2, LD(-2 * nu)) * jp - jm, jm


def characteristic_ld(param, parity: str, E) -> np.ndarray:
    """h1(E) (even) or h2(E) = odd_factor*h1(E) (odd), long double."""
    param = _as_param(param)
    E = np.atleast_1d(np.asarray(E, dtype=LD))
    if not np.all(E > 0):
        raise DomainError("characteristic needs E > 0")
    g, jm = _secular(param, param.factor(parity), E)
    if np.any(jm == 0):
        raise DomainError("E is a pole of the characteristic function")
    return g / jm + 1


def characteristic(param, parity: str, E):
    """The monotone characteristic function; eigenvalues are where it equals 1."""
    param = _as_param(param)
    E_arr = np.atleast_1d(np.asarray(E, dtype=LD))
    if not np.all(E_arr > 0):
        raise DomainError("characteristic needs E > 0")
    s = np.sqrt(E_arr)
    top = float(np.max(s))
    zeros = bessel_zeros(-param.nu, int(top / math.pi) + 3)
    near = np.min(np.abs(s[:, None] - zeros[None, :].astype(LD)), axis=1)
    # inputs are usually doubles, so poles are detected at double resolution
    if np.any(near <= 4 * np.finfo(float).eps * s):
        raise DomainError("E is a pole of the characteristic function")
    out = characteristic_ld(param, parity, E_arr).astype(float)
    return float(out[0]) if np.ndim(E) == 0 else out


def _zero_tables(param: SpectralParameter, top_index: int):
    m = top_index // 2 + 3
    return bessel_zeros(param.nu, m), bessel_zeros(-param.nu, m + 1)


def _bracket_from_tables(param, n, zp, zm):
    """(lo, hi) as long double squares of Bessel zeros; lo == hi for closed forms."""
    nu = param.nu
    if n % 2 == 0:
        m = n // 2
        return LD(zp[m - 1]) ** 2, LD(zm[m]) ** 2
    if nu < 0.5:
        m = (n - 1) // 2
        if m == 0:
            return LD(0), LD(zm[0]) ** 2
        return LD(zp[m - 1]) ** 2, LD(zm[m]) ** 2
    m = (n + 1) // 2
    if nu > 0.5:
        return LD(zm[m - 1]) ** 2, LD(zp[m - 1]) ** 2
    v = ((LD(m) - LD(0.5)) * PI_LD) ** 2
    return v, v


def eigenvalue_bracket(param, n: int) -> tuple[float, float]:
    """Open interval known to contain exactly lam_n (degenerate for nu=1/2, odd n)."""
    param = _as_param(param)
    if n < 1:
        raise DomainError("brackets are defined for n >= 1")
    zp, zm = _zero_tables(param, n)
    lo, hi = _bracket_from_tables(param, n, zp, zm)
    return float(lo), float(hi)


def _solve(param: SpectralParameter, indices: Sequence[int]):
    """Vectorised bisection for lam_n, n in indices (all >= 1)."""
    indices = np.asarray(indices, dtype=int)
    top = int(indices.max())
    zp, zm = _zero_tables(param, top)
    lo = np.empty(indices.size, dtype=LD)
    hi = np.empty(indices.size, dtype=LD)
    for i, n in enumerate(indices):
        lo[i], hi[i] = _bracket_from_tables(param, int(n), zp, zm)
    factor = np.array([param.factor(parity_of(int(n))) for n in indices], dtype=LD)
    bracket = (lo.copy(), hi.copy())
    closed = lo == hi
    active = ~closed
    root = np.where(closed, lo, LD(0))
    if np.any(active):
        a, b, f = lo[active], hi[active], factor[active]
        at_zero = a == 0
        ga = np.where(at_zero, LD(-1), _secular(param, f, np.where(at_zero, b, a))[0])
        gb = _secular(param, f, b)[0]
        sa, sb = np.sign(ga), np.sign(gb)
        if np.any(sa * sb >= 0):
            raise BracketError("no sign change of the secular function on a bracket")
        for _ in range(MAX_BISECTION):
            mid = (a + b) / 2
            gm = _secular(param, f, mid)[0]
            left = np.sign(gm) == sa
            hit = gm == 0
            a = np.where(left | hit, mid, a)
            b = np.where(left & ~hit, b, mid)
            if np.all((b - a) <= 2 * EPS_LD * b):
                break
        mid = (a + b) / 2
        root[active] = mid
    return root, bracket


def eigenvalues_ld(param, count: int) -> np.ndarray:
    """lam_0 .. lam_{count-1} in long double."""
    param = _as_param(param)
    out = np.zeros(count, dtype=LD)
    if count > 1:
        out[1:] = _solve(param, range(1, count))[0]
    return out


def eigenvalue(param, n: int) -> float:
    """lam_n; lam_0 = 0."""
    param = _as_param(param)
    if n < 0:
        raise DomainError("eigenvalue index must be >= 0")
    if n == 0:
        return 0.0
    return float(_solve(param, [n])[0][0])


@dataclass(frozen=True)
class EigenRecord:
    index: int
    parity: str
    bracket: tuple[float, float]
    lam: float
    lam_ld: np.longdouble
    coeff_nu_plus: float
    coeff_minus_nu_plus: float
    coeff_nu_minus: float
    coeff_minus_nu_minus: float
    norm_a: float
    residual: float

    @property
    def sqrt_lam(self) -> np.longdouble:
        return np.sqrt(self.lam_ld)


def eigenfunction_coeffs(param, n: int, lam) -> tuple[float, float, float, float]:
    """(a_nu^+, a_{-nu}^+, a_nu^-, a_{-nu}^-) for the index-n eigenfunction."""
    param = _as_param(param)
    if n < 1:
        raise DomainError("Bessel coefficients are defined for n >= 1")
    s = np.sqrt(LD(lam))
    K = LD(param.gamma_ratio) * np.power(s / 2, LD(-2 * param.nu))
    if n % 2 == 0:
        return float(-K), 1.0, float(-K), 1.0
    oK = LD(param.odd_factor) * K
    return float(-oK), 1.0, float(oK), -1.0


def normalization(param, n: int, lam, coeffs=None) -> float:
    """Closed-form L2 norm a_n of the unnormalised eigenfunction psi_n."""
    param = _as_param(param)
    nu = param.nu
    if n == 0:
        return math.sqrt(2 * (1 / (2 * nu + 2) + 1 / (2 - 2 * nu) - 1))
    lam = LD(lam)
    s = np.sqrt(lam)
    if coeffs is None:
        coeffs = eigenfunction_coeffs(param, n, lam)
    # psi = a_nu J_nu + a_-nu J_-nu on (0,1); a_-nu^+ = 1 in both parities
    kt = -LD(coeffs[0]) / LD(coeffs[1])
    jp, jm = bessel_j_ld(nu, s)[0], bessel_j_ld(-nu, s)[0]
    dp, dm = bessel_j_prime_ld(nu, s)[0], bessel_j_prime_ld(-nu, s)[0]
    w = 1 - LD(nu) ** 2 / lam
    sn = np.sin(LD(nu) * PI_LD)
    a2 = (
        w * jm * jm
        + dm * dm
        - 2 * kt * (w * jp * jm + dp * dm + 2 * LD(nu) * sn / (PI_LD * lam))
        + kt * kt * (w * jp * jp + dp * dp)
    )
    return float(np.sqrt(a2 * LD(coeffs[1]) ** 2))


class SpectralBasis:
    """Immutable list of eigen-records for n = 0 .. count-1."""

    def __init__(self, param, count: int, quad: QuadratureConfig | None = None):
        self.param = _as_param(param)
        if count < 1:
            raise DomainError("a basis needs at least one mode")
        self.count = int(count)
        self.quad = quad or QuadratureConfig(abs_tol=1e-11)
        nu = self.param.nu
        records = [
            EigenRecord(
                index=0,
                parity="even",
                bracket=(0.0, 0.0),
                lam=0.0,
                lam_ld=LD(0),
                coeff_nu_plus=math.nan,
                coeff_minus_nu_plus=math.nan,
                coeff_nu_minus=math.nan,
                coeff_minus_nu_minus=math.nan,
                norm_a=normalization(self.param, 0, 0.0),
                residual=0.0,
            )
        ]
        if count > 1:
            idx = list(range(1, count))
            roots, (blo, bhi) = _solve(self.param, idx)
            for k, n in enumerate(idx):
                lam = roots[k]
                par = parity_of(n)
                coeffs = eigenfunction_coeffs(self.param, n, lam)
                if self.param.is_half and par == "odd":
                    res = 0.0
                else:
                    res = float(abs(characteristic_ld(self.param, par, lam)[0] - 1))
                records.append(
                    EigenRecord(
                        index=n,
                        parity=par,
                        bracket=(float(blo[k]), float(bhi[k])),
                        lam=float(lam),
                        lam_ld=LD(lam),
                        coeff_nu_plus=coeffs[0],
                        coeff_minus_nu_plus=coeffs[1],
                        coeff_nu_minus=coeffs[2],
                        coeff_minus_nu_minus=coeffs[3],
                        norm_a=normalization(self.param, n, lam, coeffs),
                        residual=res,
                    )
                )
        self.records = tuple(records)
        self.lambdas = np.array([r.lam for r in records])
        self.lambdas_ld = np.array([r.lam_ld for r in records], dtype=LD)
        self._nu = nu

    def __len__(self):
        return self.count

    def __getitem__(self, n) -> EigenRecord:
        return self.records[n]

    def _check(self, n):
        if not 0 <= n < self.count:
            raise DomainError(f"mode {n} outside basis of size {self.count}")

    def psi(self, n: int, x) -> np.ndarray:
        """Unnormalised eigenfunction psi_n."""
        self._check(n)
        if np.any(np.abs(np.asarray(x, dtype=float)) < 1e-12):
            raise DomainError("eigenfunctions are not evaluated at |x| < 1e-12")
        return self._psi(n, x)

    def _psi(self, n, x):
        # no guard: quadrature nodes may come arbitrarily close to 0
        xa = np.asarray(x, dtype=float)
        ax = np.abs(xa).ravel()
        nu = self.param.nu
        if n == 0:
            out = ax ** (nu + 0.5) - ax ** (0.5 - nu)
            return out.reshape(xa.shape)
        rec = self.records[n]
        y = np.sqrt(rec.lam_ld) * ax.astype(LD)
        jp = bessel_j_ld(nu, y)
        jm = bessel_j_ld(-nu, y)
        pos = xa.ravel() > 0
        a_nu = np.where(pos, rec.coeff_nu_plus, rec.coeff_nu_minus).astype(LD)
        a_mnu = np.where(pos, rec.coeff_minus_nu_plus, rec.coeff_minus_nu_minus).astype(LD)
        out = np.sqrt(ax.astype(LD)) * (a_nu * jp + a_mnu * jm)
        return out.astype(float).reshape(xa.shape)

    def phi(self, n: int, x) -> np.ndarray:
        """Normalised eigenfunction phi_n = psi_n / a_n."""
        return self.psi(n, x) / self.records[n].norm_a

    def phi_matrix(self, modes: Sequence[int], x) -> np.ndarray:
        """Rows phi_n(x) for n in modes; x may approach 0 (quadrature use)."""
        xa = np.asarray(x, dtype=float).ravel()
        for n in modes:
            self._check(int(n))
        return np.stack([self._psi(int(n), xa) / self.records[int(n)].norm_a for n in modes])

    def dphi(self, n: int, x) -> np.ndarray:
        """Derivative of phi_n from the Bessel form."""
        self._check(n)
        xa = np.asarray(x, dtype=float)
        ax = np.abs(xa).ravel().astype(LD)
        if np.any(ax < 1e-12):
            raise DomainError("eigenfunctions are not evaluated at |x| < 1e-12")
        nu = LD(self.param.nu)
        sgn = np.sign(xa.ravel())
        rec = self.records[n]
        if n == 0:
            d = (nu + LD(0.5)) * ax ** (nu - LD(0.5)) - (LD(0.5) - nu) * ax ** (-nu - LD(0.5))
        else:
            s = np.sqrt(rec.lam_ld)
            y = s * ax
            pos = sgn > 0
            a_nu = np.where(pos, rec.coeff_nu_plus, rec.coeff_nu_minus).astype(LD)
            a_mnu = np.where(pos, rec.coeff_minus_nu_plus, rec.coeff_minus_nu_minus).astype(LD)
            parts = []
            for coef, order in ((a_nu, float(nu)), (a_mnu, -float(nu))):
                j = bessel_j_ld(order, y)
                dj = bessel_j_prime_ld(order, y)
                parts.append(coef * (j / (2 * np.sqrt(ax)) + np.sqrt(ax) * s * dj))
            d = parts[0] + parts[1]
        d = d * sgn.astype(LD)
        return (d / LD(rec.norm_a)).astype(float).reshape(xa.shape)

    def singular_coefficients(self, n: int) -> tuple[float, float, float, float]:
        """(c1-, c2-, c1+, c2+) of the |x|^{nu+1/2}, |x|^{-nu+1/2} profiles of psi_n."""
        self._check(n)
        if n == 0:
            return 1.0, -1.0, 1.0, -1.0
        rec = self.records[n]
        nu = self.param.nu
        h = np.sqrt(rec.lam_ld) / 2
        up = np.power(h, LD(nu)) / LD(math.gamma(nu + 1))
        dn = np.power(h, LD(-nu)) / LD(math.gamma(1 - nu))
        return (
            float(LD(rec.coeff_nu_minus) * up),
            float(LD(rec.coeff_minus_nu_minus) * dn),
            float(LD(rec.coeff_nu_plus) * up),
            float(LD(rec.coeff_minus_nu_plus) * dn),
        )

    def coefficient_residuals(self, n: int) -> float:
        """Max residual of the coefficient relations and Dirichlet conditions."""
        self._check(n)
        if n == 0:
            return 0.0
        rec = self.records[n]
        nu = self.param.nu
        s = np.sqrt(rec.lam_ld)
        D = LD(self.param.gamma_ratio) * np.power(s / 2, LD(-2 * nu)) / (1 + 2 * LD(nu))
        ap, amp = LD(rec.coeff_nu_plus), LD(rec.coeff_minus_nu_plus)
        am, amm = LD(rec.coeff_nu_minus), LD(rec.coeff_minus_nu_minus)
        jp, jm = bessel_j_ld(nu, s)[0], bessel_j_ld(-nu, s)[0]
        scale = max(abs(ap), abs(amp), 1)
        r = [
            (ap + D * (amp + 2 * LD(nu) * amm)) / scale,
            (am + D * (amm + 2 * LD(nu) * amp)) / scale,
            (ap * jp + amp * jm) / (scale * (abs(jm) + abs(jp))),
            (am * jp + amm * jm) / (scale * (abs(jm) + abs(jp))),
        ]
        return float(max(abs(v) for v in r))

    def ode_residual(self, n: int, grid) -> float:
        """max |-phi'' + c phi / x^2 - lam phi| / (1 + lam) by 5-point differences."""
        self._check(n)
        x = np.asarray(grid, dtype=float).ravel()
        if np.any(np.abs(x) < 0.05) or np.any(np.abs(x) >= 1):
            raise DomainError("grid must satisfy 0.05 <= |x| < 1")
        lam = self.records[n].lam
        s = math.sqrt(lam)
        h = 0.01 * np.abs(x) * min(1.0, 10.0 / max(s, 1e-300))
        h = np.minimum(h, (1 - np.abs(x)) / 2.5)
        f = lambda t: self.phi(n, t)  # noqa: E731
        f0 = f(x)
        d2 = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f0 + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)
        res = -d2 + self.param.c_nu * f0 / (x * x) - lam * f0
        return float(np.max(np.abs(res)) / (1 + lam))

    def norm_by_quadrature(self, n: int) -> float:
        val = integrate(lambda t: self._psi(n, t) ** 2, FULL, self.quad)
        return math.sqrt(val)

    def gram_matrix(self, upto: int) -> np.ndarray:
        """Gram matrix of phi_0 .. phi_{upto-1} over (-1, 1) by quadrature."""
        if not 1 <= upto <= self.count:
            raise DomainError("upto must lie in [1, count]")
        modes = range(upto)

        def products(t):
            P = self.phi_matrix(modes, t)
            return (P[:, None, :] * P[None, :, :]).reshape(upto * upto, -1)

        g = integrate(products, FULL, self.quad)
        return np.asarray(g).reshape(upto, upto)

    def masses(self, region, modes: Sequence[int]) -> np.ndarray:
        """int_region phi_n^2 for each n in modes."""
        region = as_region(region)
        modes = list(modes)
        val, _ = integrate_estimate(lambda t: self.phi_matrix(modes, t) ** 2, region, self.quad)
        return np.atleast_1d(np.asarray(val))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,parity,bracket_lo,bracket_hi,lambda,norm_a\n")
        for r in self.records:
            buf.write(
                f"{r.index},{r.parity},{r.bracket[0]:.17g},{r.bracket[1]:.17g},"
                f"{r.lam:.17g},{r.norm_a:.17g}\n"
            )
        return buf.getvalue()


@lru_cache(maxsize=32)
def build_basis(nu: float, count: int) -> SpectralBasis:
    """Cached basis construction (bases are immutable)."""
    return SpectralBasis(SpectralParameter(nu), count)


def eigenfunction_eval(basis: SpectralBasis, n: int, x):
    return basis.phi(n, x)


def gram_matrix(basis: SpectralBasis, upto: int) -> np.ndarray:
    return basis.gram_matrix(upto)


def ode_residual(basis: SpectralBasis, n: int, grid) -> float:
    return basis.ode_residual(n, grid)


def figure_rows(nus: Sequence[float], count: int):
    """(nu, n, lam_n, j_{nu,n}^2, j_{-nu,n}^2) for n = 1..count at each nu."""
    rows = []
    for nu in nus:
        p = SpectralParameter(nu)
        lam = eigenvalues_ld(p, count + 1)
        zp = bessel_zeros(p.nu, count)
        zm = bessel_zeros(-p.nu, count)
        for n in range(1, count + 1):
            rows.append((p.nu, n, float(lam[n]), zp[n - 1] ** 2, zm[n - 1] ** 2))
    return rows
