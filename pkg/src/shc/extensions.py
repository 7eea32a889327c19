"""Self-adjoint extensions with Dirichlet conditions at +-1, and the c < -1/4 blow-up.

Near 0 a function of the maximal domain behaves like
c1 |x|^{nu+1/2} + c2 |x|^{-nu+1/2} on each side.  With

    alpha = c1 + c2,    beta = (nu + 1/2) c1 + (1/2 - nu) c2,

every extension is a pair (M2, M3) of 2x2 matrices acting as

    M2 (alpha-, -beta-) + M3 (alpha+, beta+) = 0,

valid iff rank [M2 M3] = 2 and det M2 = det M3.  Invertible pairs reduce to
one matrix M = M2^{-1} M3 with det M = 1 (coupled); rank-one pairs split
into one relation per side (decoupled).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .quadrature import IntervalUnion, QuadratureConfig, integrate_estimate
from .spectrum import SpectralBasis, _as_param

E_SYMPLECTIC = np.array([[0.0, -1.0], [1.0, 0.0]])
RANK_TOL = 1e-10
MEMBER_TOL = 1e-10


@dataclass(frozen=True)
class SingularCoefficients:
    c1_minus: float
    c2_minus: float
    c1_plus: float
    c2_plus: float


@dataclass(frozen=True)
class BoundaryCoefficientsAB:
    alpha_plus: float
    alpha_minus: float
    beta_plus: float
    beta_minus: float


def coeffs_to_alphabeta(param, c: SingularCoefficients) -> BoundaryCoefficientsAB:
    nu = _as_param(param).nu
    a = lambda c1, c2: c1 + c2  # noqa: E731
    b = lambda c1, c2: (nu + 0.5) * c1 + (0.5 - nu) * c2  # noqa: E731
    return BoundaryCoefficientsAB(
        alpha_plus=a(c.c1_plus, c.c2_plus),
        alpha_minus=a(c.c1_minus, c.c2_minus),
        beta_plus=b(c.c1_plus, c.c2_plus),
        beta_minus=b(c.c1_minus, c.c2_minus),
    )


def alphabeta_to_coeffs(param, ab: BoundaryCoefficientsAB) -> SingularCoefficients:
    """Inverse of coeffs_to_alphabeta (the map has determinant -2nu)."""
    nu = _as_param(param).nu

    def side(alpha, beta):
        c1 = (beta - (0.5 - nu) * alpha) / (2 * nu)
        return c1, alpha - c1

    c1m, c2m = side(ab.alpha_minus, ab.beta_minus)
    c1p, c2p = side(ab.alpha_plus, ab.beta_plus)
    return SingularCoefficients(c1m, c2m, c1p, c2p)


def _rank(A, tol=RANK_TOL) -> int:
    A = np.asarray(A, dtype=float)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def symplectic_residual(n1, n2, n3, n4) -> float:
    E = E_SYMPLECTIC
    N = [np.asarray(m, dtype=float) for m in (n1, n2, n3, n4)]
    R = N[0] @ E @ N[0].T - N[1] @ E @ N[1].T + N[2] @ E @ N[2].T - N[3] @ E @ N[3].T
    return float(np.max(np.abs(R)))


def check_quadruple(n1, n2, n3, n4) -> bool:
    """True iff (N1 N2 N3 N4) has rank 4 and the symplectic identity holds."""
    N = [np.asarray(m, dtype=float) for m in (n1, n2, n3, n4)]
    if any(m.shape != (4, 2) for m in N):
        raise DomainError("each N_i must be 4x2")
    if _rank(np.hstack(N)) != 4:
        return False
    scale = max(1.0, max(float(np.max(np.abs(m))) for m in N) ** 2)
    return symplectic_residual(*N) <= 1e-12 * scale


def dirichlet_quadruple(m2, m3):
    """(N1, N2, N3, N4) of the pair (M2, M3) completed by Dirichlet rows at -1 and 1."""
    m2 = np.asarray(m2, dtype=float)
    m3 = np.asarray(m3, dtype=float)
    z = np.zeros((2, 2))
    d = np.array([[1.0, 0.0], [0.0, 0.0]])
    n1 = np.vstack([z, d])
    n2 = np.vstack([m2, z])
    n3 = np.vstack([m3, z])
    n4 = np.vstack([z, d[::-1]])
    return n1, n2, n3, n4


@dataclass(frozen=True)
class ExtensionSpec:
    m2: np.ndarray
    m3: np.ndarray
    classification: str  # "coupled" | "decoupled" | "invalid"
    M: np.ndarray | None = None
    l_minus: np.ndarray | None = None
    l_plus: np.ndarray | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        out = {"class": self.classification}
        if self.M is not None:
            out["M"] = self.M.tolist()
        if self.l_minus is not None:
            out["l_minus"] = self.l_minus.tolist()
            out["l_plus"] = self.l_plus.tolist()
        if self.reason:
            out["reason"] = self.reason
        return out


def _largest_row(A):
    i = int(np.argmax(np.max(np.abs(A), axis=1)))
    return A[i].copy()


def classify_extension(m2, m3) -> ExtensionSpec:
    m2 = np.asarray(m2, dtype=float)
    m3 = np.asarray(m3, dtype=float)
    if m2.shape != (2, 2) or m3.shape != (2, 2):
        raise DomainError("M2 and M3 must be 2x2")
    if _rank(np.hstack([m2, m3])) != 2:
        return ExtensionSpec(m2, m3, "invalid", reason="rank [M2 M3] < 2")
    d2, d3 = np.linalg.det(m2), np.linalg.det(m3)
    n2 = np.linalg.norm(m2, 2)
    n3 = np.linalg.norm(m3, 2)
    zero2 = _rank(m2) < 2
    zero3 = _rank(m3) < 2
    if zero2 and zero3:
        # M2 (alpha-, -beta-): flip the second entry to act on (alpha-, beta-)
        l_minus = _largest_row(m2) * np.array([1.0, -1.0])
        l_plus = _largest_row(m3)
        return ExtensionSpec(m2, m3, "decoupled", l_minus=l_minus, l_plus=l_plus)
    if zero2 or zero3 or abs(d2 - d3) > RANK_TOL * max(n2 * n2, n3 * n3):
        return ExtensionSpec(m2, m3, "invalid", reason="det M2 != det M3")
    M = np.linalg.solve(m2, m3)
    M = M / math.sqrt(abs(np.linalg.det(M)))
    return ExtensionSpec(m2, m3, "coupled", M=M)


def transmission_residual(spec: ExtensionSpec, ab: BoundaryCoefficientsAB) -> float:
    """Max-norm of the violated transmission relations."""
    vm = np.array([ab.alpha_minus, ab.beta_minus])
    vp = np.array([ab.alpha_plus, ab.beta_plus])
    if spec.classification == "coupled":
        r = np.array([vm[0], -vm[1]]) + spec.M @ vp
    elif spec.classification == "decoupled":
        r = np.array([spec.l_minus @ vm, spec.l_plus @ vp])
    else:
        raise DomainError("transmission residual needs a valid extension")
    return float(np.max(np.abs(r)))


def is_member(spec: ExtensionSpec, ab: BoundaryCoefficientsAB, tol: float = MEMBER_TOL) -> bool:
    return transmission_residual(spec, ab) <= tol


def boundary_quadratic_term(ab: BoundaryCoefficientsAB) -> float:
    """The point contribution -alpha+ beta+ - alpha- beta- to <Af, f>."""
    return -ab.alpha_plus * ab.beta_plus - ab.alpha_minus * ab.beta_minus


def sample_constrained(spec: ExtensionSpec, rng: np.random.Generator) -> BoundaryCoefficientsAB:
    """Random boundary vector satisfying a coupled transmission condition."""
    if spec.classification != "coupled":
        raise DomainError("sampling is implemented for coupled extensions")
    vp = rng.standard_normal(2)
    w = -spec.M @ vp
    return BoundaryCoefficientsAB(alpha_plus=vp[0], alpha_minus=w[0], beta_plus=vp[1], beta_minus=-w[1])


def eigenfunction_alphabeta(basis: SpectralBasis, n: int) -> BoundaryCoefficientsAB:
    """(alpha, beta) of the normalised eigenfunction phi_n."""
    c = basis.singular_coefficients(n)
    a = basis[n].norm_a
    return coeffs_to_alphabeta(basis.param, SingularCoefficients(*(v / a for v in c)))


def continuity_values(ab: BoundaryCoefficientsAB, param) -> dict:
    """f(0-), f(0+), f'(0-), f'(0+) of the singular part; meaningful at nu = 1/2."""
    if _as_param(param).nu != 0.5:
        raise DomainError("point values of the singular part need nu = 1/2")
    c = alphabeta_to_coeffs(param, ab)
    return {
        "f(0-)": c.c2_minus,
        "f(0+)": c.c2_plus,
        "f'(0-)": -c.c1_minus,
        "f'(0+)": c.c1_plus,
    }


# blow-up of the quadratic form for c < -1/4


@dataclass(frozen=True)
class IllposednessProfile:
    c: float
    eps: float
    int_f2: float
    int_f2_over_x2: float
    int_fprime2: float
    form_value: float
    rayleigh_quotient: float
    quadrature: tuple | None
    quadrature_error: float | None


def _closed_forms(eps):
    a = 0.5 + eps
    b = 1.5 + eps
    i_f2 = 1 / (4 * eps**3 + 18 * eps**2 + 26 * eps + 12)
    i_fx2 = 1 / (2 * eps) - 2 / (2 * eps + 1) + 1 / (2 * eps + 2)
    i_fp2 = a * a / (2 * eps) - 2 * a * b / (2 * eps + 1) + b * b / (2 * eps + 2)
    return i_f2, i_fx2, i_fp2


def _quadrature_forms(eps):
    a = 0.5 + eps
    b = 1.5 + eps

    def f(x):
        f_ = x ** (0.5 + eps) * (1 - x)
        fp = a * x ** (eps - 0.5) - b * x ** (eps + 0.5)
        return np.stack([f_ * f_, x ** (2 * eps - 1) * (1 - x) ** 2, fp * fp])

    cfg = QuadratureConfig(abs_tol=1e-12, grading_depth=60, max_levels=60)
    val, _ = integrate_estimate(f, IntervalUnion([(0.0, 1.0)]), cfg)
    return tuple(float(v) for v in val)


def illposedness_profile(c: float, eps: float, quadrature: bool = True) -> IllposednessProfile:
    """Integrals of f = x^{1/2+eps}(1-x) on (0,1) and the form -int f'^2 - c int f^2/x^2."""
    if not c < -0.25 and not -0.25 < c < 0:
        raise DomainError("c must be < -1/4 (or in (-1/4, 0) for comparison)")
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    i_f2, i_fx2, i_fp2 = _closed_forms(eps)
    form = -i_fp2 - c * i_fx2
    q = err = None
    if quadrature:
        q = _quadrature_forms(eps)
        err = max(abs(u - v) / abs(v) for u, v in zip(q, (i_f2, i_fx2, i_fp2)))
    return IllposednessProfile(c, eps, i_f2, i_fx2, i_fp2, form, form / i_f2, q, err)


def leading_blowup(c: float) -> float:
    """lim eps * (-int f'^2 - c int f^2/x^2) as eps -> 0."""
    return -0.125 - c / 2


def classify_json(text: str) -> str:
    d = json.loads(text)
    spec = classify_extension(d["M2"], d["M3"])
    return json.dumps(spec.to_dict(), sort_keys=True)


__all__ = [
    "BoundaryCoefficientsAB",
    "E_SYMPLECTIC",
    "ExtensionSpec",
    "IllposednessProfile",
    "SingularCoefficients",
    "alphabeta_to_coeffs",
    "boundary_quadratic_term",
    "check_quadruple",
    "classify_extension",
    "classify_json",
    "coeffs_to_alphabeta",
    "continuity_values",
    "dirichlet_quadruple",
    "eigenfunction_alphabeta",
    "illposedness_profile",
    "is_member",
    "leading_blowup",
    "sample_constrained",
    "symplectic_residual",
    "transmission_residual",
]
