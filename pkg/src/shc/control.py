"""Moment-method null controls for the heat equation with the singular operator.

Internal control acts on a region omega; boundary control acts at x = 1.
Both are built from a biorthogonal family to a finite set of exponentials
e^{-lam_j t}, obtained by inverting the Gram matrix of that set.  The Gram
matrix is badly conditioned, so its inverse and every quantity that relies
on exact biorthogonality are computed with mpmath at ``MP_DPS`` digits.
Time integrals are closed forms; only spatial inner products use quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .errors import ConditioningError, DomainError
from .quadrature import FULL, IntervalUnion, as_region, integrate_estimate
from .spectrum import SpectralBasis, build_basis

MP_DPS = 50
MODE_CAP = 24
COND_CAP = 1e13


def _to_mpf(v) -> mp.mpf:
    # exact conversion of a long double via a double-double split
    ld = np.longdouble(v)
    hi = float(ld)
    lo = float(ld - np.longdouble(hi))
    return mp.mpf(hi) + mp.mpf(lo)


def _check_lambdas(lambdas):
    lam = [np.longdouble(v) for v in lambdas]
    if not lam:
        raise DomainError("need at least one exponent")
    if any(v < 0 for v in lam):
        raise DomainError("exponents must be >= 0")
    if len(set(float(v) for v in lam)) != len(lam) or len(set(lam)) != len(lam):
        raise DomainError("exponents must be distinct")
    return lam


def _gram_entry(s, T):
    if s == 0:
        return mp.mpf(T)
    return -mp.expm1(-s * T) / s


def exp_gram(lambdas: Sequence[float], T: float) -> np.ndarray:
    """G_jk = int_0^T e^{-(lam_j + lam_k) t} dt."""
    lam = np.asarray([float(v) for v in _check_lambdas(lambdas)])
    if not T > 0:
        raise DomainError("T must be positive")
    s = lam[:, None] + lam[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        G = np.where(s > 0, -np.expm1(-s * T) / s, T)
    return G


def _exp_gram_mp(lam_a, lam_b, T):
    T = mp.mpf(T)
    return mp.matrix([[_gram_entry(a + b, T) for b in lam_b] for a in lam_a])


@dataclass
class BiorthogonalFamily:
    """q_k(t) = sum_j Q_kj e^{-lam_j t}, with int_0^T q_k e^{-lam_j t} dt = delta_kj."""

    lambdas: np.ndarray
    horizon_T: float
    coefficient_matrix: np.ndarray
    gram_condition: float
    residual: float
    q_mp: mp.matrix = field(repr=False)
    lam_mp: list = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.lambdas)

    def moments(self, other_lambdas) -> mp.matrix:
        """M_kn = int_0^T q_k(t) e^{-mu_n t} dt for arbitrary exponents mu_n."""
        with mp.workdps(MP_DPS):
            mus = [_to_mpf(v) for v in other_lambdas]
            G = _exp_gram_mp(self.lam_mp, mus, self.horizon_T)
            return self.q_mp * G

    def q_norms(self) -> np.ndarray:
        """||q_k||_{L2(0,T)} = sqrt(Q_kk) since Q G Q = Q."""
        with mp.workdps(MP_DPS):
            return np.array([float(mp.sqrt(self.q_mp[k, k])) for k in range(self.size)])

    def growth_constant(self, eps: float | None = None) -> float:
        """max_k (log ||q_k|| - eps lam_k), eps = T/2 by default."""
        eps = self.horizon_T / 2 if eps is None else eps
        return float(np.max(np.log(self.q_norms()) - eps * self.lambdas))

    def __call__(self, k: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        E = np.exp(-np.multiply.outer(t, self.lambdas))
        return E @ self.coefficient_matrix[k]


def biorthogonal_family(lambdas: Sequence[float], T: float, cap: float = COND_CAP) -> BiorthogonalFamily:
    """Minimal-norm biorthogonal family in span{e^{-lam_j t}} on (0, T)."""
    lam = _check_lambdas(lambdas)
    if len(lam) > MODE_CAP:
        raise ConditioningError(f"at most {MODE_CAP} modes are supported, got {len(lam)}")
    if not T > 0:
        raise DomainError("T must be positive")
    with mp.workdps(MP_DPS):
        lam_mp = [_to_mpf(v) for v in lam]
        G = _exp_gram_mp(lam_mp, lam_mp, T)
        ev = mp.eigsy(G, eigvals_only=True)
        lo, hi = min(ev), max(ev)
        cond = float(hi / lo) if lo > 0 else math.inf
        if not cond <= cap:
            raise ConditioningError(
                f"Gram matrix condition {cond:.3g} exceeds {cap:.1g}; use fewer modes or a longer horizon"
            )
        Q = G**-1
        R = Q * G
        n = len(lam)
        res = max(abs(R[i, j] - (1 if i == j else 0)) for i in range(n) for j in range(n))
        Qf = np.array([[float(Q[i, j]) for j in range(n)] for i in range(n)])
    return BiorthogonalFamily(
        lambdas=np.array([float(v) for v in lam]),
        horizon_T=float(T),
        coefficient_matrix=Qf,
        gram_condition=cond,
        residual=float(res),
        q_mp=Q,
        lam_mp=lam_mp,
    )


@dataclass(frozen=True)
class ObservabilityReport:
    masses: tuple
    inf_mass: float
    measure_omega: float


def observability_mass(basis: SpectralBasis, region, n: int) -> float:
    """int_region phi_n^2."""
    return float(basis.masses(region, [n])[0])


def observability_report(basis: SpectralBasis, region, upto: int) -> ObservabilityReport:
    region = as_region(region)
    if not region.measure > 0:
        raise DomainError("region must have positive measure")
    m = basis.masses(region, range(upto))
    return ObservabilityReport(
        masses=tuple((n, float(v)) for n, v in enumerate(m)),
        inf_mass=float(m.min()),
        measure_omega=region.measure,
    )


@dataclass(frozen=True)
class ControlProblem:
    horizon_T: float
    region: IntervalUnion | None
    initial_modes: tuple
    mode_count: int

    def __post_init__(self):
        if not self.horizon_T > 0:
            raise DomainError("T must be positive")
        if self.mode_count < 1:
            raise DomainError("N must be >= 1")
        if self.region is not None and not self.region.measure > 0:
            raise DomainError("control region must have positive measure")

    @property
    def is_boundary(self) -> bool:
        return self.region is None

    def coefficient(self, n: int) -> float:
        return float(sum(c for k, c in self.initial_modes if k == n))

    @classmethod
    def from_dict(cls, d: dict) -> "ControlProblem":
        omega = d["omega"]
        region = None if omega == "boundary" else IntervalUnion(omega)
        modes = tuple((int(n), float(c)) for n, c in d.get("f0_modes", []))
        return cls(float(d["T"]), region, modes, int(d["N"]))


def _spatial_overlaps(basis, region, modes):
    """O_kl = int_region phi_k phi_l for k, l in modes."""
    modes = list(modes)
    m = len(modes)

    def prods(t):
        P = basis.phi_matrix(modes, t)
        return (P[:, None, :] * P[None, :, :]).reshape(m * m, -1)

    val, _ = integrate_estimate(prods, region, basis.quad)
    return np.asarray(val).reshape(m, m)


def _cross_overlaps(basis, region, rows, cols):
    rows, cols = list(rows), list(cols)
    allm = sorted(set(rows) | set(cols))
    pos = {n: i for i, n in enumerate(allm)}
    O = _spatial_overlaps(basis, region, allm)
    return O[np.ix_([pos[r] for r in rows], [pos[c] for c in cols])]


@dataclass
class InternalControl:
    """u(t,x) = sum_k u_k q_k(T-t) 1_omega phi_k(x) / m_k."""

    basis: SpectralBasis
    problem: ControlProblem
    family: BiorthogonalFamily
    amplitudes: list  # u_k as mpf
    masses: np.ndarray
    overlaps: np.ndarray

    def __call__(self, t, x) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        N = self.problem.mode_count
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.problem.region.intervals:
            inside |= (x > a) & (x < b)
        P = np.zeros((N, x.size))
        if np.any(inside):
            P[:, inside] = self.basis.phi_matrix(range(N), x[inside])
        amp = np.array([float(a) for a in self.amplitudes])
        Qt = np.stack([self.family(k, self.problem.horizon_T - t) for k in range(N)])
        return np.einsum("k,kt,kx->tx", amp / self.masses, Qt, P)

    def l2_norm(self) -> float:
        """||u||_{L2((0,T) x (-1,1))} via Q and the spatial overlap matrix."""
        N = self.problem.mode_count
        with mp.workdps(MP_DPS):
            tot = mp.mpf(0)
            for k in range(N):
                for l in range(N):
                    tot += (
                        self.amplitudes[k]
                        * self.amplitudes[l]
                        * self.family.q_mp[k, l]
                        * mp.mpf(self.overlaps[k, l] / (self.masses[k] * self.masses[l]))
                    )
            return float(mp.sqrt(max(tot, mp.mpf(0))))


def synthesize_internal_control(basis: SpectralBasis, problem: ControlProblem) -> InternalControl:
    if problem.is_boundary:
        raise DomainError("problem is a boundary problem")
    N = problem.mode_count
    if N > basis.count:
        raise DomainError("basis has fewer than N modes")
    fam = biorthogonal_family(basis.lambdas_ld[:N], problem.horizon_T)
    O = _spatial_overlaps(basis, problem.region, range(N))
    masses = np.diag(O).copy()
    if np.any(masses <= 0):
        raise DomainError("a targeted mode has zero observability mass")
    with mp.workdps(MP_DPS):
        T = mp.mpf(problem.horizon_T)
        amps = [-mp.mpf(problem.coefficient(k)) * mp.exp(-fam.lam_mp[k] * T) for k in range(N)]
    return InternalControl(basis, problem, fam, amps, masses, O)


def simulate_final_modes(basis: SpectralBasis, problem: ControlProblem, control=None, horizon: int | None = None):
    """[(n, <f(T), phi_n>)] for n < horizon; exact in time."""
    N = problem.mode_count
    M = max(N, horizon or 2 * N)
    M = min(M, basis.count)
    if control is not None and isinstance(control, BoundaryControl):
        return control.final_modes(M)
    with mp.workdps(MP_DPS):
        T = mp.mpf(problem.horizon_T)
        lam = [_to_mpf(v) for v in basis.lambdas_ld[:M]]
        out = [mp.mpf(problem.coefficient(n)) * mp.exp(-lam[n] * T) for n in range(M)]
        if control is not None:
            mom = control.family.moments(basis.lambdas_ld[:M])
            S = _cross_overlaps(basis, problem.region, range(N), range(M))
            for n in range(M):
                for k in range(N):
                    if control.amplitudes[k] == 0:
                        continue
                    s_kn = S[k, n] / control.masses[k] if k != n else mp.mpf(1)
                    out[n] += control.amplitudes[k] * mom[k, n] * s_kn
        return [(n, float(v)) for n, v in enumerate(out)]


# boundary control at x = 1


def boundary_derivative(basis: SpectralBasis, n: int, check: bool = True) -> float:
    """phi_n'(1) from the Bessel form, cross-checked by a one-sided difference."""
    d = float(basis.dphi(n, np.array([1.0]))[0])
    if check:
        fd = boundary_derivative_fd(basis, n)
        if not abs(fd - d) <= 1e-5 * abs(d):
            from .errors import ContractError

            raise ContractError(f"phi_{n}'(1): analytic {d!r} vs difference {fd!r}")
    return d


def boundary_derivative_fd(basis: SpectralBasis, n: int) -> float:
    h = 1e-3 / (1 + math.sqrt(basis.lambdas[n]))
    x = np.array([1.0, 1.0 - h, 1.0 - 2 * h, 1.0 - 3 * h])
    f = basis.phi(n, x)
    # third-order backward difference
    return float((11 * f[0] - 18 * f[1] + 9 * f[2] - 2 * f[3]) / (6 * h))


@dataclass(frozen=True)
class BoundaryCoefficients:
    derivs: tuple
    b: tuple

    @property
    def b_min(self) -> float:
        return min(abs(v) for _, v in self.b)

    @property
    def b_max(self) -> float:
        return max(abs(v) for _, v in self.b)


def boundary_coefficients(basis: SpectralBasis, upto: int) -> BoundaryCoefficients:
    """b_n = -phi_n'(1)/sqrt(1 + lam_n) for n < upto."""
    if not 1 <= upto <= basis.count:
        raise DomainError("upto must lie in [1, count]")
    derivs, bs = [], []
    for n in range(upto):
        d = boundary_derivative(basis, n)
        derivs.append((n, d))
        bs.append((n, -d / math.sqrt(1 + basis.lambdas[n])))
    return BoundaryCoefficients(tuple(derivs), tuple(bs))


@dataclass
class BoundaryControl:
    """u(t) = -sum_k y_k(0) e^{-mu_k T} q_k(T-t) / b_k with mu_k = lam_k + 1.

    y_k = <f, phi_k>/sqrt(1+lam_k) are the weighted modes of the shifted
    system y' = -mu y + b u.  A control of the unshifted system is e^t u(t).
    """

    basis: SpectralBasis
    problem: ControlProblem
    family: BiorthogonalFamily
    b: np.ndarray
    amplitudes: list

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        amp = np.array([float(a) for a in self.amplitudes])
        Qt = np.stack([self.family(k, self.problem.horizon_T - t) for k in range(len(amp))])
        return amp @ Qt

    def unshifted(self, t) -> np.ndarray:
        return np.exp(np.asarray(t, dtype=float)) * self(t)

    def l2_norm(self) -> float:
        n = len(self.amplitudes)
        with mp.workdps(MP_DPS):
            tot = sum(
                self.amplitudes[k] * self.amplitudes[l] * self.family.q_mp[k, l]
                for k in range(n)
                for l in range(n)
            )
            return float(mp.sqrt(max(tot, mp.mpf(0))))

    def final_modes(self, M: int):
        """[(n, y_n(T))] for the weighted shifted modes, n < M."""
        basis = self.basis
        N = self.problem.mode_count
        M = min(max(M, N), basis.count)
        bc = boundary_coefficients(basis, M)
        b_all = [v for _, v in bc.b]
        with mp.workdps(MP_DPS):
            T = mp.mpf(self.problem.horizon_T)
            mus = [_to_mpf(v) + 1 for v in basis.lambdas_ld[:M]]
            mom = self.family.moments([np.longdouble(v) + 1 for v in basis.lambdas_ld[:M]])
            out = []
            for n in range(M):
                y0 = mp.mpf(self.problem.coefficient(n)) / mp.sqrt(1 + _to_mpf(basis.lambdas_ld[n]))
                v = y0 * mp.exp(-mus[n] * T)
                v += mp.mpf(b_all[n]) * sum(self.amplitudes[k] * mom[k, n] for k in range(N))
                out.append((n, float(v)))
            return out


def synthesize_boundary_control(basis: SpectralBasis, problem: ControlProblem) -> BoundaryControl:
    if not problem.is_boundary:
        raise DomainError("problem is an internal problem")
    N = problem.mode_count
    if N > basis.count:
        raise DomainError("basis has fewer than N modes")
    fam = biorthogonal_family([np.longdouble(v) + 1 for v in basis.lambdas_ld[:N]], problem.horizon_T)
    bc = boundary_coefficients(basis, N)
    b = np.array([v for _, v in bc.b])
    if np.any(b == 0):
        raise DomainError("zero boundary coefficient")
    with mp.workdps(MP_DPS):
        T = mp.mpf(problem.horizon_T)
        amps = []
        for k in range(N):
            lam = _to_mpf(basis.lambdas_ld[k])
            y0 = mp.mpf(problem.coefficient(k)) / mp.sqrt(1 + lam)
            amps.append(-y0 * mp.exp(-(lam + 1) * T) / mp.mpf(b[k]))
    return BoundaryControl(basis, problem, fam, b, amps)


def certificate(nu: float, problem: ControlProblem, horizon: int | None = None) -> dict:
    """Synthesize, simulate and summarize one control problem."""
    N = problem.mode_count
    M = max(horizon or 2 * N, N)
    basis = build_basis(nu, M)
    if problem.is_boundary:
        ctl = synthesize_boundary_control(basis, problem)
        final = ctl.final_modes(M)
        extra = {"weighting": "shifted modes <f,phi_n>/sqrt(1+lambda_n)", "gauge": "unshifted control is exp(t)*u(t)"}
    else:
        ctl = synthesize_internal_control(basis, problem)
        final = simulate_final_modes(basis, problem, ctl, M)
        extra = {"omega": problem.region.to_list()}
    targeted = [abs(v) for n, v in final if n < N]
    norm = ctl.l2_norm()
    return {
        "nu": basis.param.nu,
        "T": problem.horizon_T,
        "N": N,
        **extra,
        "final_modes": [[n, v] for n, v in final],
        "max_targeted_mode": max(targeted),
        "control_norm": norm,
        "gram_condition": ctl.family.gram_condition,
        "biorth_residual": ctl.family.residual,
        "ok": bool(max(targeted) < 1e-8 and ctl.family.residual < 1e-8 and math.isfinite(norm)),
    }


def certificate_json(cert: dict) -> str:
    return json.dumps(cert, indent=2, sort_keys=True, default=repr)


__all__ = [
    "BiorthogonalFamily",
    "BoundaryCoefficients",
    "BoundaryControl",
    "ControlProblem",
    "FULL",
    "InternalControl",
    "ObservabilityReport",
    "biorthogonal_family",
    "boundary_coefficients",
    "boundary_derivative",
    "certificate",
    "exp_gram",
    "observability_mass",
    "observability_report",
    "simulate_final_modes",
    "synthesize_boundary_control",
    "synthesize_internal_control",
]
