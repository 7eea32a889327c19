"""Large-n behaviour of the spectrum.

Pair index n >= 1 labels the even eigenvalue lam_{2(n-1)} and the odd
eigenvalue lam_{2(n-1)+1}.  Their square roots behave like

    pi (n - nu/2 - 1/4) - factor * gamma_ratio * sin(nu pi) (2/(pi n))^{2 nu}
                        [ - (4 nu^2 - 1) / (8 pi n)   when nu >= 1/2 ]

with factor = 1 (even) or odd_factor (odd).  The condensation term measures
how strongly the spectrum clusters at a given eigenvalue.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .spectrum import SpectralParameter, _as_param, eigenvalues_ld


@dataclass(frozen=True)
class AsymptoticPrediction:
    n: int
    parity: str
    leading: float
    correction: float

    @property
    def predicted_sqrt_lambda(self) -> float:
        return self.leading + self.correction


@dataclass(frozen=True)
class CondensationDiagnostics:
    n: int
    truncation: int
    term: float


def global_index(n: int, parity: str) -> int:
    """Global eigenvalue index of pair index n."""
    return 2 * (n - 1) + (0 if parity == "even" else 1)


def predicted_sqrt_eigenvalue(param, n: int, parity: str) -> AsymptoticPrediction:
    param = _as_param(param)
    if n < 1:
        raise DomainError("pair index starts at 1")
    if parity not in ("even", "odd"):
        raise DomainError("parity must be 'even' or 'odd'")
    nu = param.nu
    leading = math.pi * (n - nu / 2 - 0.25)
    corr = -param.factor(parity) * param.gamma_ratio * math.sin(nu * math.pi) * (
        2 / (math.pi * n)
    ) ** (2 * nu)
    if nu >= 0.5:
        corr -= (4 * nu * nu - 1) / (8 * math.pi * n)
    return AsymptoticPrediction(n, parity, leading, corr)


def gap_prediction(param, n: int) -> float:
    """Predicted lam_{2(n-1)+1} - lam_{2(n-1)}."""
    param = _as_param(param)
    if n < 1:
        raise DomainError("pair index starts at 1")
    nu = param.nu
    return (
        16 * nu / (1 + 2 * nu)
        * param.gamma_ratio
        * math.sin(nu * math.pi)
        * (2 / (math.pi * n)) ** (2 * nu - 1)
    )


def computed_sqrt_pairs(param, pairs: int):
    """(even, odd) arrays of sqrt(lam) for pair indices 1..pairs."""
    lam = eigenvalues_ld(_as_param(param), 2 * pairs)
    s = np.sqrt(lam)
    return s[0::2].astype(float), s[1::2].astype(float)


def computed_gaps(param, pairs: int) -> np.ndarray:
    lam = eigenvalues_ld(_as_param(param), 2 * pairs)
    return (lam[1::2] - lam[0::2]).astype(float)


def residuals(param, parity: str, n_values: Sequence[int]) -> np.ndarray:
    """|sqrt(lam) - prediction| at the given pair indices."""
    param = _as_param(param)
    n_values = np.asarray(n_values, dtype=int)
    lam = eigenvalues_ld(param, global_index(int(n_values.max()), "odd") + 1)
    out = []
    for n in n_values:
        p = predicted_sqrt_eigenvalue(param, int(n), parity)
        # subtract leading first, in long double, to keep the small remainder
        s = np.sqrt(lam[global_index(int(n), parity)])
        out.append(float(abs(s - np.longdouble(p.leading) - np.longdouble(p.correction))))
    return np.array(out)


def loglog_slope(n_values, values) -> float:
    """Least-squares slope of log(values) against log(n)."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def expected_remainder_exponent(param) -> float:
    nu = _as_param(param).nu
    return -min(1.0, 4 * nu) if nu < 0.5 else -2.0


def _tail_sum_inv4(M: int) -> float:
    # Euler-Maclaurin for sum_{j > M} j^{-4}
    return 1 / (3 * M**3) - 1 / (2 * M**4) + 1 / (3 * M**5)


def condensation_term(lambdas: Sequence[float], n: int, truncation: int) -> float:
    """-(1/lam_n) [ln(2/lam_n) + sum_{j != n, j <= truncation} ln|1 - lam_n^2/lam_j^2|].

    ``lambdas[j-1]`` is lam_j for j >= 1 (positive, increasing); n is 1-based.
    Terms beyond the truncation use lam_j ~ lam_M (j/M)^2 and ln|1-x| ~ -x.
    """
    lam = np.asarray(lambdas, dtype=np.longdouble)
    if n < 1:
        raise DomainError("n starts at 1")
    if truncation < 2 * n:
        raise DomainError("truncation must be at least 2n")
    if lam.size < truncation:
        raise DomainError("need at least `truncation` eigenvalues")
    lam = lam[:truncation]
    if not np.all(lam > 0) or not np.all(np.diff(lam) > 0):
        raise DomainError("lambdas must be positive and increasing")
    ln = lam[n - 1]
    ratio = np.delete(ln * ln / (lam * lam), n - 1)
    total = np.log(2 / ln) + np.sum(np.log(np.abs(1 - ratio)))
    M = truncation
    total -= ln * ln * np.longdouble(M) ** 4 / lam[-1] ** 2 * np.longdouble(_tail_sum_inv4(M))
    return float(-total / ln)


def condensation_profile(param, n_values: Sequence[int], factor: int = 10):
    """CondensationDiagnostics at each n, truncation = factor * n."""
    param = _as_param(param)
    if factor < 2:
        raise DomainError("factor must be >= 2")
    top = factor * int(max(n_values))
    lam = eigenvalues_ld(param, top + 1)[1:]
    return [CondensationDiagnostics(int(n), factor * int(n), condensation_term(lam, int(n), factor * int(n))) for n in n_values]


def running_limsup(terms: Sequence[float]) -> float:
    """max over the tail window [len/2, len] as a finite proxy for limsup."""
    terms = list(terms)
    return max(terms[len(terms) // 2 :])


def asymptotics_csv(param, parity: str, pairs: int) -> str:
    param = _as_param(param)
    lam = eigenvalues_ld(param, 2 * pairs)
    buf = io.StringIO()
    buf.write("n,computed,predicted,residual\n")
    for n in range(1, pairs + 1):
        s = np.sqrt(lam[global_index(n, parity)])
        p = predicted_sqrt_eigenvalue(param, n, parity)
        r = float(s - np.longdouble(p.leading) - np.longdouble(p.correction))
        buf.write(f"{n},{float(s):.17g},{p.predicted_sqrt_lambda:.17g},{r:.17g}\n")
    return buf.getvalue()


__all__ = [
    "AsymptoticPrediction",
    "CondensationDiagnostics",
    "SpectralParameter",
    "asymptotics_csv",
    "computed_gaps",
    "computed_sqrt_pairs",
    "condensation_profile",
    "condensation_term",
    "expected_remainder_exponent",
    "gap_prediction",
    "global_index",
    "loglog_slope",
    "predicted_sqrt_eigenvalue",
    "residuals",
    "running_limsup",
]
