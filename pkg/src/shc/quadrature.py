"""Adaptive Gauss-Legendre integration on unions of subintervals of (-1, 1).

Integrands may blow up at 0 like |x|^{-s} with s < 1.  Intervals touching 0
are cut into panels graded geometrically toward 0; the mass of the innermost
remainder [0, h r^D] is added by summing the geometric tail implied by the
ratio of the two innermost panels, which is exact for a pure power law.
Every panel is then bisected adaptively until its two halves agree with it.

The integrand is called on 1-D arrays of nodes and may return either an
array of the same length or an array of shape (..., len(x)); in the latter
case all components are integrated at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, ToleranceError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    gauss_order: int = 16
    grading_ratio: float = 0.5
    grading_depth: int = 40
    abs_tol: float = 1e-12
    max_levels: int = 50

    def __post_init__(self):
        if self.gauss_order < 10:
            raise DomainError("gauss_order must be >= 10")
        if not 0 < self.grading_ratio < 1:
            raise DomainError("grading_ratio must lie in (0, 1)")
        if self.grading_depth < 20:
            raise DomainError("grading_depth must be >= 20")
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")


DEFAULT_CONFIG = QuadratureConfig()


class IntervalUnion:
    """Finite union of disjoint open intervals inside [-1, 1], split at 0."""

    def __init__(self, intervals: Iterable[Sequence[float]]):
        pieces = []
        for lo, hi in intervals:
            lo, hi = float(lo), float(hi)
            if not (-1 <= lo < hi <= 1):
                raise DomainError(f"bad interval ({lo}, {hi})")
            if lo < 0 < hi:
                pieces += [(lo, 0.0), (0.0, hi)]
            else:
                pieces.append((lo, hi))
        pieces.sort()
        for (a0, b0), (a1, b1) in zip(pieces, pieces[1:]):
            if a1 < b0:
                raise DomainError("intervals overlap")
        if not pieces:
            raise DomainError("empty interval union")
        self.intervals = tuple(pieces)

    @property
    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def is_symmetric(self, tol: float = 1e-14) -> bool:
        mirrored = sorted((-b, -a) for a, b in self.intervals)
        return all(
            abs(a - c) <= tol and abs(b - d) <= tol
            for (a, b), (c, d) in zip(self.intervals, mirrored)
        )

    def to_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]

    def __repr__(self):
        return f"IntervalUnion({list(self.intervals)})"


FULL = IntervalUnion([(-1.0, 1.0)])


def as_region(region) -> IntervalUnion:
    if isinstance(region, IntervalUnion):
        return region
    return IntervalUnion(region)


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_panel(f: Callable, a: float, b: float, order: int = 16):
    """Single Gauss-Legendre panel on [a, b]."""
    x, w = gauss_legendre(order)
    half = (b - a) / 2
    vals = np.asarray(f((a + b) / 2 + half * x), dtype=float)
    return (vals * w).sum(axis=-1) * half


def _panels(f, a, b, order):
    """Integrals of f over the panels [a_i, b_i] (vectorised)."""
    xg, wg = gauss_legendre(order)
    half = (b - a) / 2
    nodes = ((a + b) / 2)[:, None] + half[:, None] * xg[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float)
    vals = vals.reshape(vals.shape[:-1] + nodes.shape)
    return (vals * wg).sum(axis=-1) * half


def _component_max(v):
    v = np.abs(v)
    return v.reshape(-1, v.shape[-1]).max(axis=0)


def _graded(lo, hi, cfg):
    """Panels for an interval with one endpoint at 0, plus the tail panel."""
    r = cfg.grading_ratio
    length = hi - lo
    k = np.arange(cfg.grading_depth + 1)
    if lo == 0.0:
        pts = hi * r**k
        a, b = pts[1:], pts[:-1]
    else:
        pts = lo * r**k
        a, b = pts[:-1], pts[1:]
    return a, b, length


def _tail(f, a, b, cfg):
    """Geometric extrapolation of the remainder next to 0."""
    inner = _panels(f, a[-3:], b[-3:], cfg.gauss_order)
    i0, i1, i2 = inner[..., 0], inner[..., 1], inner[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        q = i2 / i1
        q_prev = i1 / i0
        ok = np.isfinite(q) & (q > 0) & (q < 1)
        tail = np.where(ok, i2 * q / (1 - q), 0.0)
        ok_prev = np.isfinite(q_prev) & (q_prev > 0) & (q_prev < 1)
        tail_prev = np.where(ok_prev, i2 * q_prev / (1 - q_prev), 0.0)
    err = np.where(ok, np.abs(tail - tail_prev), np.abs(i2))
    return tail, err


def integrate_estimate(f: Callable, region=FULL, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Return (value, error_estimate) of the integral of f over ``region``."""
    region = as_region(region)
    total_len = region.measure
    starts, ends = [], []
    tails = []
    for lo, hi in region.intervals:
        if lo == 0.0 or hi == 0.0:
            a, b, _ = _graded(lo, hi, cfg)
            tails.append((a, b))
        else:
            a, b = np.array([lo]), np.array([hi])
        starts.append(a)
        ends.append(b)
    a = np.concatenate(starts)
    b = np.concatenate(ends)
    vals = _panels(f, a, b, cfg.gauss_order)
    acc_a, acc_v, acc_e = [], [], []
    for _ in range(cfg.max_levels):
        m = (a + b) / 2
        halves = _panels(f, np.concatenate([a, m]), np.concatenate([m, b]), cfg.gauss_order)
        n = a.size
        left, right = halves[..., :n], halves[..., n:]
        refined = left + right
        diff = _component_max(refined - vals)
        floor = 64 * _EPS * _component_max(refined)
        tol = np.maximum(cfg.abs_tol * (b - a) / total_len, floor)
        ok = diff <= tol
        if np.any(ok):
            acc_a.append(a[ok])
            acc_v.append(refined[..., ok])
            acc_e.append(diff[ok])
        if np.all(ok):
            a = a[:0]
            break
        bad = ~ok
        a, b, vals = (
            np.concatenate([a[bad], m[bad]]),
            np.concatenate([m[bad], b[bad]]),
            np.concatenate([left[..., bad], right[..., bad]], axis=-1),
        )
    pos = np.concatenate(acc_a) if acc_a else np.empty(0)
    values = np.concatenate(acc_v, axis=-1) if acc_v else np.zeros(vals.shape[:-1] + (0,))
    errors = np.concatenate(acc_e) if acc_e else np.empty(0)
    order = np.argsort(pos, kind="stable")
    value = values[..., order].sum(axis=-1)
    estimate = float(errors.sum())
    for ta, tb in tails:
        t, e = _tail(f, ta, tb, cfg)
        value = value + t
        estimate += float(np.max(e))
    if a.size:
        raise ToleranceError(
            f"quadrature did not converge after {cfg.max_levels} levels",
            estimate=float("inf"),
            value=float(np.max(np.abs(value))),
        )
    if np.ndim(value) == 0:
        value = float(value)
    return value, estimate


def integrate(f: Callable, region=FULL, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Integral of f over ``region``; raises ToleranceError above abs_tol."""
    value, est = integrate_estimate(f, region, cfg)
    scale = float(np.max(np.abs(value))) if np.size(value) else 0.0
    if est > max(cfg.abs_tol, 1e3 * _EPS * scale):
        raise ToleranceError(
            f"estimated error {est:.3g} exceeds tolerance {cfg.abs_tol:.3g}",
            estimate=est,
            value=scale,
        )
    return value
