import math

import numpy as np
import pytest

from shc.asymptotics import (
    asymptotics_csv,
    computed_gaps,
    computed_sqrt_pairs,
    condensation_profile,
    condensation_term,
    expected_remainder_exponent,
    gap_prediction,
    loglog_slope,
    predicted_sqrt_eigenvalue,
    residuals,
    running_limsup,
)
from shc.errors import DomainError
from shc.spectrum import eigenvalues_ld


def test_half_even_correction():
    for n in (1, 5, 40):
        p = predicted_sqrt_eigenvalue(0.5, n, "even")
        assert p.correction == pytest.approx(-0.5 * 2 / (math.pi * n), rel=1e-14)


def test_half_odd_is_exact():
    even, odd = computed_sqrt_pairs(0.5, 30)
    for n in range(1, 31):
        p = predicted_sqrt_eigenvalue(0.5, n, "odd")
        assert p.predicted_sqrt_lambda == pytest.approx(math.pi * (n - 0.5), rel=1e-15)
        assert odd[n - 1] == pytest.approx(p.predicted_sqrt_lambda, rel=1e-13)


def test_remainder_example():
    even, _ = computed_sqrt_pairs(0.3, 100)
    p = predicted_sqrt_eigenvalue(0.3, 100, "even")
    assert abs(even[99] - p.predicted_sqrt_lambda) < 5 / 100 ** min(1, 1.2)


def test_leading_positive():
    for nu in (0.05, 0.5, 0.95):
        assert predicted_sqrt_eigenvalue(nu, 1, "even").leading > 0


def test_gap_half_is_two():
    for n in (1, 10, 500):
        assert gap_prediction(0.5, n) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("nu", [0.3, 0.5, 0.7])
def test_gap_ratio(nu):
    g = computed_gaps(nu, 200)
    assert 0.9 <= g[-1] / gap_prediction(nu, 200) <= 1.1


def test_gap_decay_slope():
    g = computed_gaps(0.9, 200)
    n = np.arange(100, 201)
    assert loglog_slope(n, g[99:]) == pytest.approx(-0.8, abs=0.15)


@pytest.mark.parametrize("nu", [0.2, 0.6, 0.8])
def test_residual_rates(nu):
    n = np.arange(50, 401)
    slope = loglog_slope(n, residuals(nu, "even", n))
    assert slope <= expected_remainder_exponent(nu) + 0.3


def test_residual_rate_below_half_with_next_term():
    # at nu=0.4 the O(1/n) remainder is the -(4nu^2-1)/(8 pi n) term
    nu = 0.4
    n = np.arange(50, 401)
    r = residuals(nu, "even", n)
    lam = eigenvalues_ld(nu, 800)
    corrected = []
    for k in n:
        p = predicted_sqrt_eigenvalue(nu, int(k), "even")
        s = np.sqrt(lam[2 * (k - 1)])
        extra = -(4 * nu * nu - 1) / (8 * math.pi * k)
        corrected.append(abs(float(s - np.longdouble(p.leading) - np.longdouble(p.correction) - np.longdouble(extra))))
    assert loglog_slope(n, corrected) < loglog_slope(n, r) - 0.5


def test_condensation_dirichlet_like():
    lam = [(j * math.pi) ** 2 for j in range(1, 201)]
    assert -0.1 < condensation_term(lam, 20, 200) < 0.2


def test_condensation_our_spectrum():
    lam = eigenvalues_ld(0.3, 401)[1:]
    assert abs(condensation_term(lam, 40, 400)) < 0.1


def test_condensation_trend():
    prof = condensation_profile(0.3, list(range(20, 81, 4)))
    early = max(abs(d.term) for d in prof if d.n <= 40)
    late = max(abs(d.term) for d in prof if d.n >= 60)
    assert late <= early + 0.05
    assert running_limsup([d.term for d in prof]) < 0.05


def test_condensation_rejects():
    lam = [float(j * j) for j in range(1, 50)]
    with pytest.raises(DomainError):
        condensation_term(lam, 10, 15)
    with pytest.raises(DomainError):
        condensation_term(lam, 10, 100)
    with pytest.raises(DomainError):
        condensation_term(lam[::-1], 5, 20)


def test_csv():
    text = asymptotics_csv(0.3, "even", 5)
    assert text.startswith("n,computed,predicted,residual\n")
    assert len(text.strip().split("\n")) == 6
