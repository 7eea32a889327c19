import math

import numpy as np
import pytest

from shc.errors import DomainError
from shc.quadrature import IntervalUnion
from shc.spectrum import (
    SpectralBasis,
    SpectralParameter,
    build_basis,
    characteristic,
    eigenfunction_coeffs,
    eigenvalue,
    eigenvalue_bracket,
    eigenvalues_ld,
    figure_rows,
    normalization,
)
from shc.special_functions import bessel_zero

from .oracles import LAMBDAS, TANX_ROOT_SQ

NUS = [0.1, 0.3, 0.5, 0.6, 0.9]


class TestParameter:
    def test_constants(self):
        p = SpectralParameter(0.3)
        assert p.c_nu == pytest.approx(0.09 - 0.25)
        assert p.gamma_ratio == pytest.approx(math.gamma(1.3) / math.gamma(0.7))
        assert p.odd_factor == pytest.approx(0.4 / 1.6)

    def test_snap_to_half(self):
        p = SpectralParameter(0.5 + 5e-11)
        assert p.nu == 0.5 and p.odd_factor == 0.0 and p.is_half

    @pytest.mark.parametrize("nu", [0.0, 1.0, -0.2, 1.5])
    def test_domain(self, nu):
        with pytest.raises(DomainError):
            SpectralParameter(nu)


class TestCharacteristic:
    def test_tanx_equals_x(self):
        assert characteristic(0.5, "even", TANX_ROOT_SQ) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_between_poles(self):
        p = SpectralParameter(0.3)
        lo, hi = eigenvalue_bracket(p, 4)
        E = np.linspace(lo * 1.0001, hi * 0.9999, 200)
        h = characteristic(p, "even", E)
        assert np.all(np.diff(h) > 0) or np.all(np.diff(h) < 0)

    def test_pole_rejected(self):
        z = bessel_zero(-0.3, 2)
        with pytest.raises(DomainError):
            characteristic(0.3, "even", z * z)

    def test_negative_energy_rejected(self):
        with pytest.raises(DomainError):
            characteristic(0.3, "odd", -1.0)


class TestEigenvalues:
    @pytest.mark.parametrize("nu", sorted(LAMBDAS))
    def test_frozen(self, nu):
        lam = eigenvalues_ld(nu, 8).astype(float)
        np.testing.assert_allclose(lam, LAMBDAS[nu], rtol=1e-13)

    def test_half_closed_forms(self):
        lam = eigenvalues_ld(0.5, 101)
        n = np.arange(1, 51)
        np.testing.assert_allclose(lam[2 * n - 1].astype(float), ((n - 0.5) * np.pi) ** 2, rtol=1e-12)
        assert float(lam[2]) == pytest.approx(TANX_ROOT_SQ, rel=1e-12)

    def test_kernel_is_zero(self):
        assert eigenvalue(0.3, 0) == 0.0

    def test_single_matches_vector(self):
        assert eigenvalue(0.7, 37) == float(eigenvalues_ld(0.7, 38)[37])

    @pytest.mark.parametrize("nu", NUS)
    def test_order_bracket_residual(self, nu):
        b = build_basis(nu, 201)
        assert np.all(np.diff(b.lambdas_ld) > 0)
        for r in b.records[1:]:
            lo, hi = r.bracket
            if lo != hi:
                assert lo < r.lam_ld < hi
            assert r.residual < 1e-9
            assert r.norm_a > 0

    def test_figure_claims(self):
        lam = eigenvalues_ld(0.6, 6)
        assert lam[5] > bessel_zero(-0.6, 3) ** 2
        lam = eigenvalues_ld(0.1, 41)
        for n in range(1, 20):
            assert lam[2 * n + 1] < bessel_zero(-0.1, n + 1) ** 2

    def test_bracket_domain(self):
        with pytest.raises(DomainError):
            eigenvalue_bracket(0.3, 0)
        with pytest.raises(DomainError):
            eigenvalue(0.3, -1)


class TestCoefficients:
    def test_even_and_odd_pattern(self):
        p = SpectralParameter(0.3)
        lam = eigenvalue(p, 2)
        K = p.gamma_ratio * (math.sqrt(lam) / 2) ** (-0.6)
        assert eigenfunction_coeffs(p, 2, lam) == pytest.approx((-K, 1.0, -K, 1.0))
        lam = eigenvalue(p, 3)
        K = p.gamma_ratio * (math.sqrt(lam) / 2) ** (-0.6)
        oK = p.odd_factor * K
        assert eigenfunction_coeffs(p, 3, lam) == pytest.approx((-oK, 1.0, oK, -1.0))

    @pytest.mark.parametrize("nu", NUS)
    def test_relations(self, nu):
        b = build_basis(nu, 201)
        assert max(b.coefficient_residuals(n) for n in range(201)) < 1e-10

    @pytest.mark.parametrize("nu", NUS)
    def test_transmission_sum(self, nu):
        b = build_basis(nu, 60)
        for n in range(60):
            c1m, c2m, c1p, c2p = b.singular_coefficients(n)
            scale = max(abs(c1m), abs(c2m), abs(c1p), abs(c2p))
            assert abs(c1m + c2m + c1p + c2p) < 1e-10 * scale
            lhs = (nu + 0.5) * c1m + (0.5 - nu) * c2m
            rhs = (nu + 0.5) * c1p + (0.5 - nu) * c2p
            assert abs(lhs - rhs) < 1e-10 * scale

    def test_kernel_norm(self):
        nu = 0.3
        assert normalization(nu, 0, 0.0) ** 2 == pytest.approx(2 * (1 / 2.6 + 1 / 1.4 - 1))


class TestBasis:
    @pytest.mark.parametrize("nu", NUS)
    def test_orthonormal(self, nu):
        G = build_basis(nu, 15).gram_matrix(15)
        assert np.max(np.abs(G - np.eye(15))) < 1e-6

    def test_parity_zero_exactly(self):
        G = build_basis(0.3, 6).gram_matrix(6)
        for i in range(6):
            for j in range(6):
                if (i + j) % 2:
                    assert abs(G[i, j]) < 1e-12

    @pytest.mark.parametrize("nu", NUS)
    def test_norm_vs_quadrature(self, nu):
        b = build_basis(nu, 15)
        for n in range(15):
            assert b.norm_by_quadrature(n) == pytest.approx(b[n].norm_a, rel=1e-7)

    def test_large_index_norm_asymptotics(self):
        b = build_basis(0.3, 401)
        n = 200
        a2 = b[2 * (n - 1)].norm_a ** 2
        assert a2 == pytest.approx(2 / (math.pi**2 * n), rel=0.05)

    def test_parity_of_functions(self):
        b = build_basis(0.6, 8)
        x = np.linspace(0.05, 0.95, 7)
        for n in range(8):
            s = 1 if n % 2 == 0 else -1
            np.testing.assert_array_equal(b.phi(n, -x), s * b.phi(n, x))

    def test_dirichlet_ends(self):
        b = build_basis(0.3, 20)
        for n in range(20):
            assert abs(b.phi(n, 1.0)) < 1e-12 and abs(b.phi(n, -1.0)) < 1e-12

    def test_excludes_origin(self):
        b = build_basis(0.3, 4)
        with pytest.raises(DomainError):
            b.phi(1, [0.5, 1e-13])
        with pytest.raises(DomainError):
            b.phi(9, 0.5)

    def test_ode_residual_examples(self):
        grid = np.concatenate([np.linspace(-0.95, -0.05, 19), np.linspace(0.05, 0.95, 19)])
        assert build_basis(0.3, 2).ode_residual(0, grid) < 1e-6
        assert build_basis(0.5, 2).ode_residual(1, grid) < 1e-4
        assert build_basis(0.7, 11).ode_residual(10, grid) < 1e-3
        with pytest.raises(DomainError):
            build_basis(0.3, 2).ode_residual(1, [0.01])

    def test_masses_half_line(self):
        b = build_basis(0.9, 10)
        m = b.masses(IntervalUnion([(0.0, 1.0)]), range(10))
        np.testing.assert_allclose(m, 0.5, atol=1e-9)

    def test_csv(self):
        text = build_basis(0.5, 4).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "n,parity,bracket_lo,bracket_hi,lambda,norm_a"
        assert float(lines[2].split(",")[4]) == pytest.approx(math.pi**2 / 4, rel=1e-15)

    def test_basis_size_check(self):
        with pytest.raises(DomainError):
            SpectralBasis(0.3, 0)

    def test_figure_rows(self):
        rows = figure_rows([0.3, 0.6], 5)
        assert len(rows) == 10
        nu, n, lam, jp2, jm2 = rows[0]
        assert (nu, n) == (0.3, 1) and jm2 < jp2
