import math

import numpy as np
import pytest

from shc.errors import DomainError
from shc.extensions import (
    BoundaryCoefficientsAB,
    SingularCoefficients,
    alphabeta_to_coeffs,
    boundary_quadratic_term,
    check_quadruple,
    classify_extension,
    classify_json,
    coeffs_to_alphabeta,
    continuity_values,
    dirichlet_quadruple,
    eigenfunction_alphabeta,
    illposedness_profile,
    is_member,
    leading_blowup,
    sample_constrained,
    symplectic_residual,
    transmission_residual,
)
from shc.spectrum import build_basis

I2 = np.eye(2)
CONTINUITY = np.array([[-1.0, 2.0], [0.0, -1.0]])


class TestCoefficientMap:
    def test_example(self):
        ab = coeffs_to_alphabeta(0.3, SingularCoefficients(0, 0, 1, -1))
        assert ab.alpha_plus == 0 and ab.beta_plus == pytest.approx(0.6)

    def test_kernel_element(self):
        ab = coeffs_to_alphabeta(0.3, SingularCoefficients(1, -1, 1, -1))
        assert ab.alpha_plus == 0 and ab.alpha_minus == 0

    def test_half_degeneracy(self):
        ab = coeffs_to_alphabeta(0.5, SingularCoefficients(0.7, 3.0, -2.0, 5.0))
        assert ab.beta_minus == 0.7 and ab.beta_plus == -2.0

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            nu = rng.uniform(0.01, 0.99)
            c = SingularCoefficients(*rng.standard_normal(4))
            back = alphabeta_to_coeffs(nu, coeffs_to_alphabeta(nu, c))
            np.testing.assert_allclose(
                [back.c1_minus, back.c2_minus, back.c1_plus, back.c2_plus],
                [c.c1_minus, c.c2_minus, c.c1_plus, c.c2_plus],
                atol=1e-12 / nu,
            )


class TestQuadruple:
    def test_literal_two_block_example_has_rank_two(self):
        z = np.zeros((2, 2))
        n2 = np.vstack([I2, z])
        n3 = np.vstack([CONTINUITY, z])
        n0 = np.zeros((4, 2))
        assert symplectic_residual(n0, n2, n3, n0) < 1e-15
        assert not check_quadruple(n0, n2, n3, n0)

    def test_dirichlet_completion(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, b, c = rng.standard_normal(3)
            d = (1 + b * c) / a
            M = np.array([[a, b], [c, d]])
            assert check_quadruple(*dirichlet_quadruple(I2, M))
            assert check_quadruple(*dirichlet_quadruple(M, M))

    def test_zero(self):
        z = np.zeros((4, 2))
        assert not check_quadruple(z, z, z, z)

    def test_random_violation(self):
        rng = np.random.default_rng(9)
        hits = 0
        for _ in range(20):
            N = [rng.standard_normal((4, 2)) for _ in range(4)]
            if symplectic_residual(*N) > 0.1:
                hits += 1
                assert not check_quadruple(*N)
        assert hits > 0

    def test_shape(self):
        with pytest.raises(DomainError):
            check_quadruple(np.zeros((2, 2)), *[np.zeros((4, 2))] * 3)


class TestClassify:
    def test_identity(self):
        s = classify_extension(I2, I2)
        assert s.classification == "coupled"
        np.testing.assert_array_equal(s.M, I2)

    @pytest.mark.parametrize("nu", [0.1, 0.3, 0.5, 0.9])
    def test_decoupled_example(self, nu):
        m2 = [[2 * nu + 1, 2], [2 * nu + 1, 2]]
        m3 = [[-2 * nu - 1, 2], [0, 0]]
        s = classify_extension(m2, m3)
        assert s.classification == "decoupled"
        np.testing.assert_allclose(s.l_minus, [2 * nu + 1, -2])
        np.testing.assert_allclose(s.l_plus, [-2 * nu - 1, 2])

    def test_continuity_matrix(self):
        s = classify_extension(I2, CONTINUITY)
        assert s.classification == "coupled"
        np.testing.assert_allclose(s.M, CONTINUITY)

    def test_continuity_meaning_at_half(self):
        s = classify_extension(I2, CONTINUITY)
        rng = np.random.default_rng(1)
        for _ in range(100):
            ab = sample_constrained(s, rng)
            v = continuity_values(ab, 0.5)
            assert v["f(0-)"] == pytest.approx(v["f(0+)"], abs=1e-12)
            assert v["f'(0-)"] == pytest.approx(v["f'(0+)"], abs=1e-12)

    def test_minus_identity_is_distinct(self):
        s = classify_extension(I2, -I2)
        np.testing.assert_array_equal(s.M, -I2)

    def test_scaled_pair(self):
        M = np.array([[2.0, 1.0], [1.0, 1.0]])
        s = classify_extension(3 * I2, 3 * M)
        np.testing.assert_allclose(s.M, M, rtol=1e-14)

    def test_invalid(self):
        assert classify_extension(I2, 2 * I2).classification == "invalid"
        assert classify_extension(np.zeros((2, 2)), [[1, 0], [0, 0]]).classification == "invalid"
        assert classify_extension(I2, [[1, 0], [0, 0]]).classification == "invalid"

    def test_totality(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            m2, m3 = rng.integers(-2, 3, (2, 2, 2))
            assert classify_extension(m2, m3).classification in ("coupled", "decoupled", "invalid")

    def test_coupled_round_trip(self):
        rng = np.random.default_rng(8)
        m2 = np.array([[1.0, 2.0], [0.5, 3.0]])
        m3 = np.array([[2.0, -1.0], [1.0, 1.0]])
        m3 = m3 * math.sqrt(np.linalg.det(m2) / np.linalg.det(m3))
        s = classify_extension(m2, m3)
        assert check_quadruple(*dirichlet_quadruple(I2, s.M))
        for _ in range(100):
            vp = rng.standard_normal(2)
            vm = rng.standard_normal(2)
            orig = m2 @ np.array([vm[0], -vm[1]]) + m3 @ vp
            red = np.array([vm[0], -vm[1]]) + s.M @ vp
            np.testing.assert_allclose(np.linalg.solve(m2, orig), red, atol=1e-12)

    def test_json(self):
        out = classify_json('{"M2": [[1,0],[0,1]], "M3": [[1,0],[0,1]]}')
        assert out == '{"M": [[1.0, 0.0], [0.0, 1.0]], "class": "coupled"}'


class TestTransmission:
    def test_matching(self):
        s = classify_extension(I2, I2)
        ab = BoundaryCoefficientsAB(alpha_plus=1.3, alpha_minus=-1.3, beta_plus=0.4, beta_minus=0.4)
        assert transmission_residual(s, ab) == 0
        assert is_member(s, ab)

    def test_perturbation(self):
        s = classify_extension(I2, I2)
        ab = BoundaryCoefficientsAB(alpha_plus=1.25, alpha_minus=-1.25, beta_plus=1.5, beta_minus=0.5)
        assert transmission_residual(s, ab) >= 1

    @pytest.mark.parametrize("nu", [0.1, 0.3, 0.5, 0.6, 0.9])
    def test_eigenfunctions_belong(self, nu):
        b = build_basis(nu, 201)
        s = classify_extension(I2, I2)
        assert max(transmission_residual(s, eigenfunction_alphabeta(b, n)) for n in range(201)) < 1e-10

    def test_invalid_spec(self):
        with pytest.raises(DomainError):
            transmission_residual(classify_extension(I2, 2 * I2), BoundaryCoefficientsAB(0, 0, 0, 0))


class TestQuadraticForm:
    def test_unit(self):
        assert boundary_quadratic_term(BoundaryCoefficientsAB(1, 0, 1, 0)) == -1

    @pytest.mark.parametrize("sign", [1, -1])
    def test_nullity(self, sign):
        s = classify_extension(I2, sign * I2)
        rng = np.random.default_rng(12)
        for _ in range(1000):
            assert abs(boundary_quadratic_term(sample_constrained(s, rng))) < 1e-12


class TestIllposed:
    def test_unit_eps(self):
        p = illposedness_profile(-0.5, 1.0)
        assert p.int_f2 == pytest.approx(1 / 60, rel=1e-15)
        assert p.int_f2_over_x2 == pytest.approx(1 / 12, rel=1e-14)
        assert p.int_fprime2 == pytest.approx(3 / 16, rel=1e-15)
        assert p.quadrature_error < 1e-9

    @pytest.mark.parametrize("c", [-0.3, -0.5, -1.0])
    def test_blowup(self, c):
        p = illposedness_profile(c, 1e-4)
        assert p.form_value * 1e-4 == pytest.approx(leading_blowup(c), rel=0.02)
        assert p.quadrature_error < 1e-9

    def test_rayleigh_factor(self):
        p = illposedness_profile(-0.5, 1e-4)
        assert p.rayleigh_quotient * 1e-4 == pytest.approx(12 * leading_blowup(-0.5), rel=0.01)

    def test_bounded_above_for_mild_c(self):
        vals = [illposedness_profile(-0.2, e, quadrature=False).form_value for e in (0.1, 0.01, 0.001)]
        assert max(vals) < 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            illposedness_profile(0.5, 0.1)
        with pytest.raises(DomainError):
            illposedness_profile(-0.5, 0.0)
