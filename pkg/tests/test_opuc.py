from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helmholtz1d.errors import ReflectivityRangeError, ValidationError
from helmholtz1d.forward import eval_f
from helmholtz1d.inversion import moments_to_reflectivities
from helmholtz1d.opuc import (
    BivariatePolynomial,
    alpha_to_moments,
    dual,
    fourier_coefficient_product,
    g_from_polys,
    g_series,
    g_taylor_coefficients,
    herglotz_F,
    matrix_product_polys,
    moment_inner_product,
    moment_residual,
    polyval,
    psi_polynomial,
    szego_polynomials,
)


def unit_circle(rng, k):
    return np.exp(2j * np.pi * rng.random(k))


class TestSzego:
    def test_first_degree(self):
        phi, psi = szego_polynomials([0.3 + 0.1j])
        np.testing.assert_allclose(phi[1], [-(0.3 - 0.1j), 1])
        np.testing.assert_allclose(psi[1], [0.3 - 0.1j, 1])

    def test_free_case(self):
        phi, _ = szego_polynomials(np.zeros(4))
        for j, p in enumerate(phi):
            np.testing.assert_array_equal(p, np.eye(j + 1)[j])

    def test_monic_degrees(self):
        phi, psi = szego_polynomials(np.random.default_rng(1).uniform(-0.9, 0.9, 7))
        for j, (p, q) in enumerate(zip(phi, psi)):
            assert p.size == q.size == j + 1
            assert p[-1] == q[-1] == 1

    def test_range(self):
        with pytest.raises(ReflectivityRangeError):
            szego_polynomials([0.5, 1.0])


class TestDual:
    def test_constant(self):
        np.testing.assert_array_equal(dual(np.array([1.0])), [1.0])

    def test_first_degree(self):
        r1 = 0.2 - 0.4j
        np.testing.assert_allclose(dual(np.array([-np.conj(r1), 1])), [1, -r1])

    def test_monomial(self):
        np.testing.assert_array_equal(dual(np.array([0, 0, 1.0])), [1, 0, 0])

    def test_definition_and_involution(self):
        rng = np.random.default_rng(2)
        p = rng.normal(size=6) + 1j * rng.normal(size=6)
        z = 0.3 + 0.8j
        assert polyval(dual(p), z) == pytest.approx(z**5 * np.conj(polyval(p, 1 / np.conj(z))))
        np.testing.assert_array_equal(dual(dual(p)), p)


class TestMatrixIdentity:
    def test_n0(self):
        P = matrix_product_polys([])
        assert [[complex(e[0]) for e in row] for row in P] == [[1, 1], [-1, 1]]

    def test_n1_entry(self):
        P = matrix_product_polys([0.35])
        np.testing.assert_allclose(P[1][0], [0.35, -1.0])  # -(z - r1)

    def test_random_points(self):
        rng = np.random.default_rng(3)
        r = rng.uniform(-0.9, 0.9, 5)
        phi, psi = szego_polynomials(r)
        for z in unit_circle(rng, 20):
            Mz = np.array([[1, 1], [-1, 1]], dtype=complex)
            for rj in r:
                Mz = Mz @ np.array([[z, rj * z], [np.conj(rj), 1]])
            expect = [[polyval(psi[-1], z), polyval(dual(psi[-1]), z)], [-polyval(phi[-1], z), polyval(dual(phi[-1]), z)]]
            np.testing.assert_allclose(Mz, expect, atol=1e-12)

    @pytest.mark.parametrize("complex_r", [False, True])
    def test_coefficientwise(self, complex_r):
        rng = np.random.default_rng(4)
        for n in range(1, 11):
            r = rng.uniform(-0.9, 0.9, n)
            if complex_r:
                r = r * np.exp(2j * np.pi * rng.random(n)) * 0.9
            P = matrix_product_polys(r)
            phi, psi = szego_polynomials(r)
            expect = [[psi[-1], dual(psi[-1])], [-phi[-1], dual(phi[-1])]]
            for i in range(2):
                for k in range(2):
                    got = np.trim_zeros(P[i][k], "b") if i == 0 and k == 1 else P[i][k]
                    want = expect[i][k]
                    size = max(got.size, want.size)
                    np.testing.assert_allclose(np.pad(got, (0, size - got.size)), np.pad(want, (0, size - want.size)), atol=1e-12)


class TestGAndF:
    def test_origin(self):
        assert g_from_polys([0.4, -0.3], 0.0) == 0
        assert herglotz_F([0.4, -0.3], 0.0) == pytest.approx(1.0)

    def test_single_layer(self):
        z = 0.6 - 0.3j
        assert g_from_polys([0.45], z) == pytest.approx(0.45 * z, abs=1e-15)

    def test_empty(self):
        assert herglotz_F([], 0.7j) == pytest.approx(1.0)

    def test_hand_value(self):
        assert herglotz_F([0.5], 1.0) == pytest.approx(3.0)

    def test_diagonal_of_f(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            r = rng.uniform(-0.9, 0.9, n)
            z = unit_circle(rng, 1)[0] * (1.0 if rng.random() < 0.5 else rng.random())
            assert abs(g_from_polys(r, z) - eval_f(r, np.full(n, z))) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-0.9, 0.9), min_size=1, max_size=10), st.floats(0, 2 * np.pi), st.floats(0, 1))
    def test_caratheodory(self, r, t, rho):
        z = rho * np.exp(1j * t)
        F = herglotz_F(r, z)
        g = g_from_polys(r, z)
        assert F.real > 0
        assert F == pytest.approx((1 + g) / (1 - g), rel=1e-9, abs=1e-12)

    def test_taylor_coefficients_of_F_are_moments(self):
        rng = np.random.default_rng(6)
        r = rng.uniform(-0.6, 0.6, 6)
        n = 12
        m = alpha_to_moments(g_taylor_coefficients(r, n))
        zs = np.exp(2j * np.pi * np.arange(4096) / 4096)
        Fk = np.fft.fft(herglotz_F(r, zs)) / 4096
        np.testing.assert_allclose(Fk[1 : n + 1], 2 * np.conj(m[1:]), atol=1e-12)


class TestTaylorOracles:
    def test_quadrature_vs_series(self):
        rng = np.random.default_rng(7)
        r = rng.uniform(-0.7, 0.7, 8)
        np.testing.assert_allclose(g_taylor_coefficients(r, 20), g_series(r, 20), atol=1e-13)

    def test_first_coefficient(self):
        assert g_series([0.3, -0.4], 1)[0] == pytest.approx(0.3)

    def test_two_layer_expansion(self):
        # g = z (r2 z + r1) / (1 + r1 r2 z) expanded by hand
        r1, r2 = 0.3, -0.4
        a = g_series([r1, r2], 3)
        np.testing.assert_allclose(a, [r1, r2 * (1 - r1**2), -r1 * r2**2 * (1 - r1**2)], atol=1e-15)


class TestMoments:
    def test_first(self):
        np.testing.assert_allclose(alpha_to_moments([0.25 - 0.1j]), [1, 0.25 - 0.1j])

    def test_second(self):
        a, b = 0.3 + 0.2j, -0.1j
        np.testing.assert_allclose(alpha_to_moments([a, b]), [1, a, b + a * a])

    def test_free(self):
        np.testing.assert_array_equal(alpha_to_moments(np.zeros(5)), [1, 0, 0, 0, 0, 0])

    def test_residual(self):
        rng = np.random.default_rng(8)
        for n in (5, 40, 200):
            alpha = g_taylor_coefficients(rng.uniform(-0.5, 0.5, n), n)
            assert moment_residual(alpha, alpha_to_moments(alpha)) <= 1e-13

    def test_moments_bounded(self):
        rng = np.random.default_rng(9)
        m = alpha_to_moments(g_taylor_coefficients(rng.uniform(-0.9, 0.9, 10), 30))
        assert np.all(np.abs(m) <= 1 + 1e-12)

    def test_mp_dtype(self):
        mp.mp.dps = 30
        m = alpha_to_moments(np.array([mp.mpf("0.5"), mp.mpf("0.25")], dtype=object))
        assert m.dtype == object and m[2] == mp.mpf("0.5")


class TestInnerProduct:
    def setup_method(self):
        rng = np.random.default_rng(10)
        self.r = rng.uniform(-0.8, 0.8, 8)
        self.m = alpha_to_moments(g_taylor_coefficients(self.r, 8))
        self.phi, _ = szego_polynomials(self.r)

    def test_unit_mass(self):
        assert moment_inner_product(self.m, [1], [1]) == 1

    def test_first_moment(self):
        assert moment_inner_product(self.m, [0, 1], [1]) == pytest.approx(np.conj(self.m[1]))

    def test_conjugate_symmetric(self):
        rng = np.random.default_rng(11)
        p = rng.normal(size=5) + 1j * rng.normal(size=5)
        q = rng.normal(size=7) + 1j * rng.normal(size=7)
        assert moment_inner_product(self.m, p, q) == pytest.approx(np.conj(moment_inner_product(self.m, q, p)))

    def test_orthogonality(self):
        for i in range(9):
            for j in range(9):
                if i != j:
                    assert abs(moment_inner_product(self.m, self.phi[i], self.phi[j])) <= 1e-10

    def test_useful_fact(self):
        for j in range(9):
            norm = moment_inner_product(self.m, self.phi[j], self.phi[j])
            assert norm.real > 0
            assert abs(moment_inner_product(self.m, dual(self.phi[j]), [1]) - norm) <= 1e-12

    def test_norms_are_products(self):
        expect = np.concatenate(([1.0], np.cumprod(1 - self.r**2)))
        got = [moment_inner_product(self.m, p, p).real for p in self.phi]
        np.testing.assert_allclose(got, expect, atol=1e-12)

    def test_insufficient_moments(self):
        with pytest.raises(ValidationError):
            moment_inner_product(self.m[:3], self.phi[4], [1])


class TestVerblunskyRoundTrip:
    def test_single_step(self):
        np.testing.assert_allclose(moments_to_reflectivities([1.0, 0.37], 1), [0.37])

    def test_free_measure(self):
        np.testing.assert_array_equal(moments_to_reflectivities(np.eye(6)[0], 5), np.zeros(5))

    def test_two_layers(self):
        r = [0.3, -0.4]
        out = moments_to_reflectivities(alpha_to_moments(g_series(r, 2)), 2)
        np.testing.assert_allclose(out, r, atol=1e-12)

    def test_complex_coefficients(self):
        rng = np.random.default_rng(12)
        r = 0.6 * rng.random(6) * np.exp(2j * np.pi * rng.random(6))
        m = alpha_to_moments(g_series(r, 6))
        np.testing.assert_allclose(moments_to_reflectivities(m, 6), r, atol=1e-12)
        np.testing.assert_allclose(moments_to_reflectivities(m, 6, literal_conjugation=True)[0], np.conj(r[0]), atol=1e-12)

    @pytest.mark.parametrize("n, rmax", [(5, 0.9), (10, 0.9), (20, 0.6), (50, 0.3)])
    def test_double_precision(self, n, rmax):
        rng = np.random.default_rng(n)
        r = rng.uniform(-rmax, rmax, n)
        out = moments_to_reflectivities(alpha_to_moments(g_taylor_coefficients(r, n)), n)
        np.testing.assert_allclose(out, r, atol=1e-10)

    def test_extended_precision_n50(self):
        mp.mp.dps = 80
        rng = np.random.default_rng(50)
        r = rng.uniform(-0.9, 0.9, 50)
        rm = [mp.mpf(float(x)) for x in r]
        m = alpha_to_moments(g_series(rm, 50, one=mp.mpf(1)))
        out = moments_to_reflectivities(m, 50, tol=mp.mpf(10) ** -70)
        assert max(abs(complex(a) - b) for a, b in zip(out, r)) <= 1e-10


def psi_sympy(p, q):
    """Independent oracle: symbolic differentiation in independent (z, w = zbar)."""
    z, w = sp.symbols("z w")
    if min(p, q) < 0 or (p == 0 and q > 0):
        return {}
    if q == 0:
        return {(p, 0): Fraction(1)}
    N = p + q - 1
    expr = sp.Rational((-1) ** p, q * sp.factorial(N)) * (1 - z * w) * sp.diff((1 - z * w) ** N, w, p, z, q)
    poly = sp.Poly(sp.expand(expr), z, w)
    return {mon: Fraction(int(c.p), int(c.q)) for mon, c in zip(poly.monoms(), poly.coeffs()) if c != 0}


class TestPsi:
    def test_special_values(self):
        assert psi_polynomial(0, 0) == BivariatePolynomial({(0, 0): Fraction(1)})
        assert psi_polynomial(1, 0) == BivariatePolynomial({(1, 0): Fraction(1)})
        assert psi_polynomial(1, 1) == BivariatePolynomial({(0, 0): Fraction(1), (1, 1): Fraction(-1)})

    def test_hand_derived(self):
        # d_w^2 d_z (1 - z w)^2 = 4 z, scaled by 1/2 and times (1 - z w)
        assert psi_polynomial(2, 1) == BivariatePolynomial({(1, 0): Fraction(2), (2, 1): Fraction(-2)})

    @pytest.mark.parametrize("p, q", [(-1, 2), (2, -1), (0, 1), (0, 3)])
    def test_zero_cases(self, p, q):
        assert psi_polynomial(p, q).is_zero()

    @pytest.mark.parametrize("p, q", [(p, q) for p in range(0, 6) for q in range(0, 6)])
    def test_against_sympy(self, p, q):
        assert psi_polynomial(p, q).terms == psi_sympy(p, q)

    def test_evaluation(self):
        assert psi_polynomial(1, 1)(0.3) == pytest.approx(0.91)


class TestFourierProduct:
    def test_first_arrival_term(self):
        assert fourier_coefficient_product([1, 0, 0], [0.2, 0.5, -0.7]) == pytest.approx(0.2)

    def test_single(self):
        assert fourier_coefficient_product([1], [0.45]) == pytest.approx(0.45)

    def test_hand_value(self):
        assert fourier_coefficient_product([1, 1], [0.3, 0.4]) == pytest.approx(0.364, abs=1e-15)

    @pytest.mark.parametrize("k, r", [([2, 0], [0.1, 0.2]), ([1, -1], [0.1, 0.2]), ([1], [0.1, 0.2]), ([], [])])
    def test_malformed(self, k, r):
        with pytest.raises(ValidationError):
            fourier_coefficient_product(k, r)

    def test_torus_coefficients_n3(self):
        rng = np.random.default_rng(13)
        r = rng.uniform(-0.8, 0.8, 3)
        K = 32
        t = np.exp(2j * np.pi * np.arange(K) / K)
        Z = np.array(np.meshgrid(t, t, t, indexing="ij"))
        C = np.fft.fftn(eval_f(r, Z)) / K**3
        for k in [(1, 0, 0), (1, 1, 0), (1, 2, 1), (1, 1, 3)]:
            assert abs(C[k] - fourier_coefficient_product(k, r)) <= 1e-8
