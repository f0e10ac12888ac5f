"""Special-function accuracy against independent oracles."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy

from pathreg import specfun

mpmath.mp.dps = 50


def mp_besselk(nu, rho) -> float:
    return float(mpmath.besselk(mpmath.mpf(nu), mpmath.mpf(rho)))


class TestGamma:
    def test_half_is_sqrt_pi(self):
        assert abs(specfun.gamma(0.5) - math.sqrt(math.pi)) <= 1e-12 * math.sqrt(math.pi)

    def test_against_stdlib(self):
        for x in [0.1, 0.37, 1.0, 1.5, 2.5, 4.2, 9.9, 21.0]:
            assert specfun.gamma(x) == pytest.approx(math.gamma(x), rel=1e-12)

    def test_reflection_negative(self):
        for x in [-0.5, -1.3, -3.7]:
            assert specfun.gamma(x) == pytest.approx(math.gamma(x), rel=1e-11)

    def test_poles_raise(self):
        for x in [0.0, -1.0, -2.0]:
            with pytest.raises(ValueError):
                specfun.gamma(x)


class TestDigammaInt:
    def test_psi1_is_minus_euler(self):
        assert specfun.digamma_int(1) == pytest.approx(-0.5772156649, abs=1e-9)

    def test_psi2(self):
        assert specfun.digamma_int(2) == pytest.approx(0.4227843351, abs=1e-9)

    def test_recurrence_exact(self):
        assert abs((specfun.digamma_int(5) - specfun.digamma_int(4)) - 0.25) <= 1e-14

    def test_against_mpmath(self):
        for m in range(1, 40):
            assert specfun.digamma_int(m) == pytest.approx(
                float(mpmath.digamma(m)), abs=1e-14
            )

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            specfun.digamma_int(0)


class TestBesselK:
    def test_half_order_closed_form(self):
        # K_{1/2}(rho) = sqrt(pi / (2 rho)) e^{-rho}
        for rho in np.geomspace(1e-4, 20, 100):
            expected = math.sqrt(math.pi / (2 * rho)) * math.exp(-rho)
            assert specfun.bessel_k(0.5, rho) == pytest.approx(expected, rel=1e-9)

    def test_value_examples(self):
        assert specfun.bessel_k(0.5, 1.0) == pytest.approx(0.4610685, abs=1e-7)
        assert specfun.bessel_k(1.0, 1.0) == pytest.approx(0.6019072, abs=1e-6)

    def test_recurrence_from_half(self):
        # K_{3/2}(rho) = K_{1/2}(rho) (1 + 1/rho) via the three-term recurrence
        for rho in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]:
            lhs = specfun.bessel_k(1.5, rho)
            rhs = specfun.bessel_k(0.5, rho) + (1.0 / rho) * specfun.bessel_k(0.5, rho)
            assert lhs == pytest.approx(rhs, rel=1e-9)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5])
    def test_three_term_recurrence(self, nu):
        # K_{nu+1} = K_{nu-1} + (2 nu / rho) K_nu, with K_{-a} = K_a
        for rho in [0.1, 0.3, 1.0, 3.0, 10.0]:
            low = abs(nu - 1.0)
            km = specfun.bessel_k(low, rho) if low > 0 else _k0(rho)
            kc = specfun.bessel_k(nu, rho)
            kp = specfun.bessel_k(nu + 1.0, rho)
            assert kp == pytest.approx(km + (2 * nu / rho) * kc, rel=1e-8)

    def test_against_high_precision_oracle(self):
        worst = 0.0
        for nu in [0.3, 0.7, 1.0, 1.5, 2.0, 2.5, 3.3, 4.5, 6.0]:
            for rho in [1e-6, 1e-3, 0.1, 1.0, 3.0, 5.0, 7.0, 12.0, 20.0, 25.0, 28.0, 30.0]:
                mine = specfun.bessel_k(nu, rho)
                ref = mp_besselk(nu, rho)
                worst = max(worst, abs(mine - ref) / abs(ref))
        assert worst <= 1e-10

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_branch_agreement_near_integers(self, n):
        for rho in [0.5, 1.0, 2.0, 5.0]:
            center = specfun.bessel_k(float(n), rho)
            for eps in (-1e-6, 1e-6):
                near = specfun.bessel_k(n + eps, rho)
                assert abs(near - center) <= 1e-4 * abs(center)

    def test_vectorised_matches_scalar(self):
        rho = np.array([0.01, 0.5, 2.0, 8.0, 26.0])
        vec = specfun.bessel_k(1.5, rho)
        for r, v in zip(rho, vec):
            assert v == specfun.bessel_k(1.5, float(r))

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            specfun.bessel_k(-1.0, 1.0)
        with pytest.raises(ValueError):
            specfun.bessel_k(1.0, 0.0)
        with pytest.raises(ValueError):
            specfun.bessel_k(1.0, -2.0)


class TestMaternRadial:
    def test_value_at_zero_exact(self):
        for nu in [0.5, 1.0, 1.7, 2.5]:
            assert specfun.matern_radial(nu, 0.0) == 1.0

    def test_half_integer_closed_forms(self):
        r = np.linspace(0.01, 3.0, 40)
        half = np.exp(-r)
        three_half = (1 + math.sqrt(3) * r) * np.exp(-math.sqrt(3) * r)
        five_half = (1 + math.sqrt(5) * r + 5.0 * r**2 / 3.0) * np.exp(-math.sqrt(5) * r)
        assert np.allclose(specfun.matern_radial(0.5, r), half, rtol=1e-9)
        assert np.allclose(specfun.matern_radial(1.5, r), three_half, rtol=1e-9)
        assert np.allclose(specfun.matern_radial(2.5, r), five_half, rtol=1e-9)

    def test_frozen_examples(self):
        assert specfun.matern_radial(0.5, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-9)
        # (1 + sqrt(3)) e^{-sqrt(3)}; the closed form and the series agree
        assert specfun.matern_radial(1.5, 1.0) == pytest.approx(0.4833577245965, abs=1e-9)
        expected = (1 + math.sqrt(5) * 0.7 + 5 / 3 * 0.49) * math.exp(-math.sqrt(5) * 0.7)
        assert specfun.matern_radial(2.5, 0.7) == pytest.approx(expected, rel=1e-9)

    def test_continuity_near_zero(self):
        for nu in [0.5, 1.0, 2.5]:
            vals = specfun.matern_radial(nu, np.array([1e-9, 1e-7, 1e-5]))
            assert np.all(np.abs(vals - 1.0) < 1e-3)
            assert np.all(np.diff(vals) <= 0)


def _k0(rho: float) -> float:
    # K_0 sits outside the nu > 0 contract; take it from the oracle
    return float(mpmath.besselk(0, rho))


def sympy_wendland(d: int, n: int) -> list[Fraction]:
    """Independent construction by symbolic integration."""
    t, rho = sympy.symbols("t rho", nonnegative=True)
    j = d // 2 + n + 1
    poly = (1 - t) ** j
    for _ in range(n):
        integrated = sympy.integrate(t * poly, (t, rho, 1))
        poly = (integrated / integrated.subs(rho, 0)).subs(rho, t)
        poly = sympy.expand(poly)
    expanded = sympy.Poly(poly.subs(t, rho), rho)
    coeffs = [Fraction(0)] * (expanded.degree() + 1)
    for (power,), coeff in expanded.terms():
        coeffs[power] = Fraction(int(sympy.numer(coeff)), int(sympy.denom(coeff)))
    return coeffs


class TestWendlandPolynomial:
    @pytest.mark.parametrize("d,n", [(1, 0), (1, 1), (3, 1), (2, 2), (5, 3)])
    def test_matches_symbolic_oracle_exactly(self, d, n):
        poly = specfun.wendland_polynomial(d, n)
        oracle = sympy_wendland(d, n)
        assert list(poly.coeffs) == oracle

    def test_known_coefficients(self):
        assert list(specfun.wendland_polynomial(1, 0).coeffs) == [1, -1]
        assert list(specfun.wendland_polynomial(1, 1).coeffs) == [1, 0, -6, 8, -3]
        assert list(specfun.wendland_polynomial(3, 1).coeffs) == [1, 0, -10, 20, -15, 4]

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_structure_sweep(self, d, n):
        poly = specfun.wendland_polynomial(d, n)
        assert poly.value_exact(Fraction(0)) == 1
        assert poly.value_exact(Fraction(1)) == 0
        assert poly.degree == d // 2 + 3 * n + 1
        odd_degrees = [
            i for i in range(1, poly.degree + 1, 2) if poly.coeffs[i] != 0
        ]
        assert odd_degrees[0] == 2 * n + 1

    def test_compact_support_evaluation(self):
        poly = specfun.wendland_polynomial(1, 1)
        assert poly(1.25) == 0.0
        assert poly(0.0) == 1.0
        mid = poly(np.array([0.25, 0.5, 2.0]))
        assert mid[2] == 0.0
        assert 0.0 < mid[1] < mid[0] < 1.0

    def test_derivative_of_stored_polynomial(self):
        poly = specfun.wendland_polynomial(1, 1)
        second = poly.derivative().derivative()
        assert second.value_exact(Fraction(0)) == -12

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            specfun.wendland_polynomial(0, 1)
        with pytest.raises(ValueError):
            specfun.wendland_polynomial(1, -1)
