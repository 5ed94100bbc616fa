import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracineq.errors import DomainError
from fracineq.quad import integrate
from fracineq.specfun import SpecfunAccuracy, beta, beta_rho, ln_gamma


class TestLnGamma:
    def test_known_values(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
        assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
        assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi),
                                              rel=1e-13)

    def test_against_stdlib_on_working_range(self):
        # independent oracle: math.lgamma; |log difference| bounds the
        # relative error of exp(result)
        for x in np.geomspace(0.1, 50.0, 300):
            assert abs(ln_gamma(float(x)) - math.lgamma(x)) <= 1e-12

    def test_monotone_from_two(self):
        xs = np.linspace(2.0, 60.0, 200)
        vals = [ln_gamma(float(x)) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.nan, math.inf])
    def test_domain_errors(self, bad):
        with pytest.raises(DomainError):
            ln_gamma(bad)


class TestBeta:
    def test_closed_forms(self):
        assert beta(2.0, 2.0) == pytest.approx(1.0 / 6.0, rel=1e-13)
        assert beta(1.0, 1.5) == pytest.approx(2.0 / 3.0, rel=1e-13)

    def test_right_member_coefficient_against_quadrature(self):
        # coefficient alpha*beta(alpha, alpha*s+1) at alpha=2, s=1/2;
        # oracle: direct quadrature of t**(alpha-1)*(1-t)**(alpha*s)
        alpha, s = 2.0, 0.5
        oracle = integrate(
            lambda t: t ** (alpha - 1.0) * (1.0 - t) ** (alpha * s),
            0.0, 1.0).value
        assert alpha * oracle == pytest.approx(1.0 / 3.0, abs=1e-10)
        assert alpha * beta(alpha, alpha * s + 1.0) == pytest.approx(
            1.0 / 3.0, rel=1e-12)

    @given(st.floats(0.5, 10.0), st.floats(0.5, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, a, b):
        assert abs(beta(a, b) - beta(b, a)) <= 1e-13 * beta(a, b)

    @given(st.floats(0.5, 10.0), st.floats(0.5, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, a, b):
        lhs = beta(a + 1.0, b)
        rhs = beta(a, b) * a / (a + b)
        assert lhs == pytest.approx(rhs, rel=1e-11)

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, 0.0), (-2.0, 3.0)])
    def test_domain_errors(self, a, b):
        with pytest.raises(DomainError):
            beta(a, b)


class TestBetaRho:
    def test_reduces_to_plain_integral(self):
        # a=b=1 collapses the integrand to rho*x**(rho-1)
        assert beta_rho(1.0, 1.0, 2.0) == pytest.approx(1.0, abs=1e-11)

    def test_rho_one_recovers_beta(self):
        assert beta_rho(2.0, 3.0, 1.0) == pytest.approx(1.0 / 12.0, abs=1e-11)

    def test_substitution_identity_at_rho_two(self):
        # oracle: quadrature of the defining integrand, compared against
        # the closed-form beta that the substitution w=x**rho predicts
        rho = 2.0
        oracle = integrate(
            lambda x: rho * (1.0 - x ** rho) ** 2.0 * (x ** rho) ** 1.0
            * x ** (rho - 1.0), 0.0, 1.0).value
        assert oracle == pytest.approx(1.0 / 12.0, abs=1e-10)
        assert beta_rho(2.0, 3.0, rho) == pytest.approx(beta(2.0, 3.0),
                                                        abs=1e-10)

    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 3.0])
    def test_collapse_across_rho(self, rho):
        for a in (0.5, 1.0, 2.0, 5.0):
            for b in (0.5, 1.0, 2.0, 5.0):
                assert abs(beta_rho(a, b, rho) - beta(a, b)) <= 1e-8

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            beta_rho(0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            beta_rho(1.0, 1.0, 0.0)


class TestAccuracyKnob:
    def test_validation(self):
        with pytest.raises(DomainError):
            SpecfunAccuracy(rel_tol=0.0)
        with pytest.raises(DomainError):
            SpecfunAccuracy(rel_tol=1.5)
        assert SpecfunAccuracy().rel_tol == 1e-12
