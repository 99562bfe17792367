import math

import numpy as np
import pytest
from scipy.special import betaln, gamma as gamma_fn

from cknlab.errors import NaNEncountered, NonConvergent
from cknlab.quadrature import (RadialQuadrature, integrate,
                               power_law_weighted_integral, sphere_area)


def beta_oracle(mu, b, c, q):
    """Independent Beta-function closed form for the tail integrals."""
    nu = mu / c
    return b ** (nu - q) * math.exp(betaln(nu, q - nu)) / c


class TestSphereArea:
    def test_unit_two_sphere(self):
        assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)

    def test_three_sphere(self):
        assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)

    def test_circle(self):
        assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)


class TestIntegrate:
    @pytest.mark.parametrize("d,gamma", [(3, 0.0), (3, 0.5), (3, 1.9),
                                         (4, 1.0), (5, 0.25)])
    def test_gamma_function_self_test(self, d, gamma):
        val = integrate(lambda r: np.exp(-r), d, gamma)
        assert val == pytest.approx(gamma_fn(d - gamma), rel=1e-12)

    def test_indicator_power_rule(self):
        val = integrate(lambda r: np.where(r <= 1.0, 1.0, 0.0), 3, 0.5)
        assert val == pytest.approx(0.4, rel=1e-12)

    @pytest.mark.parametrize("d,gamma,b,q", [
        (3, 0.0, 0.5, 4.0), (3, 0.5, 0.7, 5.0), (5, 0.25, 1.3, 7.5),
        (3, 0.0, 1.0, 2.01), (3, 0.5, 0.9, 1.8),
    ])
    def test_barenblatt_integrand_vs_beta_oracle(self, d, gamma, b, q):
        c = 2.0 - gamma
        val = integrate(lambda r: (b + r**c) ** (-q), d, gamma)
        assert val == pytest.approx(beta_oracle(d - gamma, b, c, q), rel=1e-10)

    def test_closed_form_helper_matches_oracle(self):
        assert power_law_weighted_integral(2.5, 0.7, 1.5, 4.0) == pytest.approx(
            beta_oracle(2.5, 0.7, 1.5, 4.0), rel=1e-14)

    def test_linearity(self):
        f = lambda r: np.exp(-r)
        g = lambda r: (1.0 + r**2) ** (-3.0)
        lhs = integrate(lambda r: 2.5 * f(r) - 0.7 * g(r), 3, 0.3)
        rhs = 2.5 * integrate(f, 3, 0.3) - 0.7 * integrate(g, 3, 0.3)
        assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_refinement_monotonicity(self):
        # tightening the tolerance never worsens the Beta-oracle discrepancy
        exact = beta_oracle(3.0, 0.5, 2.0, 4.0)
        f = lambda r: (0.5 + r**2) ** (-4.0)
        errs = []
        for tol in (1e-5, 1e-7, 1e-9, 1e-11):
            scheme = RadialQuadrature(rel_tol=tol)
            errs.append(abs(integrate(f, 3, 0.0, scheme) - exact))
        for a, b in zip(errs, errs[1:]):
            assert b <= a + 1e-15

    def test_weight_exponent_consistency(self):
        f = lambda r: np.exp(-r)
        v1 = integrate(f, 3, 0.7)
        v2 = integrate(lambda r: np.exp(-r) * r ** (-0.7), 3, 0.0)
        assert v1 == pytest.approx(v2, rel=1e-11)

    def test_error_estimate_is_returned(self):
        val, err = integrate(lambda r: np.exp(-r), 3, 0.0, return_error=True)
        assert err < 1e-10 * abs(val)

    def test_divergent_integrand_raises(self):
        # constant f makes the tail integral diverge
        with pytest.raises((NonConvergent, NaNEncountered)):
            integrate(lambda r: np.ones_like(r), 3, 0.0)

    def test_nan_integrand_raises(self):
        with pytest.raises(NaNEncountered):
            integrate(lambda r: np.full_like(r, np.nan), 3, 0.0)

    def test_gamma_ge_d_rejected(self):
        with pytest.raises(ValueError):
            integrate(lambda r: np.exp(-r), 3, 3.0)

    def test_panels_structure(self):
        scheme = RadialQuadrature()
        panels = scheme.panels
        assert len(panels) == 2
        (iv0, n0, w0), (iv1, n1, w1) = panels
        assert iv0 == (0.0, 1.0) and iv1[0] == 1.0 and math.isinf(iv1[1])
        assert np.all(w0 > 0) and np.all(w1 > 0)
        assert np.all((n0 > 0) & (n0 <= 1.0)) and np.all(n1 >= 1.0)
