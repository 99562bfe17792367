import math

import numpy as np
import pytest
from scipy.special import betaln

from cknlab.errors import DivergentNorm
from cknlab.minimizer import best_constant_radial
from cknlab.params import derive, validate
from cknlab.profiles import (AnalyticProfile, RadialProfile, barenblatt_mass,
                             default_grid, dilate_to_mass, el_residual, energy,
                             gradient_norm, quotient, w_gamma_star, w_star,
                             weighted_norm)
from cknlab.quadrature import sphere_area

# frozen reference: quotient of the explicit profile at (3, 0, 2), equal to
# pi^(1/3) 2^(1/6) by the Beta-integral evaluation in the oracle below
Q0_REFERENCE = 1.6439488100495983


def beta_oracle(mu, b, c, q):
    nu = mu / c
    return b ** (nu - q) * math.exp(betaln(nu, q - nu)) / c


class TestPointValues:
    def test_w_star_peak(self):
        pp = validate(3, 0.3, 1.8)
        assert w_star(pp)(0.0) == 1.0

    def test_w_star_at_one(self):
        pp = validate(3, 0.0, 2.0)
        assert w_star(pp)(1.0) == pytest.approx(0.5, abs=0)

    def test_w_star_fractional_weight(self):
        pp = validate(3, 0.5, 2.0)
        assert w_star(pp)(4.0) == pytest.approx(1.0 / 9.0, rel=1e-14)

    def test_optimizer_peak_value(self):
        pp = validate(3, 0.0, 2.0)
        assert w_gamma_star(pp)(0.0) == pytest.approx(4.0, rel=1e-14)

    def test_optimizer_is_scaled_w_star(self):
        pp = validate(3, 0.5, 2.0)
        ex = derive(pp)
        wg, ws = w_gamma_star(pp), w_star(pp)
        scale = (ex.a_gamma / ex.b_gamma) ** (1.0 / (pp.p - 1.0))
        lam = ex.b_gamma ** (-1.0 / (2.0 - pp.gamma))
        r = np.geomspace(1e-3, 1e3, 50)
        assert np.allclose(wg(r), scale * ws(lam * r), rtol=1e-13)

    def test_tail_asymptote(self):
        pp = validate(3, 0.5, 2.0)
        ex = derive(pp)
        wg = w_gamma_star(pp)
        tau = (2.0 - pp.gamma) / (pp.p - 1.0)
        r = 1e8
        assert wg(r) * r**tau == pytest.approx(
            ex.a_gamma ** (1.0 / (pp.p - 1.0)), rel=1e-8)

    def test_peak_identity(self):
        for d, gamma, p in [(3, 0.0, 2.0), (4, 0.25, 1.5), (5, 0.5, 1.2)]:
            pp = validate(d, gamma, p)
            ex = derive(pp)
            peak = w_gamma_star(pp)(0.0)
            assert peak ** (p - 1.0) == pytest.approx(
                p * (2.0 - gamma) / ex.eta, rel=1e-12)


class TestNorms:
    def test_norm_vs_beta_oracle(self):
        pp = validate(3, 0.0, 2.0)
        q = 2.0 * pp.p
        val = weighted_norm(w_star(pp), q, pp.gamma, pp)
        exact = (sphere_area(3) * beta_oracle(3.0, 1.0, 2.0, q)) ** (1.0 / q)
        assert val == pytest.approx(exact, rel=1e-9)

    def test_norm_vs_beta_oracle_weighted(self):
        pp = validate(4, 0.5, 1.6)
        q = pp.p + 1.0
        k = 1.0 / (pp.p - 1.0)
        val = weighted_norm(w_gamma_star(pp), q, pp.gamma, pp)
        prof = w_gamma_star(pp)
        exact = (sphere_area(4) * prof.amplitude**q *
                 beta_oracle(4 - 0.5, prof.b, 1.5, q * k)) ** (1.0 / q)
        assert val == pytest.approx(exact, rel=1e-10)

    def test_homogeneity(self):
        pp = validate(3, 0.25, 1.9)
        w = w_star(pp)
        scaled = w.scaled(3.7, 1.0)
        assert weighted_norm(scaled, 2.0 * pp.p, pp.gamma, pp) == pytest.approx(
            3.7 * weighted_norm(w, 2.0 * pp.p, pp.gamma, pp), rel=1e-11)

    def test_indicator_delegation(self):
        pp = validate(3, 0.5, 2.0)
        val = weighted_norm(lambda r: np.where(r <= 1.0, 1.0, 0.0),
                            1.0, pp.gamma, pp)
        assert val == pytest.approx(sphere_area(3) * 0.4, rel=1e-11)

    def test_divergent_norm_detected(self):
        pp = validate(3, 0.0, 2.0)
        slow = AnalyticProfile(1.0, 1.0, 2.0, 0.5)  # decays like r^{-1}
        with pytest.raises(DivergentNorm):
            weighted_norm(slow, 2.0, 0.0, pp)

    def test_grid_profile_norm_with_tail_model(self):
        pp = validate(3, 0.0, 2.0)
        w = w_star(pp)
        prof = w.sample()
        q = 2.0 * pp.p
        exact = (sphere_area(3) * beta_oracle(3.0, 1.0, 2.0, q)) ** (1.0 / q)
        val = weighted_norm(prof, q, pp.gamma, pp)
        assert val == pytest.approx(exact, rel=1e-5)


class TestGradientNorm:
    def test_matches_analytic_derivative_oracle(self):
        pp = validate(3, 0.0, 2.0)
        w = w_star(pp)
        val = gradient_norm(w, pp)
        # oracle: |w'|^2 = 4 r^2 (1+r^2)^(-4) integrated against r^2 dr
        exact = math.sqrt(sphere_area(3) * 4.0 * beta_oracle(5.0, 1.0, 2.0, 4.0))
        assert val == pytest.approx(exact, rel=1e-8)

    def test_constant_profile_zero(self):
        pp = validate(3, 0.0, 2.0)
        r = default_grid(1e-2, 1e2, 16)
        prof = RadialProfile(radii=r, values=np.ones_like(r))
        assert gradient_norm(prof, pp) == pytest.approx(0.0, abs=1e-14)

    def test_finite_difference_refinement(self):
        # centered differences on the graded grid: halving spacing halves
        # the error against the analytic-derivative oracle
        pp = validate(3, 0.0, 2.0)
        w = w_star(pp)
        exact = gradient_norm(w, pp)
        errs = []
        for ppd in (16, 32):
            r = default_grid(1e-4, 1e4, ppd)
            prof = RadialProfile(radii=r, values=w(r),
                                 tail_exponent=w.tail_exponent)
            errs.append(abs(gradient_norm(prof, pp) - exact))
        assert errs[1] <= errs[0] / 1.8


class TestQuotient:
    def test_reference_value(self):
        pp = validate(3, 0.0, 2.0)
        assert quotient(w_star(pp), pp) == pytest.approx(Q0_REFERENCE, rel=1e-11)

    def test_dilation_invariance(self):
        pp = validate(3, 0.5, 2.0)
        w = w_star(pp)
        q0 = quotient(w, pp)
        for lam in (0.5, 2.0):
            assert quotient(w.scaled(1.0, lam), pp) == pytest.approx(q0, rel=1e-8)

    def test_scaling_invariance(self):
        pp = validate(4, 0.25, 1.5)
        w = w_gamma_star(pp)
        assert quotient(w.scaled(2.3, 1.0), pp) == pytest.approx(
            quotient(w, pp), rel=1e-10)

    def test_interpolation_consistency(self):
        # |w|_{2p} <= |w|_{2*}^vartheta |w|_{p+1}^(1-vartheta) on test profiles
        pp = validate(3, 0.5, 2.0)
        ex = derive(pp)
        for amp, b, kf in [(1.0, 1.0, 1.0), (2.0, 0.3, 1.4), (0.5, 2.0, 1.1)]:
            w = AnalyticProfile(amp, b, 2.0 - pp.gamma, kf / (pp.p - 1.0))
            n2p = weighted_norm(w, 2 * pp.p, pp.gamma, pp)
            ncrit = weighted_norm(w, ex.two_star_gamma, pp.gamma, pp)
            np1 = weighted_norm(w, pp.p + 1, pp.gamma, pp)
            assert n2p <= ncrit**ex.vartheta * np1 ** (1 - ex.vartheta) * (1 + 1e-12)


class TestEnergy:
    def test_zero_energy_at_optimizer(self):
        for d, gamma, p in [(3, 0.0, 2.0), (3, 0.5, 2.0)]:
            pp = validate(d, gamma, p)
            _, J = best_constant_radial(pp)
            E, G = energy(w_gamma_star(pp), pp, J)
            assert abs(E) < 1e-6 * G

    def test_nonnegative_on_random_profiles(self):
        pp = validate(3, 0.5, 2.0)
        _, J = best_constant_radial(pp)
        rng = np.random.default_rng(7)
        for _ in range(20):
            amp = rng.uniform(0.2, 3.0)
            b = rng.uniform(0.2, 3.0)
            k = rng.uniform(1.0, 2.0) / (pp.p - 1.0)
            w = AnalyticProfile(amp, b, 2.0 - pp.gamma, k)
            E, G = energy(w, pp, J)
            assert E > -1e-9 * G

    def test_monotone_in_amplitude(self):
        pp = validate(3, 0.0, 2.0)
        w = w_star(pp)
        Gs = [energy(w.scaled(c, 1.0), pp, 1.0)[1] for c in (0.5, 1.0, 2.0)]
        assert Gs[0] < Gs[1] < Gs[2]


class TestELResidual:
    def test_exact_solution(self):
        pp = validate(3, 0.5, 2.0)
        assert el_residual(w_gamma_star(pp), pp) < 1e-10

    def test_wrong_normalization_detected(self):
        pp = validate(3, 0.5, 2.0)
        assert el_residual(w_star(pp), pp) > 0.1

    def test_perturbation_detected(self):
        pp = validate(3, 0.0, 2.0)
        w = w_gamma_star(pp)
        r = default_grid()
        prof = RadialProfile(radii=r,
                             values=w(r) * (1.0 + 0.01 * np.sin(np.log(r))),
                             derivs=None)
        assert el_residual(prof, pp) > 1e-3


class TestBarrier:
    def test_power_law_barrier_holds(self):
        pp = validate(3, 0.5, 2.0)
        w = w_gamma_star(pp)
        tau = (2.0 - pp.gamma) / (pp.p - 1.0)
        coarse = default_grid(1e-3, 1e3, 32)
        C = 1.01 * float(np.max(w(coarse) * (1.0 + coarse) ** tau))
        fine = default_grid(1e-4, 1e4, 64)
        assert np.all(w(fine) <= C * (1.0 + fine) ** (-tau))


class TestMassHelpers:
    def test_dilate_to_mass_hits_target(self):
        pp = validate(3, 0.5, 2.0)
        M = barenblatt_mass(pp)
        for target in (0.5 * M, M, 3.0 * M):
            w = dilate_to_mass(pp, target)
            got = weighted_norm(w, 2 * pp.p, pp.gamma, pp) ** (2 * pp.p)
            assert got == pytest.approx(target, rel=1e-9)

    def test_dilate_preserves_optimality(self):
        pp = validate(3, 0.5, 2.0)
        w = dilate_to_mass(pp, 2.0 * barenblatt_mass(pp))
        assert quotient(w, pp) == pytest.approx(quotient(w_gamma_star(pp), pp),
                                                rel=1e-10)


class TestSerialization:
    def test_json_round_trip_bit_exact(self):
        pp = validate(3, 0.5, 2.0)
        prof = w_gamma_star(pp).sample(default_grid(1e-2, 1e2, 16))
        text = prof.to_json()
        back = RadialProfile.from_json(text)
        assert np.array_equal(back.radii, prof.radii)
        assert np.array_equal(back.values, prof.values)
        assert np.array_equal(back.derivs, prof.derivs)
        assert back.tail_exponent == prof.tail_exponent
        assert back.to_json() == text

    def test_csv_round_trip(self):
        pp = validate(3, 0.0, 2.0)
        prof = w_star(pp).sample(default_grid(1e-1, 1e1, 8))
        back = RadialProfile.from_csv(prof.to_csv())
        assert np.array_equal(back.radii, prof.radii)
        assert np.array_equal(back.values, prof.values)

    def test_validation_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            RadialProfile(radii=np.array([0.0, 1.0]), values=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            RadialProfile(radii=np.array([1.0, 1.0]), values=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            RadialProfile(radii=np.array([1.0, 2.0]),
                          values=np.array([1.0, np.inf]))

    def test_tail_slope_check(self):
        pp = validate(3, 0.0, 2.0)
        w = w_star(pp)
        good = w.sample()
        assert good.tail_slope_ok()
        bad = RadialProfile(radii=good.radii, values=good.values,
                            tail_exponent=2.0 * w.tail_exponent)
        assert not bad.tail_slope_ok()
