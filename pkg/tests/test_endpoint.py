import math

import numpy as np
import pytest
from scipy.integrate import quad

from ktlab.endpoint import (
    DegenerateInputError,
    FourierSideConfig,
    GrowthTable,
    SampleFloorError,
    angular_integral,
    angular_integral_exact_d2,
    angular_schedule_mc,
    divergence_study,
    polar_factorize,
    radial_integral,
    vtrunc_lhs,
    vtrunc_rhs,
    vtrunc_rhs_mc,
)
from ktlab.functions import GaussianSpaceTime, make_counterexample_g


def d1_truncated_norm(V):
    """sqrt(2) asinh(V), the exact truncated norm for the standard Gaussian."""
    return math.sqrt(2.0) * math.asinh(V)


class TestGrowthTable:
    def test_single_row_flags_insufficient_data(self):
        table = GrowthTable(params=[2.0], values=[1.0])
        assert table.insufficient_data
        with pytest.raises(DegenerateInputError):
            table.fit()

    def test_log_fit_recovers_planted_slope(self):
        params = np.array([8.0, 16.0, 32.0, 64.0])
        table = GrowthTable(params=params, values=3.0 + 1.7 * np.log(params))
        fit = table.fit()
        assert fit.slope == pytest.approx(1.7, abs=1e-12)
        assert fit.intercept == pytest.approx(3.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_power_fit(self):
        params = np.array([1.0, 2.0, 4.0, 8.0])
        table = GrowthTable(params=params, values=0.5 * params**1.25, model="power")
        fit = table.fit()
        assert fit.slope == pytest.approx(1.25, abs=1e-12)

    def test_strictly_increasing(self):
        assert GrowthTable(params=[1, 2], values=[1.0, 2.0]).strictly_increasing
        assert not GrowthTable(params=[1, 2], values=[2.0, 2.0]).strictly_increasing


class TestPolarFactorization:
    def test_diagonal_case(self):
        pf = polar_factorize([[2.0, 0.0], [0.0, 3.0]])
        assert pf.det_k == pytest.approx(6.0)
        assert tuple(pf.radii) == (2.0, 3.0)
        assert pf.det_theta == pytest.approx(1.0)

    def test_collinear_degeneracy(self):
        pf = polar_factorize([[1.0, 1.0], [2.0, 2.0]])
        assert pf.det_theta == pytest.approx(0.0, abs=1e-15)
        assert pf.det_k == pytest.approx(0.0, abs=1e-14)

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            polar_factorize([[0.0, 0.0], [1.0, 0.0]])

    @pytest.mark.parametrize("d", [2, 3])
    def test_identity_on_random_inputs(self, d):
        gen = np.random.default_rng(5)
        for _ in range(100):
            xis = gen.standard_normal((d, d))
            pf = polar_factorize(xis)
            assert pf.det_k == pytest.approx(np.prod(pf.radii) * pf.det_theta,
                                             rel=1e-12)


class TestRadialIntegral:
    def test_d1_divergence_rate(self):
        for delta in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            assert radial_integral(1, delta) / math.log(1.0 / delta) == pytest.approx(
                2.0, abs=1e-8)

    def test_d1_at_e_inverse(self):
        assert radial_integral(1, math.exp(-1.0)) == pytest.approx(2.0, rel=1e-12)

    def test_higher_d_stays_bounded(self):
        # d = 2: (1 - delta)^2 -> 1; d = 3: ((1 - delta^2)/2)^3 -> 1/8
        assert radial_integral(2, 1e-8) == pytest.approx(1.0, rel=1e-6)
        assert radial_integral(3, 1e-8) == pytest.approx(1.0 / 8.0, rel=1e-6)

    def test_range_check(self):
        with pytest.raises(DegenerateInputError):
            radial_integral(1, 0.0)
        with pytest.raises(DegenerateInputError):
            radial_integral(1, 1.0)


class TestAngularIntegral:
    def test_exact_d2_against_independent_quadrature(self):
        # I(eps) = 2 pi int over {|sin phi| > eps} d phi / |sin phi|
        for eps in (0.3, 0.1, 0.01):
            def integrand(phi):
                s = abs(math.sin(phi))
                return 1.0 / s if s > eps else 0.0
            ref, _ = quad(integrand, 0.0, 2 * math.pi, limit=400, points=[math.pi])
            assert angular_integral_exact_d2(eps) == pytest.approx(2 * math.pi * ref,
                                                                   rel=1e-6)

    def test_superlevel_empty_at_threshold_one(self):
        assert angular_integral(2, 1.0)[0] == 0.0

    def test_d2_slope_is_8pi(self):
        eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        values = np.array([angular_integral_exact_d2(e) for e in eps])
        table = GrowthTable(params=1.0 / eps, values=values)
        fit = table.fit()
        assert abs(fit.slope - 8 * math.pi) < 0.05 * 8 * math.pi

    def test_d3_mc_strictly_increasing(self):
        table = angular_schedule_mc(3, [1e-1, 1e-2 * 5, 1e-2, 1e-3], n_samples=200_000,
                                    seed=3)
        assert table.strictly_increasing

    def test_d3_mc_worker_count_invariant(self):
        one = angular_schedule_mc(3, [1e-1, 1e-2], n_samples=100_000, seed=9, workers=1)
        four = angular_schedule_mc(3, [1e-1, 1e-2], n_samples=100_000, seed=9, workers=4)
        assert np.array_equal(one.values, four.values)
        assert np.array_equal(one.stderrs, four.stderrs)

    def test_sample_floor_enforced(self):
        with pytest.raises(SampleFloorError):
            angular_schedule_mc(3, [1e-4], n_samples=1000)

    def test_eps_range_checked(self):
        with pytest.raises(DegenerateInputError):
            angular_schedule_mc(3, [1.5], n_samples=10_000)


class TestTruncatedIdentity:
    def test_d1_gaussian_lhs_matches_closed_form(self):
        g = GaussianSpaceTime(1)
        for V in (1.0, 2.0, 4.0):
            lhs, _ = vtrunc_lhs(g, V, oracle=True, error_estimate=False)
            assert lhs == pytest.approx(d1_truncated_norm(V), rel=1e-6)

    def test_d1_gaussian_rhs_matches_closed_form(self):
        g = GaussianSpaceTime(1)
        cfg = FourierSideConfig(d=1)
        for V in (1.0, 2.0, 4.0):
            rhs, _ = vtrunc_rhs(g, V, cfg, error_estimate=False)
            assert rhs == pytest.approx(d1_truncated_norm(V), rel=1e-2)

    def test_v_zero_gives_zero(self):
        g = GaussianSpaceTime(1)
        assert vtrunc_lhs(g, 0.0)[0] == 0.0
        assert vtrunc_rhs(g, 0.0, FourierSideConfig(d=1))[0] == 0.0

    def test_monotone_in_v(self):
        g = make_counterexample_g(1)
        v2, _ = vtrunc_lhs(g, 2.0, n_x=32, n_v_radial=24, error_estimate=False)
        v4, _ = vtrunc_lhs(g, 4.0, n_x=32, n_v_radial=24, error_estimate=False)
        assert v4 > v2 > 0

    def test_d1_bump_identity_within_reported_errors(self):
        g = make_counterexample_g(1)
        cfg = FourierSideConfig(d=1)
        for V in (1.0, 2.0):
            lhs, lhs_err = vtrunc_lhs(g, V, n_x=32, n_v_radial=24)
            rhs, rhs_err = vtrunc_rhs(g, V, cfg)
            assert abs(lhs - rhs) <= lhs_err + rhs_err + 1e-12

    def test_d3_mc_rhs_agrees_with_gaussian_truncation(self):
        # low-dimensional sanity of the seeded sampler: reproducibility and
        # a positive value with a sane standard error
        g = GaussianSpaceTime(3)
        cfg = FourierSideConfig(d=3)
        v1, e1 = vtrunc_rhs_mc(g, 1.0, cfg, n_samples=50_000, seed=17)
        v2, _ = vtrunc_rhs_mc(g, 1.0, cfg, n_samples=50_000, seed=17, workers=4)
        assert v1 == v2
        assert v1 > 0
        assert e1 < v1

    def test_negative_v_rejected(self):
        with pytest.raises(DegenerateInputError):
            vtrunc_lhs(GaussianSpaceTime(1), -1.0)


class TestDivergenceStudy:
    def test_d1_log_slope_is_sqrt2(self):
        g = GaussianSpaceTime(1)
        table, rows = divergence_study(g, 1, [8, 16, 32, 64, 128, 256, 512],
                                       oracle=True, error_estimate=False)
        assert table.strictly_increasing
        fit = table.fit()
        assert abs(fit.slope - math.sqrt(2.0)) < 0.05 * math.sqrt(2.0)
        assert fit.r_squared > 0.999
        lo, hi = fit.slope_ci95
        assert lo > 0

    def test_d2_doubling_increments_bounded_below(self):
        g = GaussianSpaceTime(2)
        table, _ = divergence_study(g, 2, [1, 2, 4, 8, 16], oracle=True,
                                    n_x=40, n_v_radial=32, n_v_angular=32,
                                    error_estimate=False)
        increments = np.diff(table.values)
        assert np.all(increments > 0.5)

    def test_length_one_schedule(self):
        g = GaussianSpaceTime(1)
        table, rows = divergence_study(g, 1, [4.0], oracle=True, error_estimate=False)
        assert table.insufficient_data
        assert len(rows["V"]) == 1

    def test_rhs_columns_filled_on_request(self):
        g = GaussianSpaceTime(1)
        _, rows = divergence_study(g, 1, [1.0, 2.0], with_rhs=True, oracle=True,
                                   error_estimate=False)
        assert np.all(np.isfinite(rows["rhs"]))
