import math

import numpy as np
import pytest

from ktlab.exponents import ExponentTuple, reduced_family_tuple
from ktlab.functions import GaussianPhaseSpace, GaussianSpaceTime
from ktlab.grids import GAUSS, Axis, GridSpec, sinh_stretched_interval
from ktlab.multilinear import sigma_exponent_tuple
from ktlab.norms import (
    DegenerateInputError,
    EndpointDivergenceError,
    dual_ratio,
    mixed_norm,
    strichartz_ratio,
)


def gauss_grid(lo=-6.0, hi=6.0, count=121):
    # uniform trapezoid: spectrally accurate for Gaussian-type integrands,
    # and its half-resolution subgrid stays accurate for the error estimate
    return GridSpec.uniform(1, lo, hi, count)


def separable_gaussian(t, x, v):
    return np.exp(-np.pi * (t[..., 0] ** 2 + x[..., 0] ** 2 + v[..., 0] ** 2))


class TestMixedNorm:
    def test_all_twos_matches_product_of_l2_norms(self):
        res = mixed_norm(separable_gaussian, (2, 2, 2),
                         (gauss_grid(), gauss_grid(), gauss_grid()))
        assert res.value == pytest.approx(2.0 ** (-0.75), rel=1e-10)

    def test_sup_in_v(self):
        res = mixed_norm(separable_gaussian, (2, 2, np.inf),
                         (gauss_grid(), gauss_grid(), gauss_grid(count=65)))
        # grid max realizes the sup (attained near v = 0)
        assert res.value == pytest.approx(2.0 ** (-0.5), rel=1e-4)

    def test_zero_function(self):
        res = mixed_norm(lambda t, x, v: np.zeros(t.shape[:-1]), (2, 2, 2),
                         (gauss_grid(count=8), gauss_grid(count=8), gauss_grid(count=8)))
        assert res.value == 0.0

    def test_plain_la_equals_diagonal_mixed_norm(self):
        f0 = GaussianPhaseSpace(1, x_width=0.9, v_width=1.3)
        for a in (1.5, 2.0, 3.0):
            res = mixed_norm(lambda x, v: f0(x, v), (a, a),
                             (gauss_grid(count=96), gauss_grid(count=96)),
                             error_estimate=False)
            assert res.value == pytest.approx(f0.lebesgue_norm(a), rel=1e-10)

    def test_power_transform_identity(self):
        # ||F^lam||_{a/lam} = ||F||_a^lam
        f0 = GaussianPhaseSpace(1)
        grids = (gauss_grid(count=80), gauss_grid(count=80))
        a = 2.0
        base = mixed_norm(lambda x, v: f0(x, v), (a, a), grids,
                          error_estimate=False).value
        for lam in (0.5, 2.0, 4.0 / 3.0):
            powered = mixed_norm(lambda x, v: f0(x, v) ** lam,
                                 (a / lam, a / lam), grids,
                                 error_estimate=False).value
            assert powered == pytest.approx(base**lam, rel=1e-8)

    def test_peak_normalization_survives_large_exponents(self):
        # raw powers would overflow: 1e30^40 = 1e1200
        res = mixed_norm(lambda x: 1e30 * np.exp(-np.pi * x[..., 0] ** 2),
                         (40.0,), (gauss_grid(-3.0, 3.0, 241),), error_estimate=False)
        assert np.isfinite(res.value)
        assert res.value == pytest.approx(1e30 * 40.0 ** (-1 / 80), rel=1e-6)
        assert res.peak == pytest.approx(1e30, rel=1e-4)

    def test_group_count_mismatch_rejected(self):
        with pytest.raises(DegenerateInputError):
            mixed_norm(separable_gaussian, (2, 2), (gauss_grid(),) * 3)

    def test_exponent_below_one_rejected(self):
        with pytest.raises(DegenerateInputError):
            mixed_norm(separable_gaussian, (2, 2, 0.5), (gauss_grid(),) * 3)

    def test_richardson_error_estimate_reported(self):
        res = mixed_norm(separable_gaussian, (2, 2, 2), (gauss_grid(),) * 3)
        assert res.error_estimate is not None
        assert res.error_estimate < 1e-6


class TestStrichartzRatio:
    BASELINE = ((9 * math.pi) / (4 * math.sqrt(3))) ** (1.0 / 3.0)

    def ratio_grids(self):
        t = [sinh_stretched_interval(1e6, 256)]
        x = [sinh_stretched_interval(4e6, 512)]
        v = GridSpec.uniform(1, -4.0, 4.0, 48, rule=GAUSS)
        return t, x, v

    def test_baseline_value_and_reproducibility(self):
        f0 = GaussianPhaseSpace(1)
        E = reduced_family_tuple(3, 1)
        t, x, v = self.ratio_grids()
        first = strichartz_ratio(f0, E, t, x, v)
        second = strichartz_ratio(f0, E, t, x, v)
        assert first == pytest.approx(second, abs=1e-10)
        # closed form derived by hand: ((9 pi) / (4 sqrt(3)))^{1/3}
        assert first == pytest.approx(self.BASELINE, rel=1e-5)

    def test_requires_r_equal_one(self):
        with pytest.raises(DegenerateInputError):
            strichartz_ratio(GaussianPhaseSpace(1), ExponentTuple(3, 3, 2, "3/2"),
                             *self.ratio_grids())

    def scaled_sweep(self, E):
        f0 = GaussianPhaseSpace(1)
        vals = []
        for mu in (0.25, 1.0, 4.0):
            for nu in (0.25, 1.0, 4.0):
                tg = GridSpec((Axis(-8 * mu / nu, 8 * mu / nu, 64, GAUSS),))
                xg = GridSpec((Axis(-8 * mu, 8 * mu, 64, GAUSS),))
                vg = GridSpec((Axis(-4 * nu, 4 * nu, 48, GAUSS),))
                vals.append(strichartz_ratio(f0.dilated(mu, nu), E, tg, xg, vg))
        vals = np.array(vals)
        return (vals.max() - vals.min()) / vals.mean()

    def test_scaling_invariance_for_admissible_tuple(self):
        assert self.scaled_sweep(reduced_family_tuple(3, 1)) < 1e-3

    def test_scaling_spread_for_inadmissible_tuple(self):
        # breaks 1/a = (1/r + 1/p)/2, so the two-parameter dilation sweep
        # picks up a closed-form power-law drift
        assert self.scaled_sweep(ExponentTuple(3, 3, 1, 2)) > 0.10


class TestDualRatio:
    def grids(self, v_radius=60.0):
        t = GridSpec.uniform(1, -8.0, 8.0, 64, rule=GAUSS)
        x = GridSpec.uniform(1, -8.0, 8.0, 64, rule=GAUSS)
        v = [sinh_stretched_interval(v_radius, 96)]
        return t, x, v

    def test_finite_and_stable_under_vbox_doubling(self):
        g = GaussianSpaceTime(1)
        E = sigma_exponent_tuple(2, 1)  # a' = 4
        t, x, _ = self.grids()
        small = dual_ratio(g, E, t, x, [sinh_stretched_interval(30.0, 96)], d=1)
        large = dual_ratio(g, E, t, x, [sinh_stretched_interval(60.0, 96)], d=1)
        assert small > 0
        assert abs(large - small) < 0.01 * small

    def test_homogeneity_degree_zero(self):
        E = sigma_exponent_tuple(2, 1)
        t, x, v = self.grids()
        g = GaussianSpaceTime(1)
        doubled = GaussianSpaceTime(1, amplitude=2.0)
        assert dual_ratio(doubled, E, t, x, v, d=1) == pytest.approx(
            dual_ratio(g, E, t, x, v, d=1), rel=1e-12)

    def test_endpoint_refused(self):
        # a' = d+1 exactly: the (x,v)-norm diverges
        E = reduced_family_tuple(3, 1)  # a = 3/2, a' = 3 > d+1 = 2 -> fine
        endpoint = ExponentTuple(2, "inf", 1, 2)  # a' = 2 = d+1
        t, x, v = self.grids()
        with pytest.raises(EndpointDivergenceError):
            dual_ratio(GaussianSpaceTime(1), endpoint, t, x, v, d=1)
        assert dual_ratio(GaussianSpaceTime(1), E, t, x, v, d=1) > 0
