import math
from fractions import Fraction

import numpy as np
import pytest

from ktlab.functions import GaussianSlice, GaussianSpaceTime
from ktlab.grids import GridSpec, sinh_stretched_interval
from ktlab.multilinear import (
    DegeneracyError,
    bilinear_bound_check,
    block_jacobian_det_exact,
    interpolated_bound_check,
    jacobian_factor,
    mhls_check,
    mhls_homogeneity_identity,
    nonendpoint_sweep,
    product_form,
    sigma_exponent_tuple,
    validate_time_tuple,
)
from ktlab.norms import dual_ratio


def random_slices(gen, d, count):
    return [GaussianSlice(d, amplitude=gen.uniform(0.5, 2.0),
                          center=tuple(gen.uniform(-1.0, 1.0, d)),
                          width=gen.uniform(0.7, 1.5))
            for _ in range(count)]


def random_times(gen, count, min_gap=0.2):
    while True:
        ts = np.sort(gen.uniform(-2.0, 2.0, count))
        if np.min(np.diff(ts)) > min_gap:
            return gen.permutation(ts)


class TestProductForm:
    def test_two_function_exact_identity(self):
        # (x, v) -> (x + t1 v, x + t2 v) is an exact change of variables:
        # the form equals ||g1||_1 ||g2||_1 / |t1 - t2|^d
        s = GaussianSlice(1)
        form = product_form([s, s], [0.0, 1.0])
        assert form == pytest.approx(s.norm(1) ** 2, rel=1e-6)

    @pytest.mark.parametrize("d", [1, 2])
    def test_two_function_identity_random(self, d):
        gen = np.random.default_rng(2)
        for _ in range(5):
            s1, s2 = random_slices(gen, d, 2)
            t1, t2 = random_times(gen, 2)
            form = product_form([s1, s2], [t1, t2])
            expected = s1.norm(1) * s2.norm(1) / jacobian_factor(t1, t2, d)
            assert form == pytest.approx(expected, rel=1e-6)

    def test_zero_factor_kills_the_form(self):
        s = GaussianSlice(1)
        z = GaussianSlice(1, amplitude=0.0)
        assert product_form([s, z], [0.0, 1.0]) == 0.0

    def test_time_shift_invariance(self):
        # shifting all t_j by s is the measure-preserving shear x -> x - s v
        gen = np.random.default_rng(3)
        slices = random_slices(gen, 1, 3)
        ts = np.array([-1.0, 0.3, 1.2])
        base = product_form(slices, ts)
        shifted = product_form(slices, ts + 0.7)
        assert shifted == pytest.approx(base, rel=1e-6)

    def test_coincident_times_rejected(self):
        s = GaussianSlice(1)
        with pytest.raises(DegeneracyError):
            product_form([s, s], [1.0, 1.0])

    def test_slice_count_must_match(self):
        s = GaussianSlice(1)
        with pytest.raises(DegeneracyError):
            product_form([s], [0.0, 1.0])


class TestJacobian:
    def test_values(self):
        assert jacobian_factor(0.0, 1.0, 3) == 1.0
        assert jacobian_factor(1.0, 3.0, 2) == 4.0

    def test_degenerate_pair(self):
        with pytest.raises(DegeneracyError):
            jacobian_factor(1.0, 1.0, 2)

    def test_block_determinant_exact_on_rationals(self):
        gen = np.random.default_rng(4)
        for _ in range(20):
            ti = Fraction(int(gen.integers(-9, 9)), int(gen.integers(1, 9)))
            tj = Fraction(int(gen.integers(-9, 9)), int(gen.integers(1, 9)))
            for d in (1, 2, 3):
                assert block_jacobian_det_exact(ti, tj, d) == (tj - ti) ** d


class TestBoundChecks:
    @pytest.mark.parametrize("d", [1, 2])
    def test_bilinear_bounds_hold_on_random_corpus(self, d):
        gen = np.random.default_rng(10 + d)
        for _ in range(50):
            slices = random_slices(gen, d, d + 1)
            ts = random_times(gen, d + 1)
            pair = tuple(gen.choice(d + 1, size=2, replace=False))
            report = bilinear_bound_check(slices, ts, pair)
            assert report.margin >= -1e-3 * report.bound

    @pytest.mark.parametrize("d", [1, 2])
    def test_interpolated_bounds_hold_on_random_corpus(self, d):
        gen = np.random.default_rng(20 + d)
        for _ in range(50):
            slices = random_slices(gen, d, d + 1)
            ts = random_times(gen, d + 1)
            report = interpolated_bound_check(slices, ts)
            assert report.margin >= -1e-3 * report.bound

    def test_d1_interpolated_collapses_to_bilinear(self):
        # single pair, kernel exponent 1, slice norm L^1: the two bounds agree
        s = GaussianSlice(1)
        interp = interpolated_bound_check([s, s], [0.0, 1.0])
        bil = bilinear_bound_check([s, s], [0.0, 1.0], (0, 1))
        assert interp.bound == pytest.approx(bil.bound, rel=1e-12)
        assert interp.margin == pytest.approx(0.0, abs=1e-6 * interp.bound)

    def test_amplitude_scaling_leaves_ratio_invariant(self):
        gen = np.random.default_rng(30)
        slices = random_slices(gen, 1, 2)
        ts = [0.0, 1.3]
        base = bilinear_bound_check(slices, ts, (0, 1))
        scaled = bilinear_bound_check(
            [GaussianSlice(1, 3.0 * slices[0].amplitude, slices[0].center,
                           slices[0].width), slices[1]], ts, (0, 1))
        assert scaled.form / scaled.bound == pytest.approx(base.form / base.bound,
                                                           rel=1e-9)

    def test_clustering_stress_keeps_bound_above_form(self):
        s = GaussianSlice(2)
        for h in (1e-1, 1e-2, 1e-3):
            report = interpolated_bound_check([s, s, s], [0.0, h, 1.0])
            assert report.bound / report.form >= 1.0

    def test_interpolated_needs_d_plus_one_factors(self):
        s = GaussianSlice(2)
        with pytest.raises(DegeneracyError):
            interpolated_bound_check([s, s], [0.0, 1.0])


class TestMhls:
    def test_homogeneity_identity_exact(self):
        for d in (1, 2, 3):
            for sigma in ("5/4", "3/2", "2"):
                assert mhls_homogeneity_identity(d, sigma)

    def test_empirical_constant_stable_under_box_doubling(self):
        small = mhls_check(1, 2.0, T=6.0, n_per_axis=96)
        large = mhls_check(1, 2.0, T=12.0, n_per_axis=192)
        c_small = small.form / small.bound
        c_large = large.form / large.bound
        assert abs(c_large - c_small) < 0.02 * c_small

    def test_zero_profile(self):
        report = mhls_check(1, 1.5, profile=GaussianSlice(1, amplitude=0.0))
        assert report.form == 0.0

    def test_endpoint_sigma_refused(self):
        with pytest.raises(DegeneracyError):
            mhls_check(2, 1.0)


class TestMinkowskiStep:
    @pytest.mark.parametrize("sigma", [1.5, 2.0])
    def test_truncated_inequality(self, sigma):
        # ||rho* g||_{sigma(d+1)}^{d+1} <= int (int prod g(t_j, x+t_j v)^sigma
        # dx dv)^{1/sigma} dt on a fixed truncation box, d = 1
        d = 1
        g = GaussianSpaceTime(d)
        box = GridSpec.uniform(2, -5.0, 5.0, 81)
        lhs_pow = box.integrate(
            lambda p: g.adjoint_closed_form(p[:, :1], p[:, 1:]) ** (sigma * (d + 1)))
        lhs = lhs_pow ** (1.0 / sigma)

        tgrid = GridSpec.uniform(2, -6.0, 6.0, 49)
        tpts, twts = tgrid.points_weights()

        def inner(t1, t2):
            return box.integrate(
                lambda p: (g(t1, p[:, :1] + t1 * p[:, 1:])
                           * g(t2, p[:, :1] + t2 * p[:, 1:])) ** sigma)

        inner_vals = np.array([inner(t1, t2) for t1, t2 in tpts])
        rhs = float(np.dot(twts, inner_vals ** (1.0 / sigma)))
        assert lhs <= rhs * (1 + 1e-6)


class TestNonendpointSweep:
    def family(self, d=1):
        return [GaussianSpaceTime(d).dilated(mt, mx)
                for mt in (0.5, 1.0, 2.0) for mx in (0.5, 1.0, 2.0)]

    def ratio_fn(self, g, E):
        t_grid = GridSpec.uniform(1, -8.0, 8.0, 64, rule="gauss-legendre")
        x_grid = GridSpec.uniform(1, -8.0, 8.0, 64, rule="gauss-legendre")
        v_group = [sinh_stretched_interval(60.0, 96)]
        return dual_ratio(g, E, t_grid, x_grid, v_group, d=1)

    def test_constants_monotone_toward_endpoint(self):
        rows = nonendpoint_sweep(self.family(), 1, ["2", "3/2", "5/4", "11/10"],
                                 self.ratio_fn)
        assert rows.shape == (4, 3)
        assert np.all(np.isfinite(rows[:, 2]))
        assert np.all(np.diff(rows[:, 2]) >= 0)  # sigma decreasing toward 1

    def test_singleton_schedule(self):
        rows = nonendpoint_sweep(self.family(), 1, ["2"], self.ratio_fn)
        assert rows.shape == (1, 3)

    def test_singleton_family_equals_dual_ratio(self):
        g = GaussianSpaceTime(1)
        E = sigma_exponent_tuple("2", 1)
        rows = nonendpoint_sweep([g], 1, ["2"], self.ratio_fn)
        assert rows[0, 2] == pytest.approx(self.ratio_fn(g, E), rel=1e-12)


class TestValidation:
    def test_time_tuple_checks(self):
        with pytest.raises(DegeneracyError):
            validate_time_tuple([1.0])
        with pytest.raises(DegeneracyError):
            validate_time_tuple([1.0, 1.0, 2.0])
        assert validate_time_tuple([0.0, 1.0]).shape == (2,)

    def test_sigma_exponent_tuple_duals(self):
        # sigma = 2, d = 1: a' = 4, p' = 2, q' = 4/3
        from ktlab.exponents import dualize

        E = sigma_exponent_tuple("2", 1)
        qp, pp, ap = dualize(E)
        assert str(ap) == "4"
        assert str(pp) == "2"
        assert str(qp) == "4/3"
