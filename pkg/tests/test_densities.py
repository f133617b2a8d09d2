import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import argrelmax
from scipy.stats import norm

from distrep.densities import (
    BandwidthSelector,
    Glucodensity,
    KernelKind,
    default_prob_grid,
    default_support_grid,
    density_to_quantile,
    empirical_quantile,
    estimate_glucodensity,
    rule_of_thumb_bandwidth,
    select_bandwidth,
)
from distrep.errors import DegenerateSample, GridTooCoarse

from conftest import make_series


def test_default_grids():
    g = default_support_grid()
    assert g.size == 721 and g[0] == 40 and g[-1] == 400
    np.testing.assert_allclose(np.diff(g), 0.5)
    p = default_prob_grid()
    assert p.size == 500 and p[0] == 0.001 and p[-1] == 0.999


class TestRuleOfThumb:
    def test_hand_value(self, rng):
        x = rng.normal(size=100)
        x = 10 * (x - x.mean()) / x.std(ddof=1)
        # 1.06 * 10 * 100**(-1/5) = 10.6 / 10**0.4
        assert rule_of_thumb_bandwidth(x) == pytest.approx(4.21994, abs=1e-4)

    def test_single_sample(self):
        with pytest.raises(DegenerateSample):
            rule_of_thumb_bandwidth([5.0])

    def test_constant_sample(self):
        with pytest.raises(DegenerateSample):
            rule_of_thumb_bandwidth([5.0, 5.0, 5.0])

    @pytest.mark.parametrize("c", [0.1, 2.0, 37.5])
    def test_scale_homogeneity(self, rng, c):
        x = rng.gamma(3.0, 10.0, size=57)
        assert rule_of_thumb_bandwidth(c * x) == pytest.approx(c * rule_of_thumb_bandwidth(x), rel=1e-12)

    def test_accepts_series(self):
        s = make_series([90, 100, 110, 120])
        assert rule_of_thumb_bandwidth(s) == rule_of_thumb_bandwidth([90, 100, 110, 120])


class TestKde:
    def test_normal_sample_matches_pdf(self):
        x = np.random.default_rng(1).normal(120, 15, size=10_000)
        g = estimate_glucodensity(x)
        truth = norm.pdf(g.support_grid, 120, 15)
        assert np.max(np.abs(g.values - truth)) < 0.002

    def test_mixture_modes(self):
        rng = np.random.default_rng(2)
        x = np.where(rng.random(10_000) < 0.5, rng.normal(90, 5, 10_000), rng.normal(180, 10, 10_000))
        g = estimate_glucodensity(x)
        # oracle: local maxima of the analytic mixture density
        fine = np.linspace(40, 400, 36001)
        pdf = 0.5 * norm.pdf(fine, 90, 5) + 0.5 * norm.pdf(fine, 180, 10)
        true_modes = fine[argrelmax(pdf)[0]]
        est_modes = g.support_grid[argrelmax(g.values)[0]]
        assert len(true_modes) == 2
        for m in true_modes:
            assert np.min(np.abs(est_modes - m)) <= 3.0
        assert np.min(np.abs(true_modes - 90)) < 0.1 and np.min(np.abs(true_modes - 180)) < 0.1

    def test_repeated_value_peaks_there(self):
        g = estimate_glucodensity(np.full(50, 123.0), bandwidth=2.0)
        assert g.support_grid[np.argmax(g.values)] == 123.0

    def test_unit_mass_even_near_boundary(self, rng):
        x = rng.normal(45, 8, size=500)
        g = estimate_glucodensity(x)
        assert g.integral() == pytest.approx(1.0, abs=1e-6)
        assert np.all(g.values >= 0)

    def test_degenerate(self):
        with pytest.raises(DegenerateSample):
            estimate_glucodensity(np.full(10, 100.0))

    def test_grid_too_coarse(self, rng):
        with pytest.raises(GridTooCoarse):
            estimate_glucodensity(rng.normal(100, 10, 50), grid=np.linspace(40, 400, 37), bandwidth=2.0)

    def test_epanechnikov(self, rng):
        g = estimate_glucodensity(rng.normal(150, 20, 2000), kernel=KernelKind.EPANECHNIKOV)
        assert g.integral() == pytest.approx(1.0, abs=1e-6)
        assert abs(g.support_grid[np.argmax(g.values)] - 150) < 8

    @pytest.mark.parametrize("selector", [BandwidthSelector.LSCV, BandwidthSelector.LIKELIHOOD_CV])
    def test_cv_selectors_near_rule_of_thumb_for_normal_data(self, selector):
        x = np.random.default_rng(5).normal(100, 12, size=600)
        h = select_bandwidth(x, selector)
        assert 0.4 < h / rule_of_thumb_bandwidth(x) < 2.5

    def test_location_equivariance_of_argmax(self, rng):
        x = rng.normal(140, 20, 800)
        h = rule_of_thumb_bandwidth(x)
        a = estimate_glucodensity(x, bandwidth=h)
        b = estimate_glucodensity(x + 25.0, bandwidth=h)
        assert a.support_grid[np.argmax(a.values)] + 25.0 == b.support_grid[np.argmax(b.values)]


class TestEmpiricalQuantile:
    def test_inf_definition(self):
        q = empirical_quantile([4, 1, 3, 2], np.array([0.5]))
        assert q.values[0] == 2

    def test_small_cases(self):
        p = np.array([0.1, 0.25, 0.26, 0.75, 0.76, 0.99])
        np.testing.assert_array_equal(empirical_quantile([1, 2, 3, 4], p).values, [1, 1, 2, 3, 4, 4])

    def test_constant(self):
        q = empirical_quantile(np.full(17, 88.0))
        assert np.all(q.values == 88.0)

    def test_normal_975(self):
        x = np.random.default_rng(3).normal(size=100_000)
        q = empirical_quantile(x, np.array([0.975]))
        assert q.values[0] == pytest.approx(1.96, abs=0.03)

    def test_shift_is_exact(self, rng):
        x = rng.normal(120, 30, 333)
        a = empirical_quantile(x)
        b = empirical_quantile(x + 17.0)
        np.testing.assert_array_equal(b.values, a.values + 17.0)

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            empirical_quantile([1, 2], np.array([0.0, 0.5]))

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.floats(40, 400, allow_nan=False), min_size=1, max_size=300))
    def test_nondecreasing_and_in_range(self, xs):
        q = empirical_quantile(xs)
        assert np.all(np.diff(q.values) >= 0)
        assert q.values.min() >= min(xs) and q.values.max() <= max(xs)


class TestDensityToQuantile:
    def test_uniform(self):
        grid = default_support_grid()
        a, b = 100.0, 200.0
        vals = np.where((grid >= a) & (grid <= b), 1.0 / (b - a), 0.0)
        g = Glucodensity(grid, vals / np.trapezoid(vals, grid), 1.0)
        q = density_to_quantile(g)
        expected = a + q.prob_grid * (b - a)
        assert np.max(np.abs(q.values - expected)) <= 0.5

    def test_round_trip_with_empirical(self):
        x = np.random.default_rng(4).normal(150, 25, 20_000)
        g = estimate_glucodensity(x)
        kq = density_to_quantile(g)
        eq = empirical_quantile(x)
        assert np.max(np.abs(kq.values - eq.values)) < 2 * g.bandwidth

    def test_point_mass_limit(self):
        g = estimate_glucodensity(np.full(30, 222.0), bandwidth=0.5)
        q = density_to_quantile(g)
        # 3 bandwidths of kernel tail plus one grid step of discretization
        assert np.all(np.abs(q.values - 222.0) <= 3 * 0.5 + 0.5)

    def test_small_bandwidth_converges_to_empirical(self):
        x = np.random.default_rng(8).normal(130, 20, 250)
        fine = np.linspace(40, 400, 3601)
        g = estimate_glucodensity(x, grid=fine, bandwidth=0.1)
        gap = np.max(np.abs(density_to_quantile(g).values - empirical_quantile(x).values))
        assert gap < 0.5

    def test_gapped_density_inverts_through_flat_cdf(self):
        grid = default_support_grid()
        vals = norm.pdf(grid, 80, 3) + norm.pdf(grid, 250, 3)
        g = Glucodensity(grid, vals / np.trapezoid(vals, grid), 1.0)
        q = density_to_quantile(g, np.array([0.125, 0.25, 0.49, 0.51, 0.75]))
        # equal halves: p = 0.125 is the lower quartile of the first component
        assert abs(q.values[0] - (80 - 3 * 0.6745)) < 0.3
        assert abs(q.values[1] - 80) < 0.3
        assert q.values[2] < 90 and q.values[3] > 240
        assert abs(q.values[4] - 250) < 0.3

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(45, 395), min_size=3, max_size=80, unique=True))
    def test_output_nondecreasing_and_within_support(self, xs):
        g = estimate_glucodensity(np.array(xs), bandwidth=max(rule_of_thumb_bandwidth(xs), 0.5))
        assert g.integral() == pytest.approx(1.0, abs=1e-6)
        q = density_to_quantile(g)
        assert np.all(np.diff(q.values) >= 0)
        assert q.values[0] >= 40 and q.values[-1] <= 400
