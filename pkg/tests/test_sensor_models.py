import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import golden_section_max, simpson_segment_integral
from uncmap.sensor_models import (U_MIN, SplineModel, UncertaintyVector,
                                  analytic_avg_loglik, derive_spline, fit_constant_scale,
                                  gaussian_loglik, laplace_loglik, laplace_pdf,
                                  occupancy_h, save_spline, load_spline, spline_cdf,
                                  spline_pdf)


class TestLogLikelihoods:
    def test_gaussian_zero_residual_unit_scale(self):
        assert gaussian_loglik([1.0], [1.0], [1.0]) == pytest.approx(
            -0.5 * math.log(2.0 * math.pi), abs=1e-9)

    def test_gaussian_unit_residual(self):
        assert gaussian_loglik([2.0], [1.0], [1.0]) == pytest.approx(
            -0.5 * (math.log(2.0 * math.pi) + 1.0), abs=1e-9)

    def test_laplace_zero_residual(self):
        assert laplace_loglik([1.0], [1.0], [1.0]) == pytest.approx(
            math.log(0.5), abs=1e-9)

    def test_laplace_spot_value(self):
        # residual 2 at scale 0.5: -(ln 1 + 4)
        assert laplace_loglik([3.0], [1.0], [0.5]) == pytest.approx(-4.0, abs=1e-9)

    def test_laplace_at_per_ray_maximizer(self):
        assert laplace_loglik([3.0], [1.0], [2.0]) == pytest.approx(
            -(math.log(4.0) + 1.0), abs=1e-9)

    def test_two_ray_additivity_is_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            yh = rng.uniform(0, 5, size=2)
            yt = rng.uniform(0, 5, size=2)
            u = rng.uniform(0.01, 2, size=2)
            for fn in (gaussian_loglik, laplace_loglik):
                whole = fn(yh, yt, u)
                parts = fn(yh[:1], yt[:1], u[:1]) + fn(yh[1:], yt[1:], u[1:])
                assert whole == parts

    @given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_additivity_over_arbitrary_splits(self, n_a, n_b, seed):
        rng = np.random.default_rng(seed)
        yh = rng.uniform(0, 8, size=n_a + n_b)
        yt = rng.uniform(0, 8, size=n_a + n_b)
        u = rng.uniform(1e-3, 2, size=n_a + n_b)
        for fn in (gaussian_loglik, laplace_loglik):
            whole = fn(yh, yt, u)
            parts = fn(yh[:n_a], yt[:n_a], u[:n_a]) + fn(yh[n_a:], yt[n_a:], u[n_a:])
            assert whole == pytest.approx(parts, rel=1e-12, abs=1e-12)

    def test_average_variant_divides_by_ray_count(self):
        yh = np.array([1.0, 2.0, 3.0])
        yt = np.array([1.1, 2.2, 2.7])
        u = np.array([0.5, 0.4, 0.3])
        for fn in (gaussian_loglik, laplace_loglik):
            assert fn(yh, yt, u, average=True) == pytest.approx(fn(yh, yt, u) / 3.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            gaussian_loglik([1.0, 2.0], [1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            laplace_loglik([1.0], [1.0], [0.0])
        with pytest.raises(ValueError):
            gaussian_loglik([1.0], [1.0], [-0.2])
        with pytest.raises(ValueError):
            laplace_loglik([], [], [])

    @pytest.mark.parametrize("fn", [gaussian_loglik, laplace_loglik])
    @pytest.mark.parametrize("residual", [0.07, 0.5, 2.3])
    def test_scale_maximizer_is_abs_residual(self, fn, residual):
        best = golden_section_max(lambda u: fn([residual], [0.0], [u]), 1e-4, 10.0)
        assert abs(best - residual) < 1e-6

    def test_fit_constant_scale(self):
        r = np.array([0.5, -0.5, 1.0, -1.0])
        assert fit_constant_scale(r, "laplace") == pytest.approx(0.75)
        assert fit_constant_scale(r, "gaussian") == pytest.approx(math.sqrt(0.625))
        assert fit_constant_scale(np.zeros(4), "laplace") == U_MIN

    def test_analytic_entropy_reference(self):
        assert analytic_avg_loglik("laplace", 0.2) == pytest.approx(
            -(math.log(0.4) + 1.0))
        # large-sample Monte-Carlo agreement, Gaussian case
        rng = np.random.default_rng(1)
        r = rng.normal(0, 0.3, size=200000)
        mc = gaussian_loglik(r, np.zeros_like(r), np.full(r.shape, 0.3), average=True)
        assert mc == pytest.approx(analytic_avg_loglik("gaussian", 0.3), abs=0.01)


class TestUncertaintyVector:
    def test_floors_at_u_min(self):
        v = UncertaintyVector(np.array([0.0, 0.5]), "laplace")
        assert v.values[0] == U_MIN and v.values[1] == 0.5

    def test_rejects_bad_kind_and_nonfinite(self):
        with pytest.raises(ValueError):
            UncertaintyVector(np.array([1.0]), "cauchy")
        with pytest.raises(ValueError):
            UncertaintyVector(np.array([np.nan]), "laplace")


class TestSpline:
    def test_unit_integral_by_quadrature(self, spline16):
        assert simpson_segment_integral(spline16, -4.0, 4.0) == pytest.approx(1.0, abs=1e-9)

    def test_exact_zero_at_and_beyond_support(self, spline16):
        for t in (-4.0, 4.0, -4.0001, 4.0001, -25.0, 25.0):
            assert spline_pdf(spline16, t) == 0.0
        assert spline_cdf(spline16, -4.0) == 0.0
        assert spline_cdf(spline16, 4.0) == 1.0
        assert spline_cdf(spline16, -9.0) == 0.0
        assert spline_cdf(spline16, 9.0) == 1.0

    def test_symmetry(self, spline16):
        t = np.linspace(-4, 4, 2003)
        np.testing.assert_allclose(spline16.pdf(t), spline16.pdf(-t), atol=1e-9)

    def test_cdf_midpoint_and_monotonicity(self, spline16):
        assert spline_cdf(spline16, 0.0) == pytest.approx(0.5, abs=1e-12)
        t = np.linspace(-4.5, 4.5, 5000)
        assert np.all(np.diff(spline16.cdf(t)) >= -1e-15)

    def test_cdf_matches_quadrature(self, spline16):
        rng = np.random.default_rng(3)
        for t in rng.uniform(-4, 4, size=100):
            quad = simpson_segment_integral(spline16, -4.0, float(t))
            assert abs(spline_cdf(spline16, float(t)) - quad) < 1e-8

    def test_peak_close_to_laplace(self, spline16):
        assert abs(spline_pdf(spline16, 0.0) - 0.5) < 0.1

    def test_l1_distance_to_laplace(self, spline16):
        t = np.linspace(-4, 4, 80001)
        err = np.abs(spline16.pdf(t) - laplace_pdf(t))
        l1 = np.trapezoid(err, t) if hasattr(np, "trapezoid") else np.trapz(err, t)
        assert l1 < 0.08

    def test_coefficients_nonnegative(self, spline16):
        assert np.all(spline16.coefficients >= 0.0)

    def test_derive_spline_validation(self):
        with pytest.raises(ValueError):
            derive_spline(6, 512)
        with pytest.raises(ValueError):
            derive_spline(15, 512)
        with pytest.raises(ValueError):
            derive_spline(16, 100)

    def test_derive_spline_deterministic(self, spline16):
        again = derive_spline(16, 512)
        np.testing.assert_array_equal(again.pdf_coeffs, spline16.pdf_coeffs)
        np.testing.assert_array_equal(again.cdf_coeffs, spline16.cdf_coeffs)

    def test_serialization_roundtrip(self, spline16, tmp_path):
        path = tmp_path / "spline.json"
        save_spline(spline16, path)
        loaded = load_spline(path)
        np.testing.assert_array_equal(loaded.pdf_coeffs, spline16.pdf_coeffs)
        np.testing.assert_array_equal(loaded.cdf_coeffs, spline16.cdf_coeffs)
        np.testing.assert_array_equal(loaded.breaks, spline16.breaks)
        t = np.linspace(-5, 9, 777)
        np.testing.assert_array_equal(occupancy_h(loaded, t), occupancy_h(spline16, t))

    def test_schema_check(self):
        with pytest.raises(Exception):
            SplineModel.from_json({"schema": 3})


class TestOccupancyCurve:
    def test_anchors(self, spline16):
        assert occupancy_h(spline16, -4.0) == 0.0
        assert occupancy_h(spline16, 0.0) == pytest.approx(0.5, abs=1e-12)
        for t in (8.0, 9.5, 50.0):
            assert occupancy_h(spline16, t) == pytest.approx(0.5, abs=1e-12)

    def test_peak_location_and_height(self, spline16):
        t = np.linspace(-5, 10, 30001)
        h = occupancy_h(spline16, t)
        assert 0.9 <= h.max() <= 1.0
        assert 1.5 <= t[np.argmax(h)] <= 3.0

    def test_bounded_and_continuous(self, spline16):
        t = np.linspace(-12, 16, 200001)
        h = occupancy_h(spline16, t)
        assert np.all(h >= 0.0) and np.all(h <= 1.0)
        # C1 spline: the curve has no jumps at this sampling
        assert np.max(np.abs(np.diff(h))) < 1e-3

    def test_scale_equivariance_of_normalization(self, spline16):
        d, y, u = 2.6, 2.0, 0.15
        t = (d - y) / u
        for lam in (0.5, 2.0, 7.3):
            t_scaled = (lam * d - lam * y) / (lam * u)
            assert occupancy_h(spline16, t_scaled) == pytest.approx(
                occupancy_h(spline16, t), rel=1e-12)
