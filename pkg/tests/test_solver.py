"""Objective terms, analytic gradients against finite differences, and
the conjugate-gradient solve."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from nfholo import (
    ApertureGrid,
    FrequencyGrid,
    HoloPair,
    SolverParams,
    five_point_scene,
    gradient,
    objective,
    rasterize,
    rmse,
    simulate_scatter,
    smooth_abs,
    smooth_abs_grad,
    solve_ncg,
    tv_gradient,
    tv_norm,
    tv_value,
    volume_for_aperture,
)
from tests.conftest import random_cube


@pytest.fixture
def small_pair():
    """3x4x4 volume, 3 frequencies: the finite-difference reference size."""
    aperture = ApertureGrid(8, 8, 3e-3, 3e-3)
    freqs = FrequencyGrid(72e9, 76e9, 3)
    volume = volume_for_aperture(aperture, 3, 4, 4, 0.3, 0.32)
    return HoloPair(aperture, freqs, volume)


def directional_derivative(f, x, h, eps=1e-6):
    return (f(x + eps * h) - f(x - eps * h)) / (2 * eps)


class TestSmoothAbs:
    def test_zero_value(self):
        assert smooth_abs(0.0, 1e-4) == pytest.approx(1e-2)

    def test_large_magnitude_taylor_bound(self):
        nu = 1e-6
        x = 10.0 + 0.0j
        rel = (smooth_abs(x, nu) - abs(x)) / abs(x)
        assert 0 < rel < nu / (2 * abs(x) ** 2) * 1.001

    @settings(max_examples=50, deadline=None)
    @given(re=st.floats(-1e6, 1e6), im=st.floats(-1e6, 1e6))
    def test_gradient_magnitude_bounded_by_one(self, re, im):
        # strictly < 1 in exact arithmetic; float64 rounding can land a
        # couple of ulps above once |x|^2 + nu rounds to |x|^2
        assert abs(smooth_abs_grad(re + 1j * im, 1e-8)) <= 1.0 + 1e-15

    def test_gradient_matches_finite_difference(self):
        nu = 1e-3
        x = np.array([0.3 - 0.7j])
        g = smooth_abs_grad(x, nu)[0]
        for h in (1.0, 1.0j, (1 + 1j) / np.sqrt(2)):
            fd = directional_derivative(lambda v: smooth_abs(v, nu).sum(), x, np.array([h]))
            assert fd == pytest.approx((h.conjugate() * g).real, rel=1e-6)


class TestTotalVariation:
    def test_constant_cube_zero(self):
        assert tv_norm(np.full((3, 4, 5), 2.0 - 1.0j)) == 0.0

    def test_interior_spike_six(self):
        cube = np.zeros((3, 3, 3), dtype=complex)
        cube[1, 1, 1] = 1.0
        assert tv_norm(cube) == pytest.approx(6.0)

    def test_matches_independent_loop(self, rng):
        cube = random_cube(rng, (3, 4, 5))
        total = 0.0
        for iz in range(3):
            for iy in range(4):
                for ix in range(5):
                    if iz + 1 < 3:
                        total += abs(cube[iz + 1, iy, ix] - cube[iz, iy, ix])
                    if iy + 1 < 4:
                        total += abs(cube[iz, iy + 1, ix] - cube[iz, iy, ix])
                    if ix + 1 < 5:
                        total += abs(cube[iz, iy, ix + 1] - cube[iz, iy, ix])
        assert tv_norm(cube) == pytest.approx(total, rel=1e-12)

    def test_smoothed_value_upper_bounds_exact(self, rng):
        cube = random_cube(rng, (4, 4, 4))
        assert tv_value(cube, 1e-8) >= tv_norm(cube)

    def test_gradient_matches_finite_difference(self, rng):
        nu = 1e-4
        cube = random_cube(rng, (4, 5, 6))
        grad = tv_gradient(cube, nu)
        for _ in range(4):
            h = random_cube(rng, (4, 5, 6))
            fd = directional_derivative(lambda v: tv_value(v, nu), cube, h)
            analytic = np.vdot(h, grad).real
            assert fd == pytest.approx(analytic, rel=1e-5)

    def test_rejects_non_cube(self):
        with pytest.raises(ValueError):
            tv_norm(np.zeros((3, 3)))


class TestObjective:
    def test_perfect_fit_zero(self, small_pair, rng):
        image = random_cube(rng, small_pair.image_shape)
        data = small_pair.project(image)
        params = SolverParams(lam_l1=0.0, lam_tv=0.0, nu=1e-12)
        assert objective(image, data, small_pair, params) == pytest.approx(0.0, abs=1e-18)

    def test_zero_image_gives_data_energy(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        params = SolverParams(lam_l1=0.5, lam_tv=0.5, nu=1e-12)
        zero = np.zeros(small_pair.image_shape, complex)
        value = objective(zero, data, small_pair, params, smoothed=False)
        assert value == pytest.approx(np.sum(np.abs(data) ** 2), rel=1e-12)

    def test_matches_independent_recomputation(self, small_pair, rng):
        image = random_cube(rng, small_pair.image_shape)
        data = random_cube(rng, small_pair.data_shape)
        params = SolverParams(lam_l1=0.3, lam_tv=0.7, nu=1e-5)
        expected = (
            np.sum(np.abs(small_pair.project(image) - data) ** 2)
            + 0.3 * np.sum(np.sqrt(np.abs(image) ** 2 + 1e-5))
            + 0.7 * tv_value(image, 1e-5)
        )
        assert objective(image, data, small_pair, params) == pytest.approx(expected, rel=1e-12)

    def test_unresolved_params_rejected(self, small_pair, rng):
        with pytest.raises(ValueError, match="unresolved"):
            objective(
                np.zeros(small_pair.image_shape, complex),
                random_cube(rng, small_pair.data_shape),
                small_pair,
                SolverParams(),
            )


class TestGradient:
    def test_zero_image_is_scaled_backprojection(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        params = SolverParams(lam_l1=0.0, lam_tv=0.0, nu=1e-12)
        g = gradient(np.zeros(small_pair.image_shape, complex), data, small_pair, params)
        assert_allclose(g, -2.0 * small_pair.backproject(data), atol=1e-14)

    @pytest.mark.parametrize("lam_l1", [0.0, 0.1])
    @pytest.mark.parametrize("lam_tv", [0.0, 0.1])
    def test_matches_finite_difference(self, small_pair, rng, lam_l1, lam_tv):
        params = SolverParams(lam_l1=lam_l1, lam_tv=lam_tv, nu=1e-6)
        image = random_cube(rng, small_pair.image_shape)
        data = random_cube(rng, small_pair.data_shape)
        g = gradient(image, data, small_pair, params)
        for _ in range(3):
            h = random_cube(rng, small_pair.image_shape)
            fd = directional_derivative(
                lambda v: objective(v, data, small_pair, params), image, h, eps=1e-7
            )
            analytic = np.vdot(h, g).real
            assert abs(fd - analytic) < 1e-5 * max(abs(analytic), 1e-9)

    def test_paper_weighted_pair_refused(self, rng):
        aperture = ApertureGrid(8, 8, 3e-3, 3e-3)
        freqs = FrequencyGrid(72e9, 76e9, 3)
        volume = volume_for_aperture(aperture, 3, 4, 4, 0.3, 0.32)
        paper = HoloPair(aperture, freqs, volume, weighting="paper")
        params = SolverParams(lam_l1=0.0, lam_tv=0.0, nu=1e-12)
        with pytest.raises(ValueError, match="adjoint"):
            gradient(
                np.zeros(paper.image_shape, complex),
                random_cube(rng, paper.data_shape),
                paper,
                params,
            )


class TestSolveNcg:
    def test_zero_data_converges_to_zero_image(self, small_pair):
        data = np.zeros(small_pair.data_shape, complex)
        image, report = solve_ncg(data, small_pair, SolverParams(lam_l1=0.1, lam_tv=0.0, nu=1e-9))
        assert_allclose(image, 0.0)
        assert report.status == "converged"

    def test_smoothed_objective_nonincreasing(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        _, report = solve_ncg(data, small_pair, SolverParams(max_outer=25))
        trace = np.array(report.objective_smoothed)
        assert report.iterations > 0
        assert np.all(np.diff(trace) <= 1e-12 * np.abs(trace[:-1]))

    def test_least_squares_gradient_tolerance(self, small_pair, rng):
        image = random_cube(rng, small_pair.image_shape)
        data = small_pair.project(image)
        params = SolverParams(lam_l1=0.0, lam_tv=0.0, nu=1e-12, max_outer=400, grad_tol=1e-5)
        recovered, report = solve_ncg(data, small_pair, params)
        assert report.status == "gradient_tolerance"
        assert np.linalg.norm(small_pair.project(recovered) - data) < 1e-3 * np.linalg.norm(data)

    def test_data_scaling_scales_solution(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        params = SolverParams(lam_l1=0.0, lam_tv=0.0, nu=1e-12, max_outer=15, grad_tol=0.0)
        sol1, _ = solve_ncg(data, small_pair, params)
        sol2, _ = solve_ncg(2.5 * data, small_pair, params)
        assert_allclose(sol2, 2.5 * sol1, rtol=1e-8, atol=1e-12)

    def test_cs_beats_backprojection_on_undersampled_scene(self):
        from nfholo import apply_mask, mask_uniform_random

        aperture = ApertureGrid(32, 32, 3e-3, 3e-3)
        freqs = FrequencyGrid(72e9, 76e9, 8)
        volume = volume_for_aperture(aperture, 8, 16, 16, 0.3, 0.44)
        scene = five_point_scene(volume)
        truth = rasterize(scene, volume)
        mask = mask_uniform_random(aperture, 0.3, (4, 2), seed=0)
        masked = apply_mask(simulate_scatter(scene, aperture, freqs), mask)
        pair = HoloPair(aperture, freqs, volume, mask=mask)
        cs_image, report = solve_ncg(masked, pair, SolverParams(max_outer=25))
        assert rmse(truth, cs_image) < rmse(truth, pair.backproject(masked))
        trace = np.array(report.objective_smoothed)
        assert np.all(np.diff(trace) <= 1e-12 * np.abs(trace[:-1]))

    def test_line_search_failure_reported(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        params = SolverParams(
            lam_l1=0.0, lam_tv=0.0, nu=1e-12, initial_step=1e30, max_backtracks=1
        )
        image, report = solve_ncg(data, small_pair, params)
        assert report.status == "line_search_failure"
        assert_allclose(image, 0.0)  # no step was ever accepted

    def test_report_traces_aligned(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        _, report = solve_ncg(data, small_pair, SolverParams(max_outer=5, grad_tol=0.0))
        n = report.iterations
        assert n == 5
        assert len(report.objective) == len(report.objective_smoothed) == n
        assert len(report.grad_norm) == len(report.seconds) == n
        assert report.wall_clock >= sum(report.seconds) * 0.5

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SolverParams(alpha=0.7)
        with pytest.raises(ValueError):
            SolverParams(beta=1.2)
        with pytest.raises(ValueError):
            SolverParams(lam_l1=-0.5)
        with pytest.raises(ValueError):
            SolverParams(nu=0.0)

    def test_resolve_fills_data_driven_defaults(self, small_pair, rng):
        data = random_cube(rng, small_pair.data_shape)
        resolved = SolverParams().resolve(small_pair, data)
        peak = np.max(np.abs(small_pair.backproject(data)))
        assert resolved.is_resolved
        assert resolved.lam_l1 == pytest.approx(1e-2 * peak)
        assert resolved.nu == pytest.approx(1e-15 * peak**2, rel=1e-6)
