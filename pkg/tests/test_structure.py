"""Structure functions and path-regularity estimation."""

import numpy as np
import pytest

from pathreg.dsl import parse_kernel
from pathreg.sampling import Axis, Grid, PathSamples, sample_paths
from pathreg.structure import (
    axiswise_regularity,
    default_lags,
    estimate_path_regularity,
    structure_function,
)


def make_samples(values: np.ndarray, start=0.0, stop=1.0) -> PathSamples:
    grid = Grid((Axis(start, stop, values.shape[1]),))
    return PathSamples(
        grid=grid, samples=values, kernel="synthetic", seed=0, jitter_used=0.0
    )


class TestStructureFunction:
    def test_constant_paths_vanish(self):
        samples = make_samples(np.full((3, 257), 2.5))
        for m in (1, 2, 3):
            sf = structure_function(samples, m)
            assert all(v == 0.0 for v in sf.values)

    def test_linear_path_vanishes_at_second_order(self):
        x = np.linspace(0.0, 1.0, 257)
        samples = make_samples(np.stack([2.0 * x + 1.0, -x]))
        sf = structure_function(samples, 2)
        assert all(abs(v) < 1e-28 for v in sf.values)
        first = structure_function(samples, 1)
        assert all(v > 0 for v in first.values)

    def test_wiener_increments_match_lag(self):
        grid = Grid((Axis(0.25, 1.25, 4097),))
        samples = sample_paths(parse_kernel("wiener()"), grid, 200, 42)
        sf = structure_function(samples, 1)
        for lag, value in zip(sf.lags, sf.values):
            assert value / lag == pytest.approx(1.0, abs=0.1)

    def test_values_nonnegative_and_lags_in_range(self):
        grid = Grid((Axis(0.0, 1.0, 513),))
        samples = sample_paths(parse_kernel("se()"), grid, 50, 1)
        sf = structure_function(samples, 1)
        span = grid.axes[0].stop - grid.axes[0].start
        assert all(v >= 0 for v in sf.values)
        assert all(grid.axes[0].spacing <= l <= span / 4 for l in sf.lags)
        assert len(sf.lags) >= 4

    def test_lag_out_of_range_rejected(self):
        samples = make_samples(np.zeros((2, 64)))
        with pytest.raises(ValueError):
            structure_function(samples, 2, [40])

    def test_affine_addition_invariance_second_order(self):
        rng = np.random.default_rng(5)
        base = rng.standard_normal((8, 257))
        x = np.linspace(0.0, 1.0, 257)
        shifted = base + 3.0 * x - 0.7
        a = structure_function(make_samples(base), 2)
        b = structure_function(make_samples(shifted), 2)
        assert np.allclose(a.values, b.values, rtol=1e-10)
        const = structure_function(make_samples(base + 11.0), 1)
        orig = structure_function(make_samples(base), 1)
        assert np.allclose(const.values, orig.values, rtol=1e-10)

    def test_amplitude_scaling_shifts_log_values(self):
        rng = np.random.default_rng(6)
        base = make_samples(rng.standard_normal((8, 257)))
        scaled = make_samples(4.0 * base.samples)
        a = structure_function(base, 1)
        b = structure_function(scaled, 1)
        assert np.allclose(np.log(b.values), np.log(a.values) + 2 * np.log(4.0), atol=1e-12)

    def test_default_lags_short_grid_widens(self):
        lags = default_lags(128)
        assert len(lags) >= 4
        assert max(lags) <= 127 // 4


class TestEstimate:
    def test_requires_enough_draws(self):
        samples = make_samples(np.zeros((3, 257)))
        with pytest.raises(ValueError):
            estimate_path_regularity(samples)

    def test_degenerate_constant_input(self):
        samples = make_samples(np.ones((60, 257)))
        result = estimate_path_regularity(samples)
        assert result.degenerate

    def test_amplitude_equivariance(self):
        grid = Grid((Axis(0.25, 1.25, 1025),))
        samples = sample_paths(parse_kernel("matern(nu=0.5)"), grid, 60, 3)
        scaled = PathSamples(
            grid=grid,
            samples=37.0 * samples.samples,
            kernel=samples.kernel,
            seed=3,
            jitter_used=samples.jitter_used,
        )
        a = estimate_path_regularity(samples)
        b = estimate_path_regularity(scaled)
        assert b.s_hat == pytest.approx(a.s_hat, abs=1e-12)

    def test_affine_shift_invariance(self):
        grid = Grid((Axis(0.0, 1.0, 1025),))
        samples = sample_paths(parse_kernel("matern(nu=0.5)"), grid, 60, 3)
        x = grid.points()[:, 0]
        shifted = PathSamples(
            grid=grid,
            samples=samples.samples + 5.0,
            kernel=samples.kernel,
            seed=3,
            jitter_used=samples.jitter_used,
        )
        a = estimate_path_regularity(samples)
        b = estimate_path_regularity(shifted)
        assert b.s_hat == pytest.approx(a.s_hat, rel=1e-9)

    @pytest.mark.slow
    def test_consistency_with_theory(self):
        # sharp finite-order kernels at the pinned desk scale
        grid = Grid((Axis(0.25, 1.25, 4097),))
        cases = [
            ("wiener()", 0.5),
            ("matern(nu=0.5)", 0.5),
            ("matern(nu=1.5)", 1.5),
            ("matern(nu=2.5)", 2.5),
            ("wendland(d=1,n=0)", 0.5),
            ("wendland(d=1,n=1)", 1.5),
        ]
        for text, target in cases:
            samples = sample_paths(parse_kernel(text), grid, 200, 42)
            result = estimate_path_regularity(samples)
            assert result.s_hat is not None, text
            assert abs(result.s_hat - target) <= 0.15, (text, result.s_hat)

    def test_smooth_paths_saturate(self):
        grid = Grid((Axis(0.25, 1.25, 2049),))
        samples = sample_paths(parse_kernel("se()"), grid, 100, 42)
        result = estimate_path_regularity(samples)
        assert result.s_hat is None
        assert result.lower_bound is not None and result.lower_bound >= 4


class TestAxiswise:
    def test_tensor_axes_estimate_separately(self):
        expr = parse_kernel("tensor(wendland(d=1,n=0), wendland(d=1,n=1))")
        grid = Grid((Axis(0.0, 1.0, 128), Axis(0.0, 1.0, 128)))
        samples = sample_paths(expr, grid, 100, 42)
        first, second = axiswise_regularity(samples)
        assert first.s_hat == pytest.approx(0.5, abs=0.12)
        assert second.s_hat == pytest.approx(1.5, abs=0.2)

    def test_swapped_factors_swap_estimates(self):
        a = parse_kernel("tensor(wendland(d=1,n=0), wendland(d=1,n=1))")
        b = parse_kernel("tensor(wendland(d=1,n=1), wendland(d=1,n=0))")
        grid = Grid((Axis(0.0, 1.0, 96), Axis(0.0, 1.0, 96)))
        ra = axiswise_regularity(sample_paths(a, grid, 80, 5))
        rb = axiswise_regularity(sample_paths(b, grid, 80, 5))
        assert ra[0].s_hat == pytest.approx(rb[1].s_hat, abs=0.1)
        assert ra[1].s_hat == pytest.approx(rb[0].s_hat, abs=0.1)

    def test_smooth_isotropic_saturates_both_axes(self):
        grid = Grid((Axis(0.0, 1.0, 64), Axis(0.0, 1.0, 64)))
        samples = sample_paths(parse_kernel("se(dim=2)"), grid, 60, 9)
        first, second = axiswise_regularity(samples)
        assert first.s_hat is None and second.s_hat is None

    def test_requires_2d(self):
        grid = Grid((Axis(0.0, 1.0, 65),))
        samples = sample_paths(parse_kernel("se()"), grid, 60, 1)
        with pytest.raises(ValueError):
            axiswise_regularity(samples)
