"""Estimator and comparison tests, including the sign-convention calibration."""

import math

import numpy as np
import pytest

from qlgburgers.collision import CollisionParams, predicted_coefficients_1d
from qlgburgers.experiments import (
    DensityTrace,
    analytic_config_for,
    experimental_viscosity,
    l2_compare_2d,
    mse_compare,
    run_fdm_1d,
    run_fdm_2d,
    run_qlg_1d,
    run_qlg_2d,
    shock_formation_step,
    shock_onset_step,
    shock_steepness,
    steepness_sweep,
    viscosity_sweep,
)
from qlgburgers.analytic import evaluate_on_grid
from qlgburgers.lattice import AXIS_SYMMETRIC, Grid1D, Grid2D, predicted_coefficients_2d

P3 = CollisionParams(theta=math.pi / 3)


def lattice_grid(n):
    return Grid1D(n_x=n, length_x=float(n))


class TestDensityTrace:
    def test_uniform_stride_enforced(self):
        g = lattice_grid(8)
        with pytest.raises(ValueError, match="stride"):
            DensityTrace(rho=np.ones((3, 8)), steps=np.array([0, 1, 3]), grid=g)

    def test_times(self):
        g = Grid1D(n_x=8, length_x=2.0)
        tr = DensityTrace(rho=np.ones((3, 8)), steps=np.array([0, 2, 4]), grid=g)
        np.testing.assert_allclose(tr.times(), [0.0, 2 * g.dt, 4 * g.dt])


class TestExperimentalViscosity:
    def test_calibration_on_fdm_trace(self):
        # ground-truth: reference solver with known (c_s, nu); the
        # pde-consistent variant recovers nu within 2 percent, the literal
        # + sign does not -- this pins the estimator convention
        grid = lattice_grid(64)
        theta = 1.3
        params = CollisionParams(theta=theta)
        coeffs = predicted_coefficients_1d(params, grid.dx, grid.dt)
        trace, div = run_fdm_1d(
            grid, coeffs.c_s, coeffs.nu, 1.0, 0.005, steps=400, stride=1, substeps=4
        )
        assert div is None
        est = experimental_viscosity(trace, params, variant="pde_consistent")
        # the one-sigma filter keeps just under half the points here; the
        # recovery is far inside the 2 percent band regardless
        assert est.kept_fraction > 0.4
        assert est.value == pytest.approx(coeffs.nu, rel=0.02)
        literal = experimental_viscosity(trace, params, variant="literal")
        assert abs(literal.value - coeffs.nu) > abs(est.value - coeffs.nu)

    def test_calibration_with_explicit_alpha(self):
        # the estimator also runs on traces with no collision params at all
        grid = lattice_grid(64)
        c_s, nu = 0.25, 0.04
        trace, _ = run_fdm_1d(grid, c_s, nu, 1.0, 0.005, steps=400, stride=1, substeps=4)
        est = experimental_viscosity(trace, alpha=c_s * grid.dt / grid.dx)
        assert est.value == pytest.approx(nu, rel=0.02)

    def test_uniform_trace_gives_no_estimate(self):
        grid = lattice_grid(32)
        trace = run_qlg_1d(grid, P3, 1.2, 0.0, steps=8, stride=1)
        est = experimental_viscosity(trace, P3)
        assert est.value is None
        assert est.n_skipped_steps == 8
        assert est.kept_fraction == 0.0

    def test_qlg_trace_matches_prediction(self):
        grid = lattice_grid(64)
        params = CollisionParams(theta=1.0)
        coeffs = predicted_coefficients_1d(params, grid.dx, grid.dt)
        trace = run_qlg_1d(grid, params, 1.0, 0.005, steps=300, stride=1)
        est = experimental_viscosity(trace, params)
        assert est.value == pytest.approx(coeffs.nu, rel=0.05)

    def test_requires_consecutive_snapshots(self):
        grid = lattice_grid(32)
        trace = run_qlg_1d(grid, P3, 1.0, 0.01, steps=10, stride=2)
        with pytest.raises(ValueError, match="stride"):
            experimental_viscosity(trace, P3)

    def test_requires_1d(self):
        grid = Grid2D(n_x=8, n_y=8, ds=1.0)
        trace = run_qlg_2d(grid, P3, AXIS_SYMMETRIC, 1.0, 0.01, steps=4, stride=1)
        with pytest.raises(ValueError, match="1D"):
            experimental_viscosity(trace, P3)

    def test_exactly_one_alpha_source(self):
        grid = lattice_grid(32)
        trace = run_qlg_1d(grid, P3, 1.0, 0.01, steps=4, stride=1)
        with pytest.raises(ValueError, match="exactly one"):
            experimental_viscosity(trace)
        with pytest.raises(ValueError, match="exactly one"):
            experimental_viscosity(trace, P3, alpha=0.3)


class TestShockSteepness:
    def test_uniform_trace_zero(self):
        grid = lattice_grid(32)
        trace = run_qlg_1d(grid, P3, 1.1, 0.0, steps=5, stride=1)
        assert shock_steepness(trace) == pytest.approx(0.0, abs=1e-12)

    def test_two_point_front(self):
        # rho = (..., 1+eps, 1-eps, ...) has a single jump of 2 eps, so
        # Delta = c * 2 eps
        g = Grid1D(n_x=16, length_x=2.0)
        eps = 0.05
        rho = np.ones(16)
        rho[:8] = 1 + eps
        rho[8:] = 1 - eps
        trace = DensityTrace(rho=rho[None, :], steps=np.array([0]), grid=g)
        assert shock_steepness(trace) == pytest.approx(g.c * 2 * eps, rel=1e-12)

    def test_monotone_in_window_length(self):
        grid = Grid1D(n_x=64, length_x=2.0)
        params = CollisionParams(theta=1.45)
        long_trace = run_qlg_1d(grid, params, 1.0, 0.4, steps=2000, stride=1)
        short = DensityTrace(
            rho=long_trace.rho[:201], steps=long_trace.steps[:201], grid=grid, params=params
        )
        assert shock_steepness(long_trace) >= shock_steepness(short)


class TestShockMarkers:
    def test_formation_after_onset(self):
        grid = Grid1D(n_x=64, length_x=2.0)
        trace = run_qlg_1d(grid, P3, 1.0, 0.4, steps=300, stride=1)
        onset = shock_onset_step(trace)
        formation = shock_formation_step(trace)
        assert onset is not None
        assert onset <= formation

    def test_onset_none_for_smooth_run(self):
        grid = Grid1D(n_x=64, length_x=2.0)
        trace = run_qlg_1d(grid, CollisionParams(theta=1.55), 1.0, 0.005, steps=50, stride=1)
        assert shock_onset_step(trace) is None


class TestMseCompare:
    def test_zero_against_own_samples(self):
        grid = Grid1D(n_x=32, length_x=2.0)
        cfg = analytic_config_for(grid, P3, 1.0, 0.2)
        steps = np.arange(0, 33, 8)
        rho = evaluate_on_grid(cfg, grid.positions(), steps * grid.dt)
        trace = DensityTrace(rho=rho, steps=steps, grid=grid, params=P3)
        series = mse_compare(trace, cfg)
        np.testing.assert_allclose(series.values, 0.0, atol=1e-20)

    def test_grid_mismatch_rejected(self):
        grid = Grid1D(n_x=32, length_x=2.0)
        other = Grid1D(n_x=32, length_x=4.0)
        cfg = analytic_config_for(other, P3, 1.0, 0.2)
        trace = run_qlg_1d(grid, P3, 1.0, 0.2, steps=4, stride=1)
        with pytest.raises(ValueError, match="mismatch"):
            mse_compare(trace, cfg)

    def test_corrected_beats_yepez_after_shock(self):
        grid = Grid1D(n_x=64, length_x=2.0)
        trace = run_qlg_1d(grid, P3, 1.0, 0.4, steps=256, stride=4)
        mse_corr = mse_compare(trace, analytic_config_for(grid, P3, 1.0, 0.4, "corrected"))
        mse_yep = mse_compare(trace, analytic_config_for(grid, P3, 1.0, 0.4, "yepez"))
        t_shock = shock_formation_step(trace)
        after = trace.steps >= t_shock
        wins = np.count_nonzero(mse_corr.values[after] < mse_yep.values[after])
        assert wins / np.count_nonzero(after) >= 0.9


class TestL2Compare2D:
    def test_identical_traces_zero(self):
        grid = Grid2D(n_x=16, n_y=16, ds=1.0)
        trace = run_qlg_2d(grid, P3, AXIS_SYMMETRIC, 1.0, 0.1, steps=10, stride=2)
        series = l2_compare_2d(trace, trace, rho_b=1.0)
        np.testing.assert_allclose(series.values, 0.0, atol=1e-15)

    def test_uniform_field_is_nan(self):
        grid = Grid2D(n_x=8, n_y=8, ds=1.0)
        qlg = run_qlg_2d(grid, P3, AXIS_SYMMETRIC, 1.0, 0.0, steps=2, stride=1)
        coeffs = predicted_coefficients_2d(AXIS_SYMMETRIC, P3, 1.0, 1.0)
        fdm, _ = run_fdm_2d(grid, coeffs, 1.0, 0.0, steps=2, stride=1)
        series = l2_compare_2d(qlg, fdm, rho_b=1.0)
        assert np.all(np.isnan(series.values))

    def test_mismatch_rejected(self):
        g1 = Grid2D(n_x=8, n_y=8, ds=1.0)
        g2 = Grid2D(n_x=16, n_y=8, ds=1.0)
        a = run_qlg_2d(g1, P3, AXIS_SYMMETRIC, 1.0, 0.1, steps=2, stride=1)
        b = run_qlg_2d(g2, P3, AXIS_SYMMETRIC, 1.0, 0.1, steps=2, stride=1)
        with pytest.raises(ValueError, match="mismatch"):
            l2_compare_2d(a, b, rho_b=1.0)

    def test_1d_embedded_reduction(self):
        # with the axis-aligned set and a y-constant start the 2D relative
        # L2 against the reference solver equals the 1D one to round-off
        n, steps, stride = 32, 40, 4
        params = CollisionParams(theta=1.1)
        g1 = lattice_grid(n)
        c = predicted_coefficients_1d(params, g1.dx, g1.dt)
        qlg1 = run_qlg_1d(g1, params, 1.0, 0.05, steps, stride=stride)
        fdm1, _ = run_fdm_1d(g1, c.c_s, c.nu, 1.0, 0.05, steps, stride=stride, substeps=4)
        num = np.sqrt(np.sum((qlg1.rho - fdm1.rho) ** 2, axis=1))
        den = np.sqrt(np.sum((qlg1.rho - 1.0) ** 2, axis=1))

        g2 = Grid2D(n_x=n, n_y=8, ds=1.0)
        coeffs2 = predicted_coefficients_2d(AXIS_SYMMETRIC, params, 1.0, 1.0)
        # y-constant runs need a y-independent start: rho_a cos(2 pi j / N_y)
        # is absent only in the 1D-style initializer, so build the 2D traces
        # from the 1D ones by broadcasting
        qlg2 = DensityTrace(
            rho=np.repeat(qlg1.rho[:, :, None], 8, axis=2), steps=qlg1.steps, grid=g2
        )
        fdm2, _ = run_fdm_2d(g2, coeffs2, 1.0, 0.0, 0, stride=1)  # placeholder grid run
        fdm2 = DensityTrace(
            rho=np.repeat(fdm1.rho[:, :, None], 8, axis=2), steps=fdm1.steps, grid=g2
        )
        series = l2_compare_2d(qlg2, fdm2, rho_b=1.0)
        with np.errstate(invalid="ignore"):
            expected = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
        np.testing.assert_allclose(series.values, expected, rtol=1e-12)


class TestSweepQualitative:
    def test_tail_needs_longer_runs(self):
        # short runs agree mid-range but drift in the large-angle tail,
        # where thermalization is slow; the long run pulls the tail in
        def rel_err(theta, steps):
            grid = lattice_grid(64)
            params = CollisionParams(theta=theta)
            coeffs = predicted_coefficients_1d(params, grid.dx, grid.dt)
            trace = run_qlg_1d(grid, params, 1.0, 0.005, steps, stride=1)
            est = experimental_viscosity(trace, params)
            return abs(est.value - coeffs.nu) / coeffs.nu

        mid_short = rel_err(0.8, 200)
        tail_short = rel_err(1.5, 200)
        tail_long = rel_err(1.5, 2000)
        assert mid_short < 0.05
        assert tail_short > 3 * mid_short
        assert tail_long < tail_short


class TestStreamingConvention:
    def test_standard_streaming_matches_analytic_reversed_does_not(self):
        # the empirical sign validation: only the default convention tracks
        # the closed-form solution; the reversed flag advects the other way
        grid = Grid1D(n_x=64, length_x=2.0)
        cfg = analytic_config_for(grid, P3, 1.0, 0.4, "corrected")
        std = run_qlg_1d(grid, P3, 1.0, 0.4, steps=128, stride=16)
        rev = run_qlg_1d(grid, P3, 1.0, 0.4, steps=128, stride=16, reversed_streaming=True)
        mse_std = mse_compare(std, cfg).values[-1]
        mse_rev = mse_compare(rev, cfg).values[-1]
        assert mse_std < 1e-3
        assert mse_rev > 50 * mse_std


class TestSweeps:
    def test_viscosity_sweep_rows(self):
        thetas = np.linspace(1.2, 1.5, 4)
        rows = viscosity_sweep(thetas, steps=60)
        assert len(rows) == 4
        assert rows[0].theta == pytest.approx(1.2)
        assert rows[-1].theta == pytest.approx(1.5)
        for r in rows:
            assert r.error == ""
            assert r.nu_exp is not None
            assert r.nu_pred == pytest.approx(
                predicted_coefficients_1d(CollisionParams(theta=r.theta), 1.0, 1.0).nu
            )

    def test_sweep_records_failures_and_continues(self):
        rows = viscosity_sweep([1.3, float("nan")], steps=20)
        assert rows[0].error == ""
        assert rows[1].error != ""
        assert rows[1].nu_exp is None

    def test_sweep_determinism(self):
        thetas = [1.25, 1.4]
        a = viscosity_sweep(thetas, steps=50)
        b = viscosity_sweep(thetas, steps=50)
        assert [r.nu_exp for r in a] == [r.nu_exp for r in b]

    def test_steepness_sweep_rows(self):
        rows = steepness_sweep([0.9, 1.3], steps_list=[50, 100], n_x_list=[32])
        assert len(rows) == 4
        by_key = {(r["theta"], r["T"]): r["delta"] for r in rows}
        assert by_key[(0.9, 100)] >= by_key[(0.9, 50)]
