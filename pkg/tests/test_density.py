"""Fourier inversion: closed forms, mass, derivatives, convolution identity."""

import os

import numpy as np
import pytest
from scipy.integrate import simpson

from levykb import density as dn, measures as ms, scales as sc
from levykb.errors import MaxOnBoundary


class TestClosedForm:
    def test_cauchy_pointwise(self, cauchy):
        g = dn.density(cauchy, 0.1, np.array([0.0, 0.2]), keep_lattice=False)
        assert g.values[0] == pytest.approx(1 / (np.pi * 0.1), rel=1e-8)
        assert g.values[1] == pytest.approx(0.1 / (np.pi * (0.01 + 0.04)), rel=1e-8)

    def test_cauchy_grids_all_horizons(self, cauchy):
        for t in (0.01, 0.1, 1.0):
            xs = np.linspace(-20 * t, 20 * t, 401)
            g = dn.density(cauchy, t, xs, keep_lattice=False)
            exact = t / (np.pi * (t * t + xs * xs))
            assert np.max(np.abs(g.values - exact) / exact) < 1e-6

    def test_derivative_odd_and_closed_form(self, cauchy):
        t = 0.1
        xs = np.linspace(-2, 2, 801)
        g = dn.density(cauchy, t, xs, k=1, keep_lattice=False)
        assert g.values[400] == pytest.approx(0.0, abs=1e-9)
        exact = -2 * t * xs / (np.pi * (t * t + xs * xs) ** 2)
        mask = np.abs(exact) > 1e-3 * np.max(np.abs(exact))
        rel = np.max(np.abs(g.values[mask] - exact[mask]) / np.abs(exact[mask]))
        assert rel < 1e-5

    def test_heavy_tail_decay(self, cauchy):
        t = 0.1
        g = dn.density(cauchy, t, np.array([0.0, 5.0]), keep_lattice=False)
        # |x| rho = 50: the closed form gives ~4e-4 of the peak
        assert g.values[1] <= 1e-2 * g.values[0]

    def test_derivative_consistency_finite_differences(self, dyadic):
        t = 2.0 ** -5
        rho = sc.rho(dyadic, t)
        xs = np.linspace(-5 / rho, 5 / rho, 2001)
        g0 = dn.density(dyadic, t, xs, keep_lattice=False)
        g1 = dn.density(dyadic, t, xs, k=1, keep_lattice=False)
        fd = np.gradient(g0.values, xs)
        mask = np.abs(g1.values) > 1e-2 * np.max(np.abs(g1.values))
        mask[:3] = mask[-3:] = False
        rel = np.abs(fd - g1.values)[mask] / np.abs(g1.values)[mask]
        assert np.median(rel) < 1e-4

    def test_certificates_reported(self, cauchy):
        g = dn.density(cauchy, 0.1, np.linspace(-1, 1, 5), keep_lattice=False)
        assert g.tail_bound < 1e-10 * g.rho_t
        assert g.far_bound < 1e-8 * g.rho_t
        assert g.imag_resid < 1e-10
        assert g.trunc_freq > 0


class TestMass:
    @pytest.mark.parametrize("preset,t", [
        ("cauchy", 0.1), ("stable:alpha=1.5", 0.05),
        ("dyadic", 2 ** -6), ("oscillating", 0.1),
    ])
    def test_normalization_with_tail_correction(self, preset, t):
        spec = ms.load_spec(preset)
        res = dn.mass_check(spec, t)
        assert res["defect"] < 1e-8, res

    def test_central_probability_cauchy(self, cauchy):
        got = dn.central_probability(cauchy, 0.1, 1.0)
        assert got == pytest.approx(2 / np.pi * np.arctan(10.0), rel=1e-10)

    def test_cdf_points_cauchy(self, cauchy):
        xs = np.array([-0.5, 0.0, 0.3])
        got = dn.cdf_points(cauchy, 0.1, xs)
        exact = 0.5 + np.arctan(xs / 0.1) / np.pi
        assert np.max(np.abs(got - exact)) < 1e-8


class TestBarDensity:
    def test_symmetry_and_location(self, cauchy):
        xs = np.linspace(-2, 2, 4001)
        bar = dn.density_bar(cauchy, 0.1, xs)
        assert np.max(np.abs(bar.values - bar.values[::-1])) < 1e-9
        assert abs(bar.x_t) < 1e-6

    def test_probability_mass(self, cauchy):
        xs = np.linspace(-3, 3, 8001)
        bar = dn.density_bar(cauchy, 0.1, xs, keep_lattice=False)
        assert simpson(bar.values, x=xs) == pytest.approx(1.0, abs=1e-8)

    def test_max_scales_with_rho(self, cauchy):
        for t in (0.1, 0.01):
            rho = sc.rho(cauchy, t)
            xs = np.linspace(-10 / rho, 10 / rho, 2001)
            bar = dn.density_bar(cauchy, t, xs, keep_lattice=False)
            ratio = bar.values.max() / rho
            assert 0.2 < ratio < 1.0

    def test_locate_xt_needs_coverage(self, cauchy):
        xs = np.linspace(-0.05, 0.05, 101)  # far smaller than 10/rho
        bar = dn.density_bar(cauchy, 0.1, xs)
        with pytest.raises(MaxOnBoundary):
            dn.locate_xt(bar)

    def test_exponential_decay_envelope(self, cauchy):
        # fitted-constant shape: bar p <= b1 rho e^{-b2 rho |x|}
        t = 0.1
        rho = 10.0
        xs = np.linspace(-40 / rho, 40 / rho, 4001)
        bar = dn.density_bar(cauchy, t, xs, keep_lattice=False)
        z = np.abs(xs) * rho
        b2 = 0.25
        b1 = np.max(bar.values / (rho * np.exp(-b2 * z)))
        assert b1 < 20.0
        assert np.all(bar.values <= b1 * rho * np.exp(-b2 * z) + 1e-12)

    def test_symmetric_sharpened_envelope(self, cauchy):
        t = 0.1
        rho = 10.0
        xs = np.linspace(-40 / rho, 40 / rho, 4001)
        bar = dn.density_bar(cauchy, t, xs, keep_lattice=False)
        z = np.abs(xs) * rho
        b2 = 0.1
        env = rho * np.exp(-b2 * z * np.log1p(z))
        b1 = np.max(bar.values / env)
        assert b1 < 5.0
        assert np.all(bar.values <= b1 * env + 1e-12)


class TestConvolutionIdentity:
    @pytest.mark.parametrize("preset,t,tol", [
        ("cauchy", 0.1, 1e-6),
        ("cauchy", 2 ** -4, 1e-5),
        ("cauchy", 2 ** -8, 1e-5),
        ("dyadic", 2 ** -4, 1e-5),
        ("dyadic", 2 ** -8, 1e-5),
    ])
    def test_density_equals_bar_star_poisson(self, preset, t, tol):
        spec = ms.load_spec(preset)
        res = dn.convolution_check(spec, t)
        assert res.rel_dev <= tol, res

    def test_dropping_all_jumps_leaves_gap(self, cauchy):
        # keeping only the zero-jump term must miss about 1 - e^{-lambda}
        from levykb import decomposition as dc, gridconv as gc
        t = 0.1
        dec = dc.build(cauchy, t)
        grid = gc.make_grid(20.0, 0.002 / dec.rho_t)
        mix0 = gc.poisson_mixture(dec, grid, m_max=0)
        bar = dn.density_bar(cauchy, t, grid.x, keep_lattice=False)
        conv0 = gc.convolve(mix0, bar.values)
        win = np.abs(grid.x) <= 3.0
        direct = dn.density(cauchy, t, grid.x[win], keep_lattice=False,
                            space_rtol=1e-7)
        gap = np.max(np.abs(conv0[win] - direct.values))
        expected = (1 - np.exp(-dec.lambda_total)) * bar.values.max()
        assert 0.05 * expected < gap < 1.5 * expected


class TestCache:
    def test_cf_cache_roundtrip(self, cauchy, tmp_path, monkeypatch):
        monkeypatch.setenv("LEVYKB_CACHE", str(tmp_path))
        dn._mem_cache.clear()
        xs = np.linspace(-1, 1, 101)
        g1 = dn.density(cauchy, 0.37, xs, keep_lattice=False, verify=False)
        files = list(tmp_path.iterdir())
        assert files, "cache directory stayed empty"
        dn._mem_cache.clear()
        g2 = dn.density(cauchy, 0.37, xs, keep_lattice=False, verify=False)
        assert np.array_equal(g1.values, g2.values)

    def test_csv_export(self, cauchy, tmp_path):
        xs = np.linspace(-1, 1, 11)
        g = dn.density(cauchy, 0.5, xs, keep_lattice=False)
        path = tmp_path / "dens.csv"
        g.to_csv(str(path))
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape == (11, 4)
        assert np.allclose(data[:, 2], g.values)
