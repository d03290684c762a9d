"""Small/big jump decomposition: exact factorization, Poisson truncation,
convolution powers against brute-force enumeration."""

import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad

from levykb import decomposition as dc, gridconv as gc, measures as ms
from levykb import exponents as ex
from levykb._engines import get_engine
from levykb.errors import TruncationInsufficient


class TestBuild:
    def test_cauchy_lambda_total(self, cauchy):
        for t in (0.01, 0.1, 0.5):
            dec = dc.build(cauchy, t)
            assert dec.lambda_total == pytest.approx(2 / np.pi, rel=1e-10)
            assert dec.a_t == 0.0

    def test_symmetric_shift_vanishes(self, dyadic, oscillating):
        for spec in (dyadic, oscillating):
            dec = dc.build(spec, 0.05)
            assert dec.a_t == 0.0

    def test_dyadic_atom_threshold(self, dyadic):
        t = 2.0 ** -6
        dec = dc.build(dyadic, t)
        k = math.floor(math.log2(dec.rho_t))
        n_expected = np.arange(-60, k + 1)
        assert np.all(dec.atoms_u > dec.cut)
        # largest retained index: n <= log2(rho)
        n_found = np.round(-np.log2(dec.atoms_u)).astype(int)
        assert n_found.max() == k
        w_expected = t * 2.0 ** n_found.astype(float)
        assert np.allclose(dec.atoms_w, w_expected, rtol=1e-12)
        assert len(n_found) <= len(n_expected)

    def test_lambda_bounded_over_horizons(self, dyadic):
        # condition A keeps the big-jump intensity bounded on (0, 1]
        lams = [dc.build(dyadic, t).lambda_total
                for t in np.geomspace(1e-4, 1.0, 12)]
        assert max(lams) < 10.0

    def test_json_dump(self, dyadic, tmp_path):
        dec = dc.build(dyadic, 0.05)
        path = tmp_path / "dec.json"
        dec.dump_json(str(path))
        import json
        doc = json.loads(path.read_text())
        assert doc["lambda_total"] == pytest.approx(dec.lambda_total)
        assert len(doc["atoms"]) == len(dec.atoms_u)


class TestPsiT:
    def test_zero_frequency(self, cauchy):
        assert dc.psi_t(cauchy, 0.1, 0.0) == 0

    def test_symmetric_is_real(self, cauchy, dyadic):
        xi = np.linspace(-30, 30, 11)
        for spec in (cauchy, dyadic):
            vals = dc.psi_t(spec, 0.1, xi)
            assert np.max(np.abs(vals.imag)) == 0.0

    def test_cauchy_psi_t_two_quadratures(self, cauchy):
        # independent route: t Re psi - t int_{|u|>cut} (1 - cos(xi u))
        t = 0.1
        dec = dc.build(cauchy, t)
        xi = dec.rho_t
        direct = quad(
            lambda u: 2 * t * (2 * np.sin(xi * u / 2) ** 2) / np.pi * u ** -2,
            0, dec.cut, limit=400)[0]
        got = dc.psi_t(cauchy, t, xi, rho_t=dec.rho_t)
        assert got.real == pytest.approx(direct, rel=1e-6)
        flat = 2 * t / np.pi * quad(lambda u: u ** -2, dec.cut, np.inf)[0]
        osc = 2 * t / np.pi * quad(lambda u: u ** -2, dec.cut, np.inf,
                                   weight="cos", wvar=xi, limlst=100)[0]
        other_route = t * ex.re_psi(cauchy, xi) - (flat - osc)
        assert got.real == pytest.approx(other_route, rel=1e-6)

    def test_bounds_from_full_exponent(self, cauchy):
        t = 0.1
        dec = dc.build(cauchy, t)
        eng = get_engine(cauchy)
        xi = np.geomspace(0.1, 400, 60)
        pt = dc.psi_t(cauchy, t, xi, rho_t=dec.rho_t)
        tre = t * ex.re_psi(cauchy, xi)
        psiU_rho = float(eng.psi_U(np.array([dec.rho_t]))[0])
        assert np.all(pt.real <= tre * (1 + 1e-12))
        assert np.all(pt.real >= tre - 2 * t * psiU_rho - 1e-12)


class TestFactorization:
    @pytest.mark.parametrize("preset,t", [
        ("cauchy", 0.1), ("cauchy", 1.0), ("stable:alpha=1.5", 0.03),
        ("dyadic", 2 ** -6), ("dyadic", 1.0), ("oscillating", 0.1),
    ])
    def test_exact_split(self, preset, t):
        # e^{-t psi} = e^{-psi_t} CF_P e^{-i xi a_t} at 20 frequencies,
        # including horizons with rho_t < 1
        spec = ms.load_spec(preset)
        dec = dc.build(spec, t)
        xi = np.linspace(-40, 40, 20)
        assert dc.factorization_residual(dec, xi).max() < 1e-8

    def test_one_sided_measure_split(self):
        u = np.geomspace(1e-4, 3.0, 128)
        spec = ms.TabulatedDensity(u=u, m=0.7 * u ** -1.8, symmetric=False)
        dec = dc.build(spec, 0.2)
        xi = np.linspace(-20, 20, 15)
        assert dc.factorization_residual(dec, xi).max() < 1e-7


class TestPoissonLaw:
    def test_m_max_for_cauchy_intensity(self, cauchy):
        dec = dc.build(cauchy, 0.1)
        pl = dc.poisson_law(dec, tol=1e-12)
        # lambda = 2/pi; 14 terms suffice (the minimal count is 12)
        assert pl.m_max <= 14
        assert dc.required_m_max(2 / np.pi, 1e-12) == 12
        assert dc.poisson_law(dec, m_max=14, tol=1e-12).dropped_tail < 1e-12

    def test_zero_term_is_point_mass(self, cauchy):
        dec = dc.build(cauchy, 0.1)
        pl = dc.poisson_law(dec)
        assert pl.term_mass(0) == pytest.approx(math.exp(-dec.lambda_total),
                                                rel=1e-14)

    def test_truncation_insufficient(self, cauchy):
        dec = dc.build(cauchy, 0.1)
        with pytest.raises(TruncationInsufficient):
            dc.poisson_law(dec, m_max=3, tol=1e-12)

    def test_mass_conservation(self, cauchy, dyadic):
        for spec, t in ((cauchy, 0.1), (dyadic, 2 ** -5)):
            dec = dc.build(spec, t)
            pl = dc.poisson_law(dec, tol=1e-13)
            assert abs(pl.weights.sum() + pl.dropped_tail - 1.0) < 1e-14


class TestConvolutionPowers:
    def test_dyadic_square_vs_pair_enumeration(self, dyadic):
        # mixture truncated at two jumps against brute-force enumeration of
        # single atoms and atom pairs (grid-clipped on both sides)
        t = 2.0 ** -4
        dec = dc.build(dyadic, t)
        extent = 8.0
        grid = gc.make_grid(extent, 2.0 ** -6)
        mix2 = gc.poisson_mixture(dec, grid, m_max=2)
        masses = gc.mixture_cell_masses(mix2)

        keep = dec.atoms_u <= grid.extent
        atoms = list(zip(dec.atoms_u[keep], dec.atoms_w[keep]))
        atoms += [(-u, w) for u, w in atoms]
        lam = dec.lambda_total
        brute = {0.0: math.exp(-lam)}
        for u, w in atoms:
            brute[u] = brute.get(u, 0.0) + math.exp(-lam) * w
        for (u1, w1), (u2, w2) in itertools.product(atoms, atoms):
            y = u1 + u2
            if abs(y) <= grid.extent:
                brute[y] = brute.get(y, 0.0) + math.exp(-lam) * w1 * w2 / 2.0
        for y, mass in brute.items():
            j = int(round(y / grid.dx)) + grid.n_half
            assert masses[j] == pytest.approx(mass, abs=1e-15), y
        used = {int(round(y / grid.dx)) + grid.n_half for y in brute}
        other = np.delete(masses, list(used))
        assert np.max(np.abs(other)) < 1e-15

    def test_exponential_mixture_matches_power_sum(self, cauchy):
        dec = dc.build(cauchy, 0.1)
        grid = gc.make_grid(30.0, 0.002)
        exact = gc.poisson_mixture(dec, grid)
        pl = dc.poisson_law(dec, tol=1e-15)
        truncated = gc.poisson_mixture(dec, grid, m_max=pl.m_max)
        a = gc.mixture_cell_masses(exact)
        b = gc.mixture_cell_masses(truncated)
        assert np.max(np.abs(a - b)) < 1e-13
