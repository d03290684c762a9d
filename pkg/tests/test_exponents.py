"""Exponent evaluation against quadrature oracles and closed forms."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from levykb import exponents as ex, measures as ms
from levykb.errors import ConditionAViolated, FloorViolated


def re_psi_quad_oracle(c, alpha, xi, upper=2000.0):
    """Adaptive quadrature of (1-cos(xi u)) against the power density, with a
    Richardson-style doubling check on the oscillatory tail split."""
    def one_side(u_hi):
        smooth = quad(lambda u: 2 * np.sin(xi * u / 2) ** 2 * c * u ** (-1 - alpha),
                      0, 1.0 / xi, limit=200)[0]
        flat = quad(lambda u: c * u ** (-1 - alpha), 1.0 / xi, u_hi)[0]
        osc = quad(lambda u: c * u ** (-1 - alpha), 1.0 / xi, u_hi,
                   weight="cos", wvar=xi, limit=400)[0]
        tail = c * u_hi ** (-alpha) / alpha
        return smooth + flat - osc + tail
    v1, v2 = one_side(upper), one_side(2 * upper)
    assert abs(v1 - v2) < 1e-7 * max(abs(v1), 1.0)
    return 2.0 * v2


class TestPointwise:
    def test_psi_L_powerlaw_closed_form(self, cauchy):
        for xi in (0.3, 3.7, 120.0):
            assert ex.psi_L(cauchy, xi) == pytest.approx((2 / np.pi) * xi, rel=1e-14)
        spec = ms.PowerLaw(alpha=0.6, c_alpha=0.8)
        xi = 7.3
        oracle = 2 * quad(lambda u: (xi * u) ** 2 * 0.8 * u ** (-1.6),
                          0, 1 / xi)[0]
        assert ex.psi_L(spec, xi) == pytest.approx(oracle, rel=1e-10)

    def test_zero_frequency(self, cauchy, dyadic, oscillating):
        for spec in (cauchy, dyadic, oscillating):
            assert ex.psi_L(spec, 0.0) == 0.0
            assert ex.psi_U(spec, 0.0) == 0.0
            assert ex.re_psi(spec, 0.0) == 0.0
            assert ex.im_psi(spec, 0.0) == 0.0

    def test_dyadic_psi_L_strict_window(self, dyadic):
        # atoms exactly on |xi u| = 1 are excluded (the lower exponent is
        # right-continuous); direct strict-window atom summation oracle
        n = np.arange(-60, 200)
        u, w = 2.0 ** (-n.astype(float)), 2.0 ** n.astype(float)
        xi = 8.0
        oracle = 2 * float(np.sum(np.where(xi * u < 1, (xi * u) ** 2 * w, 0.0)))
        assert oracle == 16.0
        assert ex.psi_L(dyadic, xi) == pytest.approx(16.0, rel=1e-13)
        # psi_U is boundary-insensitive: (xi u)^2 = 1 there
        oracle_u = 2 * float(np.sum(np.minimum((xi * u) ** 2, 1.0) * w))
        assert ex.psi_U(dyadic, xi) == pytest.approx(oracle_u, rel=1e-12)
        assert ex.psi_U(dyadic, xi) == pytest.approx(48.0, rel=1e-13)

    def test_psi_U_minus_psi_L_is_tail_mass(self, cauchy):
        xi = 3.7
        diff = ex.psi_U(cauchy, xi) - ex.psi_L(cauchy, xi)
        assert diff == pytest.approx((2 / np.pi) * 3.7, rel=1e-13)
        assert diff == pytest.approx(ms.tail_mass(cauchy, 1 / xi), rel=1e-13)

    def test_re_psi_cauchy_with_quad_oracle(self, cauchy):
        assert ex.re_psi(cauchy, 5.0) == pytest.approx(5.0, rel=1e-12)
        assert ex.im_psi(cauchy, 5.0) == 0.0
        oracle = re_psi_quad_oracle(1 / np.pi, 1.0, 5.0)
        assert ex.re_psi(cauchy, 5.0) == pytest.approx(oracle, rel=1e-8)

    def test_stable_normalization(self):
        spec = ms.preset("stable", alpha=1.5)
        assert ex.re_psi(spec, 2.0) == pytest.approx(2.0 ** 1.5, rel=1e-12)
        oracle = re_psi_quad_oracle(spec.c_alpha, 1.5, 2.0)
        assert ex.re_psi(spec, 2.0) == pytest.approx(oracle, rel=1e-8)

    def test_tabulated_re_psi_vs_segmentwise_quad(self, oscillating):
        # per-segment adaptive quadrature of the piecewise-linear density
        # (a single adaptive pass cannot handle the hundreds of kinks)
        tab = oscillating.table
        xi = 40.0
        eng_val = ex.re_psi(oscillating, xi)
        a_in, c_in = tab.inner_a, tab._inner_coeff()
        total = quad(lambda u: 2 * np.sin(xi * u / 2) ** 2 * c_in * u ** (-1 - a_in),
                     0, tab.u[0], limit=200)[0]
        for j in range(len(tab.u) - 1):
            p, q = tab.u[j], tab.u[j + 1]
            B = (tab.m[j + 1] - tab.m[j]) / (q - p)
            A = tab.m[j] - B * p
            total += quad(lambda u: 2 * np.sin(xi * u / 2) ** 2 * (A + B * u),
                          p, q, limit=100)[0]
        assert eng_val == pytest.approx(2 * total, rel=1e-9)


class TestBetaAndFloor:
    def test_beta_powerlaw(self):
        for alpha in (0.5, 1.0, 1.5):
            spec = ms.preset("stable", alpha=alpha)
            beta, _ = ex.estimate_beta(spec)
            assert beta == pytest.approx(2 / alpha, rel=1e-12)

    def test_beta_cauchy_constant_ratio(self, cauchy):
        beta, _ = ex.estimate_beta(cauchy)
        assert beta == pytest.approx(2.0, rel=1e-12)

    def test_finite_activity_ratio_diverges(self):
        # a finite measure (validate would reject it) must trip the grid
        # extension guard: psi_L collapses at high frequency
        u = np.geomspace(0.5, 2.0, 32)
        spec = ms.TabulatedDensity(u=u, m=np.ones_like(u), inner_exponent=-0.5,
                                   tail_exponent=5.0)
        with pytest.raises(ConditionAViolated):
            ex.estimate_beta(spec)

    def test_growth_floor_cauchy(self, cauchy):
        assert ex.growth_floor(cauchy, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_growth_floor_powerlaw_identity(self):
        spec = ms.preset("stable", alpha=0.8)
        beta, _ = ex.estimate_beta(spec)
        assert ex.growth_floor(spec, beta) == pytest.approx(1.0, rel=1e-10)

    def test_growth_floor_single_point(self, cauchy):
        assert ex.growth_floor(cauchy, 2.0, np.array([1.0])) == pytest.approx(
            ex.re_psi(cauchy, 1.0), rel=1e-14)
        with pytest.raises(FloorViolated):
            ex.growth_floor(cauchy, 2.0, np.array([0.5]))

    def test_profile_carries_caveat(self, cauchy):
        prof = ex.condition_a_profile(cauchy)
        assert prof.caveat == ex.CONDITION_A_CAVEAT


class TestInvariants:
    @pytest.mark.parametrize("preset", ["cauchy", "stable:alpha=1.5",
                                        "dyadic", "oscillating"])
    def test_sandwich(self, preset):
        spec = ms.load_spec(preset)
        grid = ex.default_xi_grid(spec=spec)
        assert ex.sandwich_check(spec, grid)["pass"]

    @pytest.mark.parametrize("preset", ["cauchy", "stable:alpha=1.5",
                                        "dyadic", "oscillating"])
    def test_doubling_growth(self, preset):
        spec = ms.load_spec(preset)
        beta, _ = ex.estimate_beta(spec)
        grid = ex.default_xi_grid(spec=spec)
        res = ex.doubling_growth_check(spec, beta, grid)
        assert res["pass"], res

    def test_integral_relation_cauchy(self, cauchy):
        res = ex.integral_relation_check(cauchy, 0.5, 50.0, rtol=1e-6)
        assert res["pass"] and res["rel_err"] <= 1e-6

    def test_integral_relation_dyadic(self, dyadic):
        res = ex.integral_relation_check(dyadic, 0.3, 40.0, rtol=1e-4)
        assert res["pass"], res

    def test_parity(self, cauchy, oscillating):
        xi = np.array([0.7, 3.0, 41.0])
        for spec in (cauchy, oscillating):
            assert np.array_equal(ex.re_psi(spec, xi), ex.re_psi(spec, -xi))
            assert np.array_equal(ex.im_psi(spec, -xi), -ex.im_psi(spec, xi))

    def test_one_sided_im_psi_odd(self):
        u = np.geomspace(1e-4, 3.0, 128)
        spec = ms.TabulatedDensity(u=u, m=0.7 * u ** -1.8, symmetric=False)
        xi = np.array([0.9, 7.0])
        im = ex.im_psi(spec, xi)
        assert np.allclose(ex.im_psi(spec, -xi), -im, rtol=1e-12)
        assert not np.allclose(im, 0.0)

    def test_profile_csv(self, cauchy, tmp_path):
        prof = ex.exponent_profile(cauchy)
        path = tmp_path / "prof.csv"
        prof.to_csv(str(path))
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape[1] == 6
        # arrays vanish at xi = 0 and the ratio column stays near 2
        mid = data[len(data) // 2]
        assert mid[0] == 0.0 and mid[1] == 0.0 and mid[3] == 0.0
