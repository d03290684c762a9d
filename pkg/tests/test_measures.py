"""Measure specs: derived values, Orey sandwich, validation, construction."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from levykb import measures as ms
from levykb.errors import FiniteActivity, InvalidParameters, MonotonicityViolation


def dyadic_sum_oracle(gamma, upsilon, f, n_lo=-60, n_hi=400):
    """Direct atom summation, both signs."""
    n = np.arange(n_lo, n_hi + 1)
    u = 2.0 ** (-upsilon * n)
    w = 2.0 ** (gamma * n)
    return float(np.sum(w * (f(u) + f(-u))))


class TestValidate:
    def test_cauchy_compensated_mass(self, cauchy):
        rep = ms.validate(cauchy)
        # closed form 4/pi; oracle: adaptive quadrature of (1 ^ u^2) density
        assert rep.compensated_mass == pytest.approx(4 / np.pi, rel=1e-12)
        oracle = 2 * (quad(lambda u: u * u / np.pi * u ** -2, 0, 1)[0]
                      + quad(lambda u: u ** -2 / np.pi, 1, np.inf)[0])
        assert rep.compensated_mass == pytest.approx(oracle, rel=1e-9)
        assert rep.infinite_mass and rep.symmetric_ok

    def test_out_of_range_alpha_rejected(self):
        with pytest.raises(InvalidParameters):
            ms.PowerLaw(alpha=2.5, c_alpha=1.0)
        with pytest.raises(InvalidParameters):
            ms.PowerLaw(alpha=1.0, c_alpha=-1.0)
        with pytest.raises(InvalidParameters):
            ms.DyadicAtoms(gamma=2.0, upsilon=1.0)

    def test_finite_activity_rejected(self):
        u = np.geomspace(0.1, 10.0, 64)
        spec = ms.TabulatedDensity(u=u, m=np.exp(-u), inner_exponent=-0.5,
                                   tail_exponent=3.0)
        with pytest.raises(FiniteActivity):
            ms.validate(spec)

    def test_truncated_dyadic_doubling(self):
        spec = ms.DyadicAtoms(gamma=1.0, upsilon=1.0, n_max=40)
        rep = ms.validate(spec)
        assert rep.truncation_stable and rep.infinite_mass
        assert rep.infinite_mass_method == "doubling"


class TestMoments:
    def test_powerlaw_truncated_second_moment_closed_form(self, cauchy):
        # 2C eps^(2-a)/(2-a); oracle = adaptive quadrature
        got = ms.truncated_second_moment(cauchy, 1.0)
        assert got == pytest.approx(2 / np.pi, rel=1e-14)
        oracle = 2 * quad(lambda u: u * u / np.pi * u ** -2, 0, 1.0)[0]
        assert got == pytest.approx(oracle, rel=1e-10)
        spec = ms.PowerLaw(alpha=0.7, c_alpha=0.4)
        eps = 0.37
        oracle = 2 * quad(lambda u: u * u * 0.4 * u ** (-1.7), 0, eps)[0]
        assert ms.truncated_second_moment(spec, eps) == pytest.approx(oracle, rel=1e-10)

    def test_dyadic_truncated_second_moment(self, dyadic):
        got = ms.truncated_second_moment(dyadic, 2.0 ** -3)
        assert got == pytest.approx(0.5, rel=1e-13)
        oracle = dyadic_sum_oracle(1, 1, lambda u: np.where(np.abs(u) <= 2.0 ** -3, u * u, 0.0))
        assert got == pytest.approx(oracle, rel=1e-12)

    def test_dyadic_orey_sandwich(self, dyadic):
        # 2 eps <= tsm(eps) <= 4 eps on the dyadic ladder with alpha = 1
        for k in range(1, 20):
            eps = 2.0 ** -k
            v = ms.truncated_second_moment(dyadic, eps)
            assert 2 * eps - 1e-15 <= v <= 4 * eps + 1e-15
            v_strict = dyadic.trunc_second_moment(eps, include_boundary=False)
            assert v_strict == pytest.approx(2 * eps, rel=1e-12)

    def test_tail_mass_examples(self, cauchy, dyadic):
        assert ms.tail_mass(cauchy, 1.0) == pytest.approx(2 / np.pi, rel=1e-14)
        oracle = 2 * quad(lambda u: u ** -2 / np.pi, 1, np.inf)[0]
        assert ms.tail_mass(cauchy, 1.0) == pytest.approx(oracle, rel=1e-10)
        assert ms.tail_mass(dyadic, 1.0) == pytest.approx(2.0, rel=1e-13)
        oracle = dyadic_sum_oracle(1, 1, lambda u: np.where(np.abs(u) > 1, 1.0, 0.0))
        assert ms.tail_mass(dyadic, 1.0) == pytest.approx(oracle, rel=1e-12)

    def test_tail_mass_vanishes_at_infinity(self, cauchy, dyadic, oscillating):
        for spec in (cauchy, dyadic, oscillating):
            assert ms.tail_mass(spec, 1e9) < 1e-8

    @given(st.floats(min_value=-6.0, max_value=2.0),
           st.floats(min_value=0.01, max_value=2.0))
    @settings(max_examples=30, deadline=None)
    def test_monotonicity_properties(self, log_eps, factor):
        spec = ms.preset("dyadic")
        eps = 10.0 ** log_eps
        assert spec.trunc_second_moment(eps) <= spec.trunc_second_moment(
            eps * (1 + factor)) + 1e-15
        assert spec.tail_mass(eps) >= spec.tail_mass(eps * (1 + factor)) - 1e-15
        assert spec.trunc_second_moment(eps) >= 0
        assert spec.tail_mass(eps) >= 0

    def test_symmetric_odd_moments_vanish(self, cauchy, dyadic, oscillating):
        for spec in (cauchy, dyadic, oscillating):
            assert spec.first_moment_between(0.3, 3.0) == 0.0

    def test_tabulated_moments_vs_quadrature(self):
        u = np.geomspace(1e-3, 5.0, 200)
        spec = ms.TabulatedDensity(u=u, m=1.3 * u ** -1.6, symmetric=True)
        # inner and outer exponents fitted to ~0.6
        got = spec.trunc_second_moment(0.5)
        a = spec.inner_a
        c = spec._inner_coeff()
        oracle = 2 * (quad(lambda x: x * x * c * x ** (-1 - a), 0, u[0])[0]
                      + quad(lambda x: x * x * np.interp(x, u, spec.m),
                             u[0], 0.5, limit=300)[0])
        assert got == pytest.approx(oracle, rel=1e-4)


class TestOscillatingConstruction:
    def test_constant_alpha_recovers_power_law(self):
        for alpha in (0.8, 1.0, 1.2):
            tab = ms.build_oscillating_density(alpha, alpha)
            r = tab.u[tab.u <= 1e-3]
            target = (2 - alpha) / (2 * alpha) * r ** (-1 - alpha)
            rel = np.max(np.abs(tab.density_pos(r) / target - 1))
            assert rel <= 0.01
            # cutoff location matches the closed form ln(2/(2-a))/a
            assert tab.meta["v0"] == pytest.approx(
                math.log(2 / (2 - alpha)) / alpha, abs=5e-3)

    def test_ratio_band(self, oscillating):
        # past the compact-support transient the ratio sits between the
        # stable-index bounds
        from levykb import exponents as ex
        xi = np.geomspace(30.0, 1e6, 120)
        ratio = ex.psi_U(oscillating, xi) / ex.psi_L(oscillating, xi)
        assert np.all(ratio >= 2 / 1.6 - 0.06)
        assert np.all(ratio <= 2 / 0.8 + 0.05)

    def test_non_decaying_modulator_flagged(self):
        tab = ms.build_oscillating_density(
            0.8, 1.6, ms.Modulator("non_decaying", 0.8, 1.6))
        assert tab.meta["modulator_decay_ok"] is False

    def test_fast_modulator_rejected(self):
        with pytest.raises(MonotonicityViolation):
            ms.build_oscillating_density(0.3, 1.9,
                                         ms.Modulator("fast", 0.3, 1.9))


class TestJsonAndPresets:
    def test_roundtrip(self, cauchy, dyadic, oscillating):
        for spec in (cauchy, dyadic, oscillating):
            doc = json.loads(json.dumps(spec.to_jsonable()))
            back = ms.from_jsonable(doc)
            assert back.content_hash() == spec.content_hash()

    def test_tabulated_roundtrip(self):
        u = np.geomspace(1e-3, 2.0, 64)
        spec = ms.TabulatedDensity(u=u, m=u ** -1.5)
        back = ms.from_jsonable(spec.to_jsonable())
        assert back.content_hash() == spec.content_hash()
        assert back.tail_mass(0.5) == pytest.approx(spec.tail_mass(0.5), rel=1e-14)

    def test_preset_strings(self):
        assert ms.load_spec("stable:alpha=0.9").alpha == 0.9
        assert ms.load_spec("dyadic:gamma=1.5,upsilon=1").gamma == 1.5
        with pytest.raises(InvalidParameters):
            ms.load_spec("nonsense")

    def test_spec_file_loading(self, tmp_path, cauchy):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(cauchy.to_jsonable()))
        assert ms.load_spec(str(path)).content_hash() == cauchy.content_hash()
