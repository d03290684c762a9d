"""Per-kind evaluators for the characteristic exponent and its relatives.

Each engine exposes vectorized evaluation of

* ``re_psi``:   int (1 - cos(xi u)) mu(du)
* ``im_psi``:   a xi + int (xi u 1_{|u|<1} - sin(xi u)) mu(du)
* ``psi_L``:    int_{|xi u| < 1} (xi u)^2 mu(du)          (strict window)
* ``psi_U``:    int ((xi u)^2 ^ 1) mu(du)
* ``re_psi_trunc`` / ``im_psi_trunc``: the same integrands restricted to
  ``|u| <= cut`` (the compensated small-jump exponent divided by t).

Evaluation is exact for power laws (special-function closed forms) and for
dyadic atoms (lattice sums with certified geometric cutoffs).  Tabulated
densities use the per-segment closed forms; large-grid callers go through a
log-log spline of the exact values, rebuilt on demand when the requested
range grows.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline

from . import _special as sp
from .measures import (
    DyadicAtoms,
    LevyMeasureSpec,
    OscillatingStable,
    PowerLaw,
    TabulatedDensity,
)

_CHUNK = 16384
_engine_cache: dict[str, "Engine"] = {}


def get_engine(spec: LevyMeasureSpec) -> "Engine":
    key = spec.content_hash()
    eng = _engine_cache.get(key)
    if eng is None:
        if isinstance(spec, PowerLaw):
            eng = _PowerLawEngine(spec)
        elif isinstance(spec, DyadicAtoms):
            eng = _DyadicEngine(spec)
        elif isinstance(spec, TabulatedDensity):
            eng = _TabulatedEngine(spec)
        elif isinstance(spec, OscillatingStable):
            eng = _TabulatedEngine(spec.table, drift_a=spec.drift_a)
        else:
            raise TypeError(f"no engine for {type(spec).__name__}")
        _engine_cache[key] = eng
    return eng


class Engine:
    drift_a: float = 0.0
    symmetric: bool = True

    def re_psi(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def im_psi(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = self.drift_a * xi
        if not self.symmetric:
            out = out + self._im_jump(xi)
        return out

    def _im_jump(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def psi_L(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def psi_U(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def re_psi_trunc(self, cut: float, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def im_psi_trunc(self, cut: float, xi: np.ndarray) -> np.ndarray:
        if self.symmetric:
            return np.zeros_like(np.asarray(xi, dtype=float))
        raise NotImplementedError

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        return np.empty(0)

    # complex exponents used by the Fourier side
    def cf_exponent(self, t: float, xi: np.ndarray) -> np.ndarray:
        return t * (self.re_psi(xi) + 1j * self.im_psi(xi))

    def cf_exponent_trunc(self, t: float, cut: float, xi: np.ndarray) -> np.ndarray:
        return t * (self.re_psi_trunc(cut, xi) + 1j * self.im_psi_trunc(cut, xi))


class _PowerLawEngine(Engine):
    def __init__(self, spec: PowerLaw):
        self.spec = spec
        self.drift_a = spec.drift_a
        self.symmetric = True
        self.alpha = spec.alpha
        self.c = spec.c_alpha
        self.K = sp.one_minus_cos_moment(spec.alpha)

    def re_psi(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        return 2.0 * self.c * self.K * xi ** self.alpha

    def psi_L(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        return 2.0 * self.c * xi ** self.alpha / (2.0 - self.alpha)

    def psi_U(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        return 2.0 * self.c * xi ** self.alpha * (1.0 / (2.0 - self.alpha) + 1.0 / self.alpha)

    def re_psi_trunc(self, cut, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(xi)
        nz = xi > 0
        out[nz] = 2.0 * self.c * xi[nz] ** self.alpha * sp.partial_one_minus_cos(
            self.alpha, xi[nz] * cut
        )
        return out


class _DyadicEngine(Engine):
    def __init__(self, spec: DyadicAtoms):
        self.spec = spec
        self.drift_a = spec.drift_a
        self.symmetric = True
        self.q_small = 2.0 ** (spec.gamma - 2.0 * spec.upsilon)  # < 1

    def _atom_range(self, xi_max: float, cut: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Atoms (u, w) covering re-psi sums for |xi| <= xi_max to 1e-18 rel."""
        s = self.spec
        # remainder of sum_n w u^2 xi^2 below index n0 is geometric with ratio q_small
        need = (20.0 * math.log(10.0) + 2.0 * math.log(max(xi_max, 1.0))) / (
            (2.0 * s.upsilon - s.gamma) * math.log(2.0)
        )
        n_hi = int(math.ceil(need)) + 2
        if s.n_max is not None:
            n_hi = min(n_hi, s.n_max)
        n = np.arange(s.n_min, n_hi + 1)
        u = np.exp2(-s.upsilon * n)
        w = np.exp2(s.gamma * n)
        if cut is not None:
            keep = u <= cut * (1.0 + 1e-12)
            u, w = u[keep], w[keep]
        return u, w

    def _sum_one_minus_cos(self, u, w, xi):
        out = np.empty_like(xi)
        for i in range(0, len(xi), _CHUNK):
            blk = xi[i:i + _CHUNK, None] * u[None, :]
            out[i:i + _CHUNK] = (2.0 * np.sin(0.5 * blk) ** 2) @ w
        return 2.0 * out

    def re_psi(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        if xi.size == 0:
            return xi.copy()
        u, w = self._atom_range(float(xi.max()))
        return self._sum_one_minus_cos(u, w, xi)

    def re_psi_trunc(self, cut, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        if xi.size == 0:
            return xi.copy()
        u, w = self._atom_range(float(xi.max()), cut=cut)
        if len(u) == 0:
            return np.zeros_like(xi)
        return self._sum_one_minus_cos(u, w, xi)

    def psi_L(self, xi):
        s = self.spec
        xi = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(xi)
        nz = xi > 0
        # smallest n with u_n < 1/xi (strict): n0 = floor(log2(xi)/upsilon + snap) + 1
        nu = np.log2(xi[nz]) / s.upsilon
        n0 = np.floor(nu + 1e-9) + 1.0
        n0 = np.maximum(n0, s.n_min)
        q = self.q_small
        geo = q ** n0 / (1.0 - q)
        if s.n_max is not None:
            geo = geo - q ** (s.n_max + 1) / (1.0 - q)
            geo = np.maximum(geo, 0.0)
        out[nz] = 2.0 * xi[nz] ** 2 * geo
        return out

    def psi_U(self, xi):
        s = self.spec
        xi = np.abs(np.asarray(xi, dtype=float))
        out = self.psi_L(xi)
        nz = xi > 0
        # atoms with u_n >= 1/xi contribute 1 each: n <= floor(log2(xi)/upsilon + snap)
        nu = np.log2(xi[nz]) / s.upsilon
        n1 = np.floor(nu + 1e-9)
        if s.n_max is not None:
            n1 = np.minimum(n1, s.n_max)
        b = 2.0 ** s.gamma
        mass = np.where(
            n1 >= s.n_min,
            2.0 * (b ** (n1 + 1) - b ** s.n_min) / (b - 1.0),
            0.0,
        )
        out[nz] += mass
        return out

    def breakpoints(self, lo, hi):
        s = self.spec
        k_lo = math.floor(math.log2(max(lo, 1e-300)) / s.upsilon)
        k_hi = math.ceil(math.log2(hi) / s.upsilon)
        ks = np.arange(k_lo, k_hi + 1)
        pts = np.exp2(s.upsilon * ks)
        return pts[(pts >= lo) & (pts <= hi)]


class _TabulatedEngine(Engine):
    _SPLINE_PER_DECADE = 400
    _EXACT_LIMIT = 4096

    def __init__(self, spec: TabulatedDensity, drift_a: float | None = None):
        self.spec = spec
        self.drift_a = spec.drift_a if drift_a is None else drift_a
        self.symmetric = spec.symmetric
        self._spline = None
        self._spline_range = (math.inf, -math.inf)

    # -- exact positive-side pieces -----------------------------------------

    def _re_one_sided(self, xi: np.ndarray, cut: float = math.inf) -> np.ndarray:
        """int_0^cut (1 - cos(xi u)) m(u) du on the positive side, xi > 0."""
        s = self.spec
        u0, uK = s.u[0], s.u[-1]
        out = np.zeros_like(xi)
        a_in = s.inner_a
        c_in = s._inner_coeff()
        top_in = min(cut, u0)
        if top_in > 0:
            out += c_in * xi ** a_in * sp.partial_one_minus_cos(a_in, xi * top_in)
        if cut > u0:
            out += s._table.trig_moments(xi, u0, min(cut, uK))[0]
        if cut > uK and not s.compact_support:
            a = s.outer_a
            c = s._outer_coeff()
            plain = s.half_moment(0, uK, cut) if math.isfinite(cut) else c * uK ** (-a) / a
            osc = xi ** a * sp.cos_tail_power(a, xi * uK)
            if math.isfinite(cut):
                osc = osc - xi ** a * sp.cos_tail_power(a, xi * cut)
            out += plain - osc
        return out

    def _im_one_sided(self, xi: np.ndarray, cut: float = math.inf) -> np.ndarray:
        """int_0^cut (xi u - sin(xi u)) m(u) du on the positive side, xi > 0."""
        s = self.spec
        u0, uK = s.u[0], s.u[-1]
        out = np.zeros_like(xi)
        a_in = s.inner_a
        c_in = s._inner_coeff()
        top_in = min(cut, u0)
        if top_in > 0:
            out += c_in * xi ** a_in * sp.partial_compensated_sin(a_in, xi * top_in)
        if cut > u0:
            out += s._table.trig_moments(xi, u0, min(cut, uK), want_sin=True)[1]
        if cut > uK and not s.compact_support:
            if not math.isfinite(cut):
                raise ValueError("compensated sin needs a finite cut beyond the table")
            a = s.outer_a
            lin = xi * s.half_moment(1, uK, cut)
            osc = xi ** a * (sp.sin_tail_power(a, xi * uK) - sp.sin_tail_power(a, xi * cut))
            out += lin - osc
        return out

    def _sin_tail_one_sided(self, xi: np.ndarray, frm: float) -> np.ndarray:
        """int_frm^inf sin(xi u) m(u) du on the positive side, xi > 0."""
        s = self.spec
        u0, uK = s.u[0], s.u[-1]
        out = np.zeros_like(xi)
        lo = max(frm, u0)
        if lo < uK:
            lin = xi * s._table.moment(1, lo, uK)
            comp = s._table.trig_moments(xi, lo, uK, want_sin=True)[1]
            out += lin - comp
        if frm < u0:
            # inner stretch [frm, u0): sin = xi u - (xi u - sin)
            lin = xi * s.half_moment(1, frm, u0)
            comp = (self._im_one_sided(xi, u0) - self._im_one_sided(xi, frm)
                    if frm > 0 else self._im_one_sided(xi, u0))
            out += lin - comp
        if not s.compact_support:
            a = s.outer_a
            c = s._outer_coeff()
            w = xi * max(frm, uK)
            out += c * xi ** a * sp.sin_tail_power(a, w)
        return out

    # -- public interface ----------------------------------------------------

    def _sides(self) -> float:
        return 2.0 if self.symmetric else 1.0

    def _re_exact(self, xi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(xi)
        nz = xi > 0
        out[nz] = self._sides() * self._re_one_sided(xi[nz])
        return out

    def re_psi(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        if xi.size <= self._EXACT_LIMIT:
            return self._re_exact(xi)
        nz = xi[xi > 0]
        lo, hi = float(nz.min()), float(nz.max())
        if lo < self._spline_range[0] or hi > self._spline_range[1]:
            self._build_spline(lo, hi)
        out = np.zeros_like(xi)
        mask = xi > 0
        out[mask] = np.exp(self._spline(np.log(xi[mask])))
        return out

    def _build_spline(self, lo: float, hi: float):
        lo = min(lo, self._spline_range[0] if self._spline is not None else lo) / 2.0
        hi = max(hi, self._spline_range[1] if self._spline is not None else hi) * 2.0
        n = max(int(math.log10(hi / lo) * self._SPLINE_PER_DECADE), 32)
        grid = np.geomspace(lo, hi, n)
        vals = self._re_exact(grid)
        self._spline = CubicSpline(np.log(grid), np.log(vals))
        self._spline_range = (lo, hi)

    def _im_jump(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        pos = xi != 0
        ax = np.abs(xi[pos])
        vals = self._im_one_sided(ax, 1.0) - self._sin_tail_one_sided(ax, 1.0)
        out[pos] = np.sign(xi[pos]) * vals
        return out

    def psi_L(self, xi):
        s = self.spec
        xi = np.abs(np.asarray(xi, dtype=float))
        flat = np.atleast_1d(xi)
        out = np.zeros_like(flat)
        for i, x in enumerate(flat):
            if x > 0:
                out[i] = self._sides() * x * x * s.half_moment(2, 0.0, 1.0 / x)
        return out.reshape(xi.shape)

    def psi_U(self, xi):
        s = self.spec
        xi = np.abs(np.asarray(xi, dtype=float))
        flat = np.atleast_1d(xi)
        out = self.psi_L(flat)
        for i, x in enumerate(flat):
            if x > 0:
                out[i] += self._sides() * s.half_moment(0, 1.0 / x, math.inf)
        return out.reshape(xi.shape)

    def re_psi_trunc(self, cut, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(xi)
        nz = xi > 0
        out[nz] = self._sides() * self._re_one_sided(xi[nz], cut)
        return out

    def im_psi_trunc(self, cut, xi):
        if self.symmetric:
            return np.zeros_like(np.asarray(xi, dtype=float))
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        pos = xi != 0
        ax = np.abs(xi[pos])
        out[pos] = np.sign(xi[pos]) * self._im_one_sided(ax, cut)
        return out
