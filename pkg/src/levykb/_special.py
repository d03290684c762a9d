"""Trigonometric moment integrals against power-law weights.

Everything here is vectorized over the oscillation argument and accurate to
near machine precision: small arguments go through explicit series, large
arguments through a rotated-contour Gauss-Laguerre rule (the integrand
``v**(-1-alpha) * exp(iv)`` is analytic in the upper half plane, so the tail
integral from ``w`` equals ``i*exp(iw) * int_0^inf (w+is)**(-1-alpha) e^-s ds``).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma, gammaincc

_SPLIT = 2.0          # series below, contour above
_GL_NODES = 96
_lag_cache: tuple[np.ndarray, np.ndarray] | None = None


def _laguerre_nodes() -> tuple[np.ndarray, np.ndarray]:
    global _lag_cache
    if _lag_cache is None:
        _lag_cache = np.polynomial.laguerre.laggauss(_GL_NODES)
    return _lag_cache


def one_minus_cos(z):
    """1 - cos(z) without cancellation, as 2*sin(z/2)**2."""
    z = np.asarray(z, dtype=float)
    s = np.sin(0.5 * z)
    return 2.0 * s * s


def compensated_sin(z):
    """z - sin(z), stable for small |z|."""
    z = np.asarray(z, dtype=float)
    out = z - np.sin(z)
    small = np.abs(z) < 1e-2
    if np.any(small):
        zs = z[small] if z.ndim else z
        z2 = zs * zs
        # z^3/6 * (1 - z^2/20 * (1 - z^2/42 * (1 - z^2/72)))
        ser = (zs * z2 / 6.0) * (1.0 - (z2 / 20.0) * (1.0 - (z2 / 42.0) * (1.0 - z2 / 72.0)))
        if z.ndim:
            out = np.where(small, np.zeros_like(out), out)
            out[small] = ser
        else:
            out = ser
    return out


def one_minus_cos_moment(alpha: float) -> float:
    """int_0^inf (1 - cos v) v^(-1-alpha) dv for alpha in (0, 2).

    Equals Gamma(2-alpha) * (pi/2) * sinc((1-alpha)/2) / alpha, which is
    smooth through alpha = 1 (value pi/2 there).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    return gamma(2.0 - alpha) * (np.pi / 2.0) * np.sinc((1.0 - alpha) / 2.0) / alpha


def stable_norm_const(alpha: float) -> float:
    """C such that the symmetric density C|u|^(-1-alpha) yields Re psi = |xi|^alpha."""
    return 1.0 / (2.0 * one_minus_cos_moment(alpha))


def _contour_tail(alpha: float, w: np.ndarray) -> np.ndarray:
    """int_w^inf v^(-1-alpha) e^{iv} dv for w >= _SPLIT, complex valued."""
    s, gl_w = _laguerre_nodes()
    z = w[:, None] + 1j * s[None, :]
    vals = (z ** (-1.0 - alpha)) @ gl_w
    return 1j * np.exp(1j * w) * vals


def _series_G(alpha: float, w: np.ndarray) -> np.ndarray:
    """int_0^w (1-cos v) v^(-1-alpha) dv by alternating series, w <= _SPLIT."""
    out = np.zeros_like(w)
    term_sign = 1.0
    w2 = w * w
    # sum_j (-1)^(j+1) w^(2j-alpha) / ((2j)! (2j-alpha))
    pw = w ** (2.0 - alpha)
    fact = 2.0  # (2j)! running
    for j in range(1, 16):
        out = out + term_sign * pw / (fact * (2 * j - alpha))
        pw = pw * w2
        fact = fact * (2 * j + 1) * (2 * j + 2)
        term_sign = -term_sign
    return out


def _series_H(alpha: float, w: np.ndarray) -> np.ndarray:
    """int_0^w (v - sin v) v^(-1-alpha) dv by series, w <= _SPLIT."""
    out = np.zeros_like(w)
    term_sign = 1.0
    w2 = w * w
    pw = w ** (3.0 - alpha)
    fact = 6.0  # (2j+1)! running
    for j in range(1, 16):
        out = out + term_sign * pw / (fact * (2 * j + 1 - alpha))
        pw = pw * w2
        fact = fact * (2 * j + 2) * (2 * j + 3)
        term_sign = -term_sign
    return out


def _leg_nodes() -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(64)


def _bridge_quad(alpha: float, w: np.ndarray, trig) -> np.ndarray:
    """int_w^_SPLIT v^(-1-alpha) trig(v) dv via Gauss-Legendre in log(v)."""
    s_nodes, s_weights = _leg_nodes()
    lo = np.log(w)[:, None]
    hi = math.log(_SPLIT)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    s = mid + half * s_nodes[None, :]
    v = np.exp(s)
    integ = np.exp(-alpha * s) * trig(v)
    return (integ @ s_weights) * half[:, 0]


def cos_tail_power(alpha: float, w):
    """int_w^inf v^(-1-alpha) cos(v) dv, vectorized over w > 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    hi = w >= _SPLIT
    if np.any(hi):
        out[hi] = _contour_tail(alpha, w[hi]).real
    lo = ~hi
    if np.any(lo):
        if alpha < 2.0:
            # Ci(w) = w^-alpha/alpha - K(alpha) + G(w)
            K = one_minus_cos_moment(alpha)
            out[lo] = w[lo] ** (-alpha) / alpha - K + _series_G(alpha, w[lo])
        else:
            base = _contour_tail(alpha, np.array([_SPLIT])).real[0]
            out[lo] = base + _bridge_quad(alpha, w[lo], np.cos)
    return out


def sin_tail_power(alpha: float, w):
    """int_w^inf v^(-1-alpha) sin(v) dv, vectorized over w > 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    hi = w >= _SPLIT
    if np.any(hi):
        out[hi] = _contour_tail(alpha, w[hi]).imag
    lo = ~hi
    if np.any(lo):
        S = np.array([_SPLIT])
        si_S = _contour_tail(alpha, S).imag[0]
        if alpha < 2.0:
            # Si(w) = Si(S) + int_w^S sin(v) v^(-1-alpha) dv; the finite piece
            # comes from the compensated series:
            # int_w^S sin v v^(-1-alpha) = int_w^S v^-alpha - (H(S) - H(w))
            if abs(alpha - 1.0) < 1e-12:
                plain = np.log(_SPLIT / w[lo])
            else:
                plain = (_SPLIT ** (1.0 - alpha) - w[lo] ** (1.0 - alpha)) / (1.0 - alpha)
            out[lo] = si_S + plain - (
                _series_H(alpha, np.array([_SPLIT]))[0] - _series_H(alpha, w[lo])
            )
        else:
            out[lo] = si_S + _bridge_quad(alpha, w[lo], np.sin)
    return out


def partial_one_minus_cos(alpha: float, w):
    """int_0^w (1 - cos v) v^(-1-alpha) dv, vectorized over w >= 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    lo = w < _SPLIT
    if np.any(lo):
        out[lo] = _series_G(alpha, w[lo])
    hi = ~lo
    if np.any(hi):
        K = one_minus_cos_moment(alpha)
        out[hi] = K - w[hi] ** (-alpha) / alpha + cos_tail_power(alpha, w[hi])
    return out


def partial_compensated_sin(alpha: float, w):
    """int_0^w (v - sin v) v^(-1-alpha) dv, vectorized over w >= 0."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    lo = w < _SPLIT
    if np.any(lo):
        out[lo] = _series_H(alpha, w[lo])
    hi = ~lo
    if np.any(hi):
        H_S = _series_H(alpha, np.array([_SPLIT]))[0]
        if abs(alpha - 1.0) < 1e-12:
            plain = np.log(w[hi] / _SPLIT)
        else:
            plain = (w[hi] ** (1.0 - alpha) - _SPLIT ** (1.0 - alpha)) / (1.0 - alpha)
        si = sin_tail_power(alpha, w[hi])
        si_S = sin_tail_power(alpha, np.array([_SPLIT]))[0]
        # int_S^w sin v v^(-1-alpha) dv = Si(S) - Si(w)
        out[hi] = H_S + plain - (si_S - si)
    return out


def power_exp_tail(k: int, a: float, p: float, xi: float) -> float:
    """int_xi^inf x^k exp(-a x^p) dx in closed form via the incomplete gamma."""
    if a <= 0 or p <= 0:
        raise ValueError("need a > 0 and p > 0")
    s = (k + 1.0) / p
    x0 = a * xi ** p
    return gamma(s) * gammaincc(s, x0) * a ** (-s) / p
