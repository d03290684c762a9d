"""Closed-form integrals of a piecewise-linear density table.

A table is a pair of ascending positive nodes ``u`` and nonnegative values
``m``; between nodes the density is linear in ``u``.  All routines integrate
over a clipped window ``[lo, hi]`` inside the table range and are exact up to
rounding.  Trigonometric moments switch to power series per segment when the
phase across the segment is small, so there is no cancellation blow-up.
"""

from __future__ import annotations

import numpy as np

_PHASE_SPLIT = 0.5
_SERIES_TERMS = 10


class LinearTable:
    def __init__(self, u: np.ndarray, m: np.ndarray):
        u = np.asarray(u, dtype=float)
        m = np.asarray(m, dtype=float)
        if u.ndim != 1 or u.size < 2 or np.any(np.diff(u) <= 0) or u[0] <= 0:
            raise ValueError("nodes must be ascending and positive, at least two")
        if m.shape != u.shape or np.any(m < 0):
            raise ValueError("values must be nonnegative and match nodes")
        self.u = u
        self.m = m
        du = np.diff(u)
        self.B = np.diff(m) / du
        self.A = m[:-1] - self.B * u[:-1]

    # -- polynomial moments ------------------------------------------------

    def _clip(self, lo: float, hi: float):
        lo = max(lo, self.u[0])
        hi = min(hi, self.u[-1])
        if hi <= lo:
            return None
        return lo, hi

    def moment(self, power: int, lo: float, hi: float) -> float:
        """int_lo^hi u^power m(u) du, window clipped to the table range."""
        win = self._clip(lo, hi)
        if win is None:
            return 0.0
        lo, hi = win
        p, q = self._segment_bounds(lo, hi)
        k = power
        Ipart = (q ** (k + 1) - p ** (k + 1)) / (k + 1)
        Upart = (q ** (k + 2) - p ** (k + 2)) / (k + 2)
        sel = self._sel
        return float(np.sum(self.A[sel] * Ipart + self.B[sel] * Upart))

    def _segment_bounds(self, lo: float, hi: float):
        u = self.u
        j0 = int(np.searchsorted(u, lo, side="right") - 1)
        j1 = int(np.searchsorted(u, hi, side="left") - 1)
        j0 = max(j0, 0)
        j1 = min(j1, len(u) - 2)
        sel = np.arange(j0, j1 + 1)
        p = np.maximum(u[sel], lo)
        q = np.minimum(u[sel + 1], hi)
        keep = q > p
        self._sel = sel[keep]
        return p[keep], q[keep]

    # -- trigonometric moments ----------------------------------------------

    def trig_moments(self, xi: np.ndarray, lo: float, hi: float,
                     want_sin: bool = False):
        """(int (1-cos(xi u)) m du, int (xi u - sin(xi u)) m du) over [lo, hi].

        ``xi`` is a nonnegative 1-d array; the second output is None unless
        ``want_sin``.
        """
        xi = np.asarray(xi, dtype=float)
        out_c = np.zeros_like(xi)
        out_s = np.zeros_like(xi) if want_sin else None
        win = self._clip(lo, hi)
        if win is None:
            return out_c, out_s
        lo, hi = win
        p, q = self._segment_bounds(lo, hi)
        A = self.A[self._sel]
        B = self.B[self._sel]
        for a, b, pp, qq in zip(A, B, p, q):
            self._accumulate_segment(out_c, out_s, xi, a, b, pp, qq, want_sin)
        return out_c, out_s

    @staticmethod
    def _accumulate_segment(out_c, out_s, xi, A, B, p, q, want_sin):
        phase = xi * q
        small = phase < _PHASE_SPLIT
        big = ~small
        if np.any(small):
            x = xi[small]
            x2 = x * x
            cacc = np.zeros_like(x)
            sacc = np.zeros_like(x) if want_sin else None
            pow_x = x2
            fact = 2.0
            sgn = 1.0
            for j in range(1, _SERIES_TERMS + 1):
                k = 2 * j
                cacc += sgn * pow_x * (
                    A * (q ** (k + 1) - p ** (k + 1)) / (fact * (k + 1))
                    + B * (q ** (k + 2) - p ** (k + 2)) / (fact * (k + 2))
                )
                if want_sin:
                    ks = 2 * j + 1
                    fs = fact * (k + 1)
                    sacc += sgn * pow_x * x * (
                        A * (q ** (ks + 1) - p ** (ks + 1)) / (fs * (ks + 1))
                        + B * (q ** (ks + 2) - p ** (ks + 2)) / (fs * (ks + 2))
                    )
                pow_x = pow_x * x2
                fact = fact * (k + 1) * (k + 2)
                sgn = -sgn
            out_c[small] += cacc
            if want_sin:
                out_s[small] += sacc
        if np.any(big):
            x = xi[big]
            sp_, cp = np.sin(x * p), np.cos(x * p)
            sq, cq = np.sin(x * q), np.cos(x * q)
            # int (A+Bu) du - int (A+Bu) cos(xi u) du
            plain = A * (q - p) + B * (q * q - p * p) / 2.0
            osc = (A * (sq - sp_) / x
                   + B * ((cq - cp) / (x * x) + (q * sq - p * sp_) / x))
            out_c[big] += plain - osc
            if want_sin:
                # int (A+Bu)(xi u) du - int (A+Bu) sin(xi u) du
                lin = x * (A * (q * q - p * p) / 2.0 + B * (q ** 3 - p ** 3) / 3.0)
                osc_s = (-A * (cq - cp) / x
                         + B * ((sq - sp_) / (x * x) - (q * cq - p * cp) / x))
                out_s[big] += lin - osc_s
            del sp_, cp, sq, cq
