"""Quasi-inverse time scales of the exponent and its proxies.

``rho(t)`` is the first frequency where ``Re psi`` reaches ``1/t`` (the
infimum definition), and ``rho_U`` / ``rho_L`` are the analogues for the
upper and lower exponents.  The lower exponent of an atomic measure is
right-continuous with downward jumps, so first crossings are located on a
fixed multiplicative lattice via a running maximum, then polished by a
bracketed root solve inside the first crossing cell.  The lattice is fixed
per spec, which makes the returned scale functions monotone in ``t`` by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._engines import get_engine
from .errors import BracketFailure
from .exponents import condition_a_profile
from .measures import LevyMeasureSpec

_STEPS_PER_OCTAVE = 8
_J_LO = -27 * _STEPS_PER_OCTAVE          # ~ 7.5e-9
_J_CAP = 200 * _STEPS_PER_OCTAVE         # spec'd search cap 2**200
_J_FLOOR = -400 * _STEPS_PER_OCTAVE

_lattice_cache: dict[tuple[str, str], dict] = {}


def _lattice(spec: LevyMeasureSpec, which: str) -> dict:
    key = (spec.content_hash(), which)
    state = _lattice_cache.get(key)
    if state is None:
        eng = get_engine(spec)
        fn = {"re": eng.re_psi, "U": eng.psi_U, "L": eng.psi_L}[which]
        j = np.arange(_J_LO, 8 * _STEPS_PER_OCTAVE)
        xi = np.exp2(j / _STEPS_PER_OCTAVE)
        vals = fn(xi)
        state = {"fn": fn, "j_lo": _J_LO, "xi": xi,
                 "cummax": np.maximum.accumulate(vals)}
        _lattice_cache[key] = state
    return state


def _extend(state: dict, direction: int):
    fn = state["fn"]
    if direction > 0:
        j0 = state["j_lo"] + len(state["xi"])
        if j0 > _J_CAP:
            raise BracketFailure(
                "exponent stays below the target level up to 2**200; "
                "condition A certification should have caught this"
            )
        j = np.arange(j0, j0 + 8 * _STEPS_PER_OCTAVE)
        xi_new = np.exp2(j / _STEPS_PER_OCTAVE)
        vals = fn(xi_new)
        run = np.maximum.accumulate(np.concatenate([[state["cummax"][-1]], vals]))[1:]
        state["xi"] = np.concatenate([state["xi"], xi_new])
        state["cummax"] = np.concatenate([state["cummax"], run])
    else:
        j1 = state["j_lo"]
        if j1 < _J_FLOOR:
            raise BracketFailure("target level sits below the searchable range")
        j = np.arange(j1 - 8 * _STEPS_PER_OCTAVE, j1)
        xi_new = np.exp2(j / _STEPS_PER_OCTAVE)
        vals = fn(xi_new)
        state["j_lo"] = j1 - 8 * _STEPS_PER_OCTAVE
        state["xi"] = np.concatenate([xi_new, state["xi"]])
        state["cummax"] = np.maximum.accumulate(
            np.concatenate([vals, state["cummax"]])
        )


def _first_crossing(spec: LevyMeasureSpec, which: str, level: float
                    ) -> tuple[float, float]:
    """Smallest xi with fn(xi) >= level, plus the scan-cell width."""
    state = _lattice(spec, which)
    while state["cummax"][-1] < level:
        _extend(state, +1)
    while state["cummax"][0] >= level:
        _extend(state, -1)
    i = int(np.searchsorted(state["cummax"], level, side="left"))
    xi, fn = state["xi"], state["fn"]
    lo, hi = xi[i - 1], xi[i]
    f_hi = float(fn(np.array([hi]))[0])
    if f_hi == level:
        return float(hi), float(hi - lo)

    def f(x):
        return float(fn(np.array([x]))[0]) - level

    root = brentq(f, lo, hi, rtol=8.9e-16, maxiter=200)
    return float(root), float(hi - lo)


def rho(spec: LevyMeasureSpec, t: float) -> float:
    """inf{xi > 0: Re psi(xi) >= 1/t}."""
    if t <= 0:
        raise ValueError("t must be positive")
    condition_a_profile(spec)
    return _first_crossing(spec, "re", 1.0 / t)[0]


def rho_U(spec: LevyMeasureSpec, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    return _first_crossing(spec, "U", 1.0 / t)[0]


def rho_L(spec: LevyMeasureSpec, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    return _first_crossing(spec, "L", 1.0 / t)[0]


@dataclass
class ScaleTable:
    t_grid: np.ndarray
    rho: np.ndarray
    rho_U: np.ndarray
    rho_L: np.ndarray
    bracket_width: np.ndarray

    def to_csv(self, path: str):
        header = "t,rho,rho_U,rho_L,bracket_width"
        data = np.column_stack([
            self.t_grid, self.rho, self.rho_U, self.rho_L, self.bracket_width,
        ])
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def scale_table(spec: LevyMeasureSpec, t_grid: np.ndarray) -> ScaleTable:
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    condition_a_profile(spec)
    rows = [
        (_first_crossing(spec, "re", 1.0 / t),
         _first_crossing(spec, "U", 1.0 / t),
         _first_crossing(spec, "L", 1.0 / t))
        for t in t_grid
    ]
    return ScaleTable(
        t_grid=t_grid,
        rho=np.array([r[0][0] for r in rows]),
        rho_U=np.array([r[1][0] for r in rows]),
        rho_L=np.array([r[2][0] for r in rows]),
        bracket_width=np.array([max(r[0][1], r[1][1], r[2][1]) for r in rows]),
    )


def comparability_report(spec: LevyMeasureSpec, t_grid: np.ndarray,
                         c_list: tuple[float, ...] | None = None) -> dict:
    """Min/max over the t grid of scale-function ratios.

    For each constant c the ratio rho_{ct}/rho_t is tabulated, along with
    the cross ratios rho_U/rho and rho_L/rho.  Reported, not thresholded.
    """
    if c_list is None:
        beta = condition_a_profile(spec).beta_hat
        c_list = (0.5, 2.0, beta)
    table = scale_table(spec, t_grid)
    out = {
        "rho_U_over_rho": _band(table.rho_U / table.rho),
        "rho_L_over_rho": _band(table.rho_L / table.rho),
    }
    for c in c_list:
        scaled = np.array([rho(spec, c * t) for t in table.t_grid])
        out[f"rho_ct_over_rho[c={c:g}]"] = _band(scaled / table.rho)
    return out


def _band(ratios: np.ndarray) -> dict:
    return {"min": float(np.min(ratios)), "max": float(np.max(ratios))}
