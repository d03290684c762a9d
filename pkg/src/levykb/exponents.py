"""Characteristic exponent, its upper/lower proxies, and the two structural
constants estimated from them.

``psi_L`` integrates ``(xi u)^2`` over the strict window ``|xi u| < 1`` and
``psi_U`` integrates ``(xi u)^2 ^ 1``; both vanish at zero by continuity and
sandwich the real part of the exponent via

    (1 - cos 1) psi_L <= Re psi <= 2 psi_U.

``estimate_beta`` certifies, on an (extended) grid, the invertibility
constant ``beta`` of that sandwich; ``growth_floor`` turns it into a power
growth floor for Re psi on ``|xi| >= 1``.  Both feed the Fourier-side
truncation certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._engines import get_engine
from .errors import ConditionAViolated, FloorViolated
from .measures import LevyMeasureSpec

CONDITION_A_CAVEAT = (
    "Condition A is a statement over all xi in R; "
    "the artifact certifies it only on (extended) grids."
)

_DEFAULT_LO = 1e-3
_DEFAULT_HI = 1e6
_POINTS_PER_DECADE = 60
_MAX_EXTENSIONS = 3

_profile_cache: dict[str, "ConditionAProfile"] = {}


# ---------------------------------------------------------------------------
# pointwise operations


def psi_L(spec: LevyMeasureSpec, xi):
    """Lower exponent: second moment over the strict window ``|xi u| < 1``."""
    return _maybe_scalar(get_engine(spec).psi_L, xi)


def psi_U(spec: LevyMeasureSpec, xi):
    """Upper exponent: integral of ``(xi u)^2 ^ 1``."""
    return _maybe_scalar(get_engine(spec).psi_U, xi)


def re_psi(spec: LevyMeasureSpec, xi):
    """Real part of the characteristic exponent."""
    return _maybe_scalar(get_engine(spec).re_psi, xi)


def im_psi(spec: LevyMeasureSpec, xi):
    """Imaginary part (drift plus compensated jump asymmetry)."""
    return _maybe_scalar(get_engine(spec).im_psi, xi)


def _maybe_scalar(fn, xi):
    arr = np.asarray(xi, dtype=float)
    out = fn(np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# grids


def default_xi_grid(lo: float = _DEFAULT_LO, hi: float = _DEFAULT_HI,
                    per_decade: int = _POINTS_PER_DECADE,
                    spec: LevyMeasureSpec | None = None) -> np.ndarray:
    """Positive log-spaced grid, with measure breakpoints merged in."""
    n = max(int(math.log10(hi / lo) * per_decade), 8)
    grid = np.geomspace(lo, hi, n)
    if spec is not None:
        bps = get_engine(spec).breakpoints(lo, hi)
        if len(bps):
            grid = np.unique(np.concatenate([grid, bps]))
    return grid


def profile_grid(lo: float = _DEFAULT_LO, hi: float = _DEFAULT_HI,
                 per_decade: int = _POINTS_PER_DECADE) -> np.ndarray:
    """Symmetric-about-zero grid used for exported profiles."""
    pos = np.geomspace(lo, hi, max(int(math.log10(hi / lo) * per_decade), 8))
    return np.concatenate([-pos[::-1], [0.0], pos])


# ---------------------------------------------------------------------------
# beta and the growth floor


def estimate_beta(spec: LevyMeasureSpec, xi_grid: np.ndarray | None = None
                  ) -> tuple[float, float]:
    """Grid supremum of ``psi_U / psi_L`` and its location.

    Extends the grid two decades at a time whenever the boundary ratio is
    within 5% of the running maximum; raises :class:`ConditionAViolated`
    when the ratio keeps growing at the high end after the allowed
    extensions.
    """
    eng = get_engine(spec)
    if xi_grid is None:
        lo, hi = _DEFAULT_LO, _DEFAULT_HI
        grid = default_xi_grid(lo, hi, spec=spec)
    else:
        grid = np.asarray(xi_grid, dtype=float)
        grid = grid[grid > 0]
        lo, hi = float(grid.min()), float(grid.max())

    extensions = 0
    while True:
        ratio = eng.psi_U(grid) / eng.psi_L(grid)
        imax = int(np.argmax(ratio))
        beta_hat = float(ratio[imax])
        hi_edge = ratio[-1] >= 0.95 * beta_hat
        lo_edge = ratio[0] >= 0.95 * beta_hat
        if not (hi_edge or lo_edge) or extensions >= _MAX_EXTENSIONS:
            break
        if hi_edge:
            hi *= 100.0
        if lo_edge:
            lo /= 100.0
        grid = default_xi_grid(lo, hi, spec=spec)
        extensions += 1
    if extensions >= _MAX_EXTENSIONS and ratio[-1] >= 0.99 * beta_hat:
        tail = ratio[grid >= grid[-1] / 10.0]
        if tail[-1] > 1.02 * tail[0]:
            raise ConditionAViolated(
                "psi_U/psi_L keeps growing after grid extensions; "
                f"last-decade ratio rose from {tail[0]:.3g} to {tail[-1]:.3g}"
            )
    return beta_hat, float(grid[imax])


def growth_floor(spec: LevyMeasureSpec, beta_hat: float,
                 xi_grid: np.ndarray | None = None) -> float:
    """min over ``|xi| >= 1`` of ``Re psi / |xi|**(2/beta_hat)``."""
    eng = get_engine(spec)
    if xi_grid is None:
        grid = default_xi_grid(1.0, _DEFAULT_HI, spec=spec)
    else:
        grid = np.asarray(xi_grid, dtype=float)
        grid = grid[grid >= 1.0]
        if grid.size == 0:
            raise FloorViolated("growth floor needs grid points with |xi| >= 1")
    vals = eng.re_psi(grid) / grid ** (2.0 / beta_hat)
    c_floor = float(vals.min())
    if c_floor <= 1e-12:
        raise FloorViolated(f"growth floor {c_floor:.3g} is numerically degenerate")
    return c_floor


@dataclass(frozen=True)
class ConditionAProfile:
    beta_hat: float
    argmax_xi: float
    c_floor: float
    grid_lo: float
    grid_hi: float
    caveat: str = CONDITION_A_CAVEAT


def condition_a_profile(spec: LevyMeasureSpec) -> ConditionAProfile:
    """Certify condition A on the default grid; cached per spec content."""
    key = spec.content_hash()
    prof = _profile_cache.get(key)
    if prof is None:
        beta_hat, argmax = estimate_beta(spec)
        c_floor = growth_floor(spec, beta_hat)
        prof = ConditionAProfile(
            beta_hat=beta_hat,
            argmax_xi=argmax,
            c_floor=c_floor,
            grid_lo=_DEFAULT_LO,
            grid_hi=_DEFAULT_HI,
        )
        _profile_cache[key] = prof
    return prof


# ---------------------------------------------------------------------------
# exported profile


@dataclass
class ExponentProfile:
    xi_grid: np.ndarray
    re_psi: np.ndarray
    im_psi: np.ndarray
    psi_L: np.ndarray
    psi_U: np.ndarray
    beta_hat: float
    c_floor: float
    caveat: str = CONDITION_A_CAVEAT

    @property
    def ratio(self) -> np.ndarray:
        out = np.full_like(self.psi_U, np.nan)
        nz = self.psi_L > 0
        out[nz] = self.psi_U[nz] / self.psi_L[nz]
        return out

    def to_csv(self, path: str):
        header = "xi,re_psi,im_psi,psi_L,psi_U,ratio"
        data = np.column_stack([
            self.xi_grid, self.re_psi, self.im_psi,
            self.psi_L, self.psi_U, self.ratio,
        ])
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def exponent_profile(spec: LevyMeasureSpec,
                     xi_grid: np.ndarray | None = None) -> ExponentProfile:
    eng = get_engine(spec)
    grid = profile_grid() if xi_grid is None else np.asarray(xi_grid, dtype=float)
    prof = condition_a_profile(spec)
    return ExponentProfile(
        xi_grid=grid,
        re_psi=eng.re_psi(grid),
        im_psi=eng.im_psi(grid),
        psi_L=eng.psi_L(grid),
        psi_U=eng.psi_U(grid),
        beta_hat=prof.beta_hat,
        c_floor=prof.c_floor,
    )


# ---------------------------------------------------------------------------
# invariant checks (shared by the harness and the test suite)


def sandwich_check(spec: LevyMeasureSpec, xi_grid: np.ndarray) -> dict:
    """(1-cos 1) psi_L <= Re psi <= 2 psi_U on the grid, with slack 1e-12."""
    eng = get_engine(spec)
    xi = np.asarray(xi_grid, dtype=float)
    re = eng.re_psi(xi)
    lo = (1.0 - math.cos(1.0)) * eng.psi_L(xi)
    hi = 2.0 * eng.psi_U(xi)
    slack = 1e-12 * np.maximum(hi, 1e-300)
    ok = bool(np.all(re >= lo - slack) and np.all(re <= hi + slack))
    return {
        "pass": ok,
        "min_upper_margin": float(np.min(hi - re)),
        "min_lower_margin": float(np.min(re - lo)),
    }


def doubling_growth_check(spec: LevyMeasureSpec, beta_hat: float,
                          xi_grid: np.ndarray, rtol: float = 1e-8) -> dict:
    """psi_U(xi2)/psi_U(xi1) >= (xi2/xi1)**(2/beta_hat) for grid pairs.

    Checking adjacent pairs suffices: the bound telescopes multiplicatively.
    """
    eng = get_engine(spec)
    xi = np.sort(np.asarray(xi_grid, dtype=float))
    xi = xi[xi > 0]
    vals = eng.psi_U(xi)
    lhs = vals[1:] / vals[:-1]
    rhs = (xi[1:] / xi[:-1]) ** (2.0 / beta_hat)
    worst = float(np.min(lhs / rhs))
    return {"pass": bool(worst >= 1.0 / (1.0 + rtol)), "worst_ratio": worst}


def integral_relation_check(spec: LevyMeasureSpec, xi1: float, xi2: float,
                            rtol: float = 1e-6) -> dict:
    """psi_U(xi2) - psi_U(xi1) equals the integral of 2 psi_L(eta)/eta."""
    eng = get_engine(spec)
    lhs = float(eng.psi_U(np.array([xi2]))[0] - eng.psi_U(np.array([xi1]))[0])
    bps = get_engine(spec).breakpoints(xi1, xi2)
    # integrate in log space; psi_L may jump at breakpoints
    pts = np.log(bps).tolist() if len(bps) else None

    def integrand(s):
        return 2.0 * float(eng.psi_L(np.array([math.exp(s)]))[0])

    rhs, err = quad(integrand, math.log(xi1), math.log(xi2),
                    points=pts, limit=200 + 2 * (len(bps) if pts else 0))
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"pass": bool(rel <= rtol), "lhs": lhs, "rhs": rhs, "rel_err": rel,
            "quad_err": err}
