"""Lévy measure specifications and their primitive integrals.

A spec declares the jump measure (and the drift constant) of a
one-dimensional Lévy process without a Gaussian part.  Specs are immutable
after construction and every operation is a pure function of the spec and
its arguments, so concurrent use is safe.

Supported kinds:

``power_law``
    density ``C |u|**(-alpha-1)`` on the whole line, symmetric.
``dyadic_atoms``
    atoms of weight ``2**(n*gamma)`` at ``+-2**(-n*upsilon)`` over an
    integer window of indices; the ideal window is all of the integers and
    the small-jump end is truncated adaptively.
``tabulated``
    positive-side density table, piecewise linear between log-spaced nodes,
    extended by power laws below the first node and (unless compactly
    supported) above the last one; optionally mirrored to the negative side.
``oscillating``
    tabulated measure realizing a characteristic exponent that oscillates
    between two stable indices; built by :func:`build_oscillating_density`.

The JSON form is ``{"kind": ..., "drift_a": ..., "symmetric": ...,
"params": {...}}``; named presets are resolved by :func:`preset`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._segments import LinearTable
from ._special import one_minus_cos_moment, stable_norm_const
from .errors import FiniteActivity, InvalidParameters, MonotonicityViolation

_SNAP = 1e-9  # relative tolerance when comparing against dyadic breakpoints


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ValidationReport:
    compensated_mass: float        # integral of (1 ^ u^2) against the measure
    infinite_mass: bool
    infinite_mass_method: str      # "analytic" or "doubling"
    symmetric_declared: bool
    symmetric_ok: bool
    truncation_stable: bool | None
    notes: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# spec classes


class LevyMeasureSpec:
    """Common interface; concrete kinds implement the primitive integrals."""

    kind: str = "abstract"
    drift_a: float
    symmetric: bool

    # |u| <= eps second moment (include_boundary=False gives strict |u| < eps)
    def trunc_second_moment(self, eps: float, include_boundary: bool = True) -> float:
        raise NotImplementedError

    # mu({|u| > r}), strict
    def tail_mass(self, r: float) -> float:
        raise NotImplementedError

    # mu({|u| >= r}); differs from tail_mass only for atomic measures
    def mass_at_least(self, r: float) -> float:
        return self.tail_mass(r)

    # int_{lo < |u| < hi} u mu(du)
    def first_moment_between(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def compensated_mass(self) -> float:
        return self.trunc_second_moment(1.0) + self.tail_mass(1.0)

    def params_jsonable(self) -> dict:
        raise NotImplementedError

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "drift_a": self.drift_a,
            "symmetric": self.symmetric,
            "params": self.params_jsonable(),
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_jsonable(), sort_keys=True, default=_float_token)
        return hashlib.sha256(blob.encode()).hexdigest()

    def label(self) -> str:
        return self.kind


def _float_token(x):
    if isinstance(x, float):
        return float.hex(x)
    raise TypeError(type(x))


@dataclass(frozen=True)
class PowerLaw(LevyMeasureSpec):
    """Symmetric density ``c_alpha * |u|**(-alpha-1)``."""

    alpha: float
    c_alpha: float
    drift_a: float = 0.0
    symmetric: bool = True
    kind = "power_law"

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameters(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.c_alpha <= 0.0:
            raise InvalidParameters("c_alpha must be positive")
        if not self.symmetric:
            raise InvalidParameters("power_law measures are symmetric")

    def density(self, u):
        return self.c_alpha * np.abs(u) ** (-1.0 - self.alpha)

    def trunc_second_moment(self, eps, include_boundary=True):
        return 2.0 * self.c_alpha * eps ** (2.0 - self.alpha) / (2.0 - self.alpha)

    def tail_mass(self, r):
        return 2.0 * self.c_alpha * r ** (-self.alpha) / self.alpha

    def first_moment_between(self, lo, hi):
        return 0.0

    def params_jsonable(self):
        return {"alpha": self.alpha, "c_alpha": self.c_alpha}

    def label(self):
        return f"power_law(alpha={self.alpha:g})"


@dataclass(frozen=True)
class DyadicAtoms(LevyMeasureSpec):
    """Atoms ``2**(n*gamma)`` at ``+-2**(-n*upsilon)`` for integer n.

    The ideal index set is all of the integers.  ``n_min`` truncates the
    large-jump end (weights decay geometrically there); ``n_max=None`` means
    the small-jump end is kept exactly through the closed-form geometric
    sums, which is equivalent to an adaptive cutoff with zero dropped mass.
    """

    gamma: float
    upsilon: float
    n_min: int = -60
    n_max: int | None = None
    drift_a: float = 0.0
    symmetric: bool = True
    kind = "dyadic_atoms"

    def __post_init__(self):
        if self.gamma <= 0 or self.upsilon <= 0 or self.gamma >= 2 * self.upsilon:
            raise InvalidParameters("need 0 < gamma < 2*upsilon")
        if self.n_max is not None and self.n_max < self.n_min:
            raise InvalidParameters("n_max must be >= n_min")
        if not self.symmetric:
            raise InvalidParameters("dyadic_atoms measures are symmetric")

    # index helpers; u_n = 2**(-n*upsilon), weight 2**(n*gamma) per sign
    def _nu(self, x: float) -> float:
        return -math.log2(x) / self.upsilon

    def _n_first_leq(self, eps: float) -> int:
        """Smallest n with u_n <= eps."""
        return math.ceil(self._nu(eps) - _SNAP)

    def _n_first_lt(self, eps: float) -> int:
        """Smallest n with u_n < eps (strict)."""
        return math.floor(self._nu(eps) + _SNAP) + 1

    def _n_last_gt(self, r: float) -> int:
        """Largest n with u_n > r (strict)."""
        return math.ceil(self._nu(r) - _SNAP) - 1

    def _n_last_geq(self, r: float) -> int:
        return math.floor(self._nu(r) + _SNAP)

    def _geom_sum(self, log2_ratio: float, n_lo: int, n_hi: int | None) -> float:
        """Sum of 2**(n*log2_ratio) for n in [n_lo, n_hi] (n_hi=None -> inf)."""
        if n_hi is not None and n_hi < n_lo:
            return 0.0
        q = 2.0 ** log2_ratio
        if q < 1.0:
            head = 2.0 ** (log2_ratio * n_lo)
            if n_hi is None:
                return head / (1.0 - q)
            return head * (1.0 - q ** (n_hi - n_lo + 1)) / (1.0 - q)
        if n_hi is None:
            return math.inf
        tail = 2.0 ** (log2_ratio * n_hi)
        return tail * (1.0 - (1.0 / q) ** (n_hi - n_lo + 1)) / (1.0 - 1.0 / q)

    def trunc_second_moment(self, eps, include_boundary=True):
        n0 = self._n_first_leq(eps) if include_boundary else self._n_first_lt(eps)
        n0 = max(n0, self.n_min)
        return 2.0 * self._geom_sum(self.gamma - 2.0 * self.upsilon, n0, self.n_max)

    def tail_mass(self, r):
        n1 = self._n_last_gt(r) if self.n_max is None else min(self._n_last_gt(r), self.n_max)
        return 2.0 * self._geom_sum(self.gamma, self.n_min, n1) if n1 >= self.n_min else 0.0

    def mass_at_least(self, r):
        n1 = self._n_last_geq(r)
        if self.n_max is not None:
            n1 = min(n1, self.n_max)
        return 2.0 * self._geom_sum(self.gamma, self.n_min, n1) if n1 >= self.n_min else 0.0

    def first_moment_between(self, lo, hi):
        return 0.0

    def total_mass(self, n_max: int) -> float:
        return 2.0 * self._geom_sum(self.gamma, self.n_min, n_max)

    def positive_atoms(self, r: float, weight_tol: float = 0.0):
        """Positions and weights of positive-side atoms with u > r (strict).

        ``weight_tol`` drops the large-jump tail whose cumulative weight is
        below ``weight_tol`` times the retained total.
        """
        n_hi = self._n_last_gt(r)
        if self.n_max is not None:
            n_hi = min(n_hi, self.n_max)
        if n_hi < self.n_min:
            return np.empty(0), np.empty(0)
        n = np.arange(self.n_min, n_hi + 1)
        w = np.exp2(self.gamma * n)
        if weight_tol > 0.0 and len(n) > 1:
            csum = np.cumsum(w)
            keep = csum >= weight_tol * csum[-1]
            keep[np.argmax(keep):] = True
            n, w = n[keep], w[keep]
        u = np.exp2(-self.upsilon * n)
        return u, w

    def small_atoms(self, r: float, count: int):
        """First ``count`` positive-side atoms with u <= r, largest first."""
        n0 = max(self._n_first_leq(r), self.n_min)
        hi = n0 + count - 1 if self.n_max is None else min(self.n_max, n0 + count - 1)
        if hi < n0:
            return np.empty(0), np.empty(0)
        n = np.arange(n0, hi + 1)
        return np.exp2(-self.upsilon * n), np.exp2(self.gamma * n)

    def params_jsonable(self):
        return {
            "gamma": self.gamma,
            "upsilon": self.upsilon,
            "n_min": self.n_min,
            "n_max": self.n_max,
        }

    def label(self):
        return f"dyadic_atoms(gamma={self.gamma:g}, upsilon={self.upsilon:g})"


def _fit_log_slope(u: np.ndarray, m: np.ndarray) -> float:
    x = np.log(u)
    y = np.log(np.maximum(m, 1e-300))
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


@dataclass(frozen=True, eq=False)
class TabulatedDensity(LevyMeasureSpec):
    """Positive-side density table with power-law ends.

    Between the log-spaced nodes the density is linear in ``u`` (that
    interpolation rule *defines* the measure, so all integrals below are
    exact).  Below the first node the density continues as
    ``m[0] * (u/u[0])**(-1-inner_exponent)``, which keeps the total mass
    infinite; above the last node it continues with ``tail_exponent`` unless
    ``compact_support`` is set.  Exponents default to fits over the first
    and last decade of the table.
    """

    u: np.ndarray
    m: np.ndarray
    symmetric: bool = True
    drift_a: float = 0.0
    inner_exponent: float | None = None
    tail_exponent: float | None = None
    compact_support: bool = False
    meta: dict = field(default_factory=dict)
    kind = "tabulated"

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        m = np.asarray(self.m, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "m", m)
        if u.ndim != 1 or u.size < 8:
            raise InvalidParameters("need at least 8 table nodes")
        if np.any(np.diff(u) <= 0) or u[0] <= 0:
            raise InvalidParameters("nodes must be positive and ascending")
        if np.any(m < 0):
            raise InvalidParameters("density values must be nonnegative")

    @cached_property
    def _table(self) -> LinearTable:
        return LinearTable(self.u, self.m)

    @cached_property
    def inner_a(self) -> float:
        if self.inner_exponent is not None:
            a = self.inner_exponent
        else:
            first = self.u <= self.u[0] * 10.0
            a = -1.0 - _fit_log_slope(self.u[first], self.m[first])
        if a >= 2.0:
            raise InvalidParameters(f"inner exponent {a:.3f} >= 2 gives infinite (1^u^2)-mass")
        return a

    @cached_property
    def outer_a(self) -> float:
        if self.compact_support:
            return math.inf
        if self.tail_exponent is not None:
            a = self.tail_exponent
        else:
            last = self.u >= self.u[-1] / 10.0
            a = -1.0 - _fit_log_slope(self.u[last], self.m[last])
        if a <= 0.0:
            raise InvalidParameters(f"tail exponent {a:.3f} <= 0 gives infinite tail mass")
        return a

    @property
    def _sides(self) -> float:
        return 2.0 if self.symmetric else 1.0

    def _inner_coeff(self) -> float:
        return self.m[0] * self.u[0] ** (1.0 + self.inner_a)

    def _outer_coeff(self) -> float:
        if self.compact_support:
            return 0.0
        return self.m[-1] * self.u[-1] ** (1.0 + self.outer_a)

    def half_moment(self, k: int, lo: float, hi: float) -> float:
        """int_lo^hi u^k m(u) du on the positive side, extensions included."""
        if hi <= lo:
            return 0.0
        total = 0.0
        u0, uK = self.u[0], self.u[-1]
        if lo < u0:
            a = self.inner_a
            c = self._inner_coeff()
            p = k - a
            top = min(hi, u0)
            if abs(p) < 1e-12:
                total += c * math.log(top / lo) if lo > 0 else math.inf
            else:
                lo_term = lo ** p if lo > 0 else (0.0 if p > 0 else math.inf)
                total += c * (top ** p - lo_term) / p
        total += self._table.moment(k, lo, hi)
        if hi > uK and not self.compact_support:
            a = self.outer_a
            c = self._outer_coeff()
            p = k - a
            bot = max(lo, uK)
            if abs(p) < 1e-12:
                total += c * math.log(hi / bot)
            elif math.isinf(hi):
                if p >= 0:
                    return math.inf
                total += -c * bot ** p / p
            else:
                total += c * (hi ** p - bot ** p) / p
        return total

    def trunc_second_moment(self, eps, include_boundary=True):
        return self._sides * self.half_moment(2, 0.0, eps)

    def tail_mass(self, r):
        return self._sides * self.half_moment(0, r, math.inf)

    def first_moment_between(self, lo, hi):
        if self.symmetric:
            return 0.0
        return self.half_moment(1, lo, hi)

    def density_pos(self, x):
        """Positive-side density at |x| (per side)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inner = x < self.u[0]
        outer = x > self.u[-1]
        mid = ~(inner | outer)
        if np.any(mid):
            out[mid] = np.interp(x[mid], self.u, self.m)
        if np.any(inner):
            out[inner] = self._inner_coeff() * x[inner] ** (-1.0 - self.inner_a)
        if np.any(outer) and not self.compact_support:
            out[outer] = self._outer_coeff() * x[outer] ** (-1.0 - self.outer_a)
        return out

    def params_jsonable(self):
        return {
            "u": [float(v) for v in self.u],
            "m": [float(v) for v in self.m],
            "inner_exponent": self.inner_exponent,
            "tail_exponent": self.tail_exponent,
            "compact_support": self.compact_support,
        }

    def label(self):
        return f"tabulated({len(self.u)} nodes)"


# ---------------------------------------------------------------------------
# oscillating-exponent construction


@dataclass(frozen=True)
class Modulator:
    """Stable-index profile v -> alpha(v) used by the oscillating build."""

    name: str
    alpha_minus: float
    alpha_plus: float

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        mid = 0.5 * (self.alpha_minus + self.alpha_plus)
        half = 0.5 * (self.alpha_plus - self.alpha_minus)
        if self.name == "default":
            return mid + half * np.sin(np.log1p(np.log1p(v)))
        if self.name == "non_decaying":
            # counterexample profile: v * alpha'(v) does not vanish
            return mid + half * np.sin(np.log1p(v))
        if self.name == "fast":
            # oscillates on unit scale; breaks the derivative positivity
            return mid + half * np.sin(v)
        raise InvalidParameters(f"unknown modulator {self.name!r}")

    def v_alpha_prime(self, v: float, h: float = 1e-4) -> float:
        return v * (self(v + h) - self(v - h)) / (2 * h)


def build_oscillating_density(
    alpha_minus: float,
    alpha_plus: float,
    modulator: Modulator | None = None,
    *,
    v_max: float = 21.0,
    nodes_per_decade: int = 48,
) -> TabulatedDensity:
    """Realize a measure whose lower exponent is exp-integral of the modulator.

    The construction integrates ``exp(alpha(w) * w)`` to a cumulative profile,
    recovers the density from its exact derivative, and clips to zero beyond
    the first point where the derivative stays nonnegative, which makes the
    measure compactly supported and keeps the small-frequency exponent exactly
    quadratic.  Constant modulators recover the plain power law.
    """
    if not 0.0 < alpha_minus <= alpha_plus < 2.0:
        raise InvalidParameters("need 0 < alpha_minus <= alpha_plus < 2")
    if modulator is None:
        modulator = Modulator("default", alpha_minus, alpha_plus)

    dv = 0.002
    v = np.arange(0.0, v_max + dv, dv)
    g = modulator(v) * v
    # exp-trapezoid: exact on intervals where g is linear
    dg = np.diff(g)
    eg = np.exp(g)
    steps = np.where(
        np.abs(dg) > 1e-12,
        (eg[1:] - eg[:-1]) * np.diff(v) / dg,
        0.5 * (eg[1:] + eg[:-1]) * np.diff(v),
    )
    theta_minus = np.concatenate([[0.0], np.cumsum(steps)])

    h = 2.0 * theta_minus - eg  # r * m(r) * 2 evaluated at v = -ln r
    nonneg = h >= -1e-9 * eg
    ok_from = None
    for i in range(len(v)):
        if h[i] >= 0 and np.all(nonneg[i:]):
            ok_from = i
            break
    if ok_from is None:
        raise MonotonicityViolation(
            "derivative of the cumulative profile stays negative; "
            "modulator oscillates too fast"
        )
    v0 = float(v[ok_from])
    if v_max - v0 < 2.0 * math.log(10.0):
        raise MonotonicityViolation(
            f"nonnegative density only beyond v0={v0:.2f}, leaving under two "
            f"usable decades below v_max={v_max:g}"
        )

    decades = (v_max - v0) / math.log(10.0)
    n_nodes = max(int(decades * nodes_per_decade), 16)
    r = np.geomspace(math.exp(-v_max), math.exp(-v0), n_nodes)
    vr = -np.log(r)
    h_r = np.maximum(np.interp(vr, v, h), 0.0)
    m = h_r / (2.0 * r)

    vap = modulator.v_alpha_prime(v_max)
    meta = {
        "alpha_minus": alpha_minus,
        "alpha_plus": alpha_plus,
        "modulator": modulator.name,
        "v0": v0,
        "v_max": v_max,
        "v_alpha_prime_at_vmax": vap,
        "modulator_decay_ok": bool(abs(vap) < 0.05 * (2.0 - alpha_plus)),
    }
    return TabulatedDensity(
        u=r, m=m, symmetric=True, compact_support=True, meta=meta
    )


@dataclass(frozen=True)
class OscillatingStable(LevyMeasureSpec):
    """Oscillating-exponent measure; delegates to its realized table."""

    alpha_minus: float
    alpha_plus: float
    modulator_name: str = "default"
    v_max: float = 21.0
    drift_a: float = 0.0
    symmetric: bool = True
    kind = "oscillating"

    def __post_init__(self):
        if not 0.0 < self.alpha_minus <= self.alpha_plus < 2.0:
            raise InvalidParameters("need 0 < alpha_minus <= alpha_plus < 2")

    @cached_property
    def table(self) -> TabulatedDensity:
        return build_oscillating_density(
            self.alpha_minus,
            self.alpha_plus,
            Modulator(self.modulator_name, self.alpha_minus, self.alpha_plus),
            v_max=self.v_max,
        )

    def trunc_second_moment(self, eps, include_boundary=True):
        return self.table.trunc_second_moment(eps, include_boundary)

    def tail_mass(self, r):
        return self.table.tail_mass(r)

    def first_moment_between(self, lo, hi):
        return self.table.first_moment_between(lo, hi)

    def params_jsonable(self):
        return {
            "alpha_minus": self.alpha_minus,
            "alpha_plus": self.alpha_plus,
            "modulator": self.modulator_name,
            "v_max": self.v_max,
        }

    def label(self):
        return f"oscillating({self.alpha_minus:g}..{self.alpha_plus:g})"


# ---------------------------------------------------------------------------
# module-level operations


def truncated_second_moment(spec: LevyMeasureSpec, eps: float) -> float:
    """Second moment of the measure restricted to ``|u| <= eps``."""
    if eps <= 0:
        raise InvalidParameters("eps must be positive")
    return spec.trunc_second_moment(eps)


def tail_mass(spec: LevyMeasureSpec, r: float) -> float:
    """Mass of ``{|u| > r}``."""
    if r <= 0:
        raise InvalidParameters("r must be positive")
    return spec.tail_mass(r)


def validate(spec: LevyMeasureSpec) -> ValidationReport:
    """Check integrability, infinite activity, and declared symmetry.

    Raises :class:`FiniteActivity` when the measure has finite total mass
    (the density machinery gives no guarantees there).
    """
    comp = spec.compensated_mass()
    if not math.isfinite(comp):
        raise InvalidParameters("compensated mass (1 ^ u^2) is not finite")

    notes: list[str] = []
    truncation_stable = None
    if isinstance(spec, PowerLaw):
        infinite, method = True, "analytic"
    elif isinstance(spec, DyadicAtoms):
        if spec.n_max is None:
            infinite, method = True, "analytic"
        else:
            m1 = spec.total_mass(spec.n_max)
            m2 = spec.total_mass(2 * abs(spec.n_max) + spec.n_max + 4)
            truncation_stable = m2 > 1.5 * m1
            infinite, method = truncation_stable, "doubling"
            if not infinite:
                notes.append("truncated atom window has saturating mass")
    else:
        table = spec.table if isinstance(spec, OscillatingStable) else spec
        masses = [table.tail_mass(table.u[0] * 2.0 ** (-k)) for k in range(0, 24, 4)]
        growth = [b / a for a, b in zip(masses, masses[1:])]
        infinite = all(g > 1.02 for g in growth)
        method = "doubling"
        if table.inner_a < 0:
            infinite = False
    if not infinite:
        raise FiniteActivity(
            "measure has finite total mass; infinite activity is required"
        )

    if spec.symmetric:
        odd = spec.first_moment_between(0.5, 2.0)
        symmetric_ok = abs(odd) <= 1e-12 * max(comp, 1.0)
    else:
        symmetric_ok = False
    return ValidationReport(
        compensated_mass=comp,
        infinite_mass=infinite,
        infinite_mass_method=method,
        symmetric_declared=spec.symmetric,
        symmetric_ok=symmetric_ok,
        truncation_stable=truncation_stable,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# presets and JSON


def preset(name: str, **params) -> LevyMeasureSpec:
    """Resolve a named preset: cauchy, stable, dyadic, oscillating."""
    name = name.lower()
    if name == "cauchy":
        return PowerLaw(alpha=1.0, c_alpha=1.0 / math.pi)
    if name == "stable":
        alpha = float(params.pop("alpha", 1.5))
        c = params.pop("c_alpha", None)
        c = stable_norm_const(alpha) if c is None else float(c)
        _reject_extras(params)
        return PowerLaw(alpha=alpha, c_alpha=c)
    if name == "dyadic":
        gamma = float(params.pop("gamma", 1.0))
        upsilon = float(params.pop("upsilon", 1.0))
        _reject_extras(params)
        return DyadicAtoms(gamma=gamma, upsilon=upsilon)
    if name == "oscillating":
        am = float(params.pop("alpha_minus", 0.8))
        ap = float(params.pop("alpha_plus", 1.6))
        _reject_extras(params)
        return OscillatingStable(alpha_minus=am, alpha_plus=ap)
    raise InvalidParameters(f"unknown preset {name!r}")


def _reject_extras(params: dict):
    if params:
        raise InvalidParameters(f"unknown preset parameters {sorted(params)}")


def from_jsonable(doc: dict) -> LevyMeasureSpec:
    kind = doc.get("kind")
    p = dict(doc.get("params", {}))
    common = {
        "drift_a": float(doc.get("drift_a", 0.0)),
        "symmetric": bool(doc.get("symmetric", True)),
    }
    if kind == "power_law":
        return PowerLaw(alpha=p["alpha"], c_alpha=p["c_alpha"], **common)
    if kind == "dyadic_atoms":
        return DyadicAtoms(
            gamma=p["gamma"],
            upsilon=p["upsilon"],
            n_min=int(p.get("n_min", -60)),
            n_max=p.get("n_max"),
            **common,
        )
    if kind == "tabulated":
        return TabulatedDensity(
            u=np.asarray(p["u"], dtype=float),
            m=np.asarray(p["m"], dtype=float),
            inner_exponent=p.get("inner_exponent"),
            tail_exponent=p.get("tail_exponent"),
            compact_support=bool(p.get("compact_support", False)),
            **common,
        )
    if kind == "oscillating":
        return OscillatingStable(
            alpha_minus=p["alpha_minus"],
            alpha_plus=p["alpha_plus"],
            modulator_name=p.get("modulator", "default"),
            v_max=float(p.get("v_max", 21.0)),
            **common,
        )
    raise InvalidParameters(f"unknown measure kind {kind!r}")


def load_spec(source: str) -> LevyMeasureSpec:
    """Resolve ``name[:k=v,...]`` presets or a JSON file path."""
    if source.endswith(".json"):
        with open(source) as fh:
            return from_jsonable(json.load(fh))
    name, _, argstr = source.partition(":")
    params = {}
    if argstr:
        for item in argstr.split(","):
            key, _, val = item.partition("=")
            params[key.strip()] = val
    return preset(name, **params)
