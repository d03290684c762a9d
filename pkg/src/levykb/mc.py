"""Sampling oracle for the decomposition law.

Increments are simulated componentwise: big jumps as a compound Poisson
draw from the normalized big-jump intensity, mid-range jumps as a
compensated compound Poisson, and jumps below the cutoff either replaced
by a centered normal matching their truncated second moment or dropped.

Reproducibility contract: one counter-based generator family (Philox),
keyed by ``(seed, component, chunk)`` with a fixed chunk size, so the
sample array is bit-identical for a given config regardless of how the
chunks would be scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .decomposition import build as build_decomposition
from .density import DensityGrid, cdf_points
from .errors import DeltaTooCoarse, GridCoverageInsufficient
from .measures import DyadicAtoms, LevyMeasureSpec, OscillatingStable, PowerLaw

_CHUNK = 1 << 15
_STREAM_COUNT_BIG = 1
_STREAM_JUMP_BIG = 2
_STREAM_COUNT_MID = 3
_STREAM_JUMP_MID = 4
_STREAM_GAUSS = 5
_QUALITY_GATE = 5.0


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int
    seed: int
    delta: float | None = None        # small-jump cutoff; None picks the
                                      # largest cutoff passing the gate
    scheme: str = "gaussian"          # "gaussian" or "drop"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.scheme not in ("gaussian", "drop"):
            raise ValueError("scheme must be 'gaussian' or 'drop'")

    def to_jsonable(self) -> dict:
        return {"n_samples": self.n_samples, "seed": self.seed,
                "delta": self.delta, "scheme": self.scheme}


def sigma_over_delta(spec: LevyMeasureSpec, t: float, delta: float) -> float:
    return math.sqrt(t * spec.trunc_second_moment(delta)) / delta


def auto_delta(spec: LevyMeasureSpec, t: float, cut: float,
               gate: float = _QUALITY_GATE) -> float:
    """Largest delta <= cut passing the Gaussian-substitution gate."""
    if sigma_over_delta(spec, t, cut) >= gate:
        return cut
    lo, hi = cut * 1e-12, cut
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if sigma_over_delta(spec, t, mid) >= gate:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0001:
            break
    return lo


def _rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF,
                    ((chunk & 0xFFFFFFFF) << 8) | stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _JumpSampler:
    """Inverse-CDF sampler for the measure restricted to lo < |u| <= hi."""

    def __init__(self, spec: LevyMeasureSpec, lo: float, hi: float):
        self.symmetric = spec.symmetric
        self.intensity = spec.tail_mass(lo)
        if math.isfinite(hi):
            self.intensity -= spec.tail_mass(hi)
        if isinstance(spec, PowerLaw):
            self.kind = "power"
            self.alpha = spec.alpha
            self.lo_pow = lo ** (-spec.alpha)
            self.hi_pow = hi ** (-spec.alpha)
        elif isinstance(spec, DyadicAtoms):
            self.kind = "atoms"
            u, w = spec.positive_atoms(lo)
            keep = u <= hi * (1.0 + 1e-12)
            self.u = u[keep]
            cum = np.cumsum(w[keep])
            self.cum = cum / cum[-1]
        else:
            table = spec.table if isinstance(spec, OscillatingStable) else spec
            self.kind = "table"
            if not math.isfinite(hi):
                hi = float(table.u[-1])
                while spec.tail_mass(hi) > 1e-12 * self.intensity:
                    hi *= 2.0
            grid = np.geomspace(max(lo, 1e-300), hi, 4000)
            mass = np.array([table.half_moment(0, lo, g) for g in grid])
            mass[0] = 0.0
            self.grid = grid
            self.cdf = mass / mass[-1]

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        v = rng.random(n)
        if self.kind == "power":
            mag = (self.lo_pow - v * (self.lo_pow - self.hi_pow)) ** (-1.0 / self.alpha)
        elif self.kind == "atoms":
            mag = self.u[np.searchsorted(self.cum, v, side="left").clip(0, len(self.u) - 1)]
        else:
            mag = np.interp(v, self.cdf, self.grid)
        if self.symmetric:
            signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
            return mag * signs
        return mag


def sample_increments(spec: LevyMeasureSpec, t: float,
                      cfg: SamplerConfig) -> np.ndarray:
    """n i.i.d. draws of the increment at horizon t."""
    dec = build_decomposition(spec, t)
    cut = dec.cut
    delta = cfg.delta if cfg.delta is not None else auto_delta(spec, t, cut)
    if not 0.0 < delta <= cut * (1.0 + 1e-12):
        raise ValueError("delta must lie in (0, 1/rho_t]")
    use_gauss = cfg.scheme == "gaussian"
    if use_gauss and sigma_over_delta(spec, t, delta) < _QUALITY_GATE * (1 - 1e-9):
        raise DeltaTooCoarse(
            f"sigma(delta)/delta = {sigma_over_delta(spec, t, delta):.2f} < "
            f"{_QUALITY_GATE}; decrease delta"
        )

    big = _JumpSampler(spec, cut, math.inf) if dec.lambda_total > 0 else None
    lam_big = dec.lambda_total
    mid = _JumpSampler(spec, delta, cut) if delta < cut else None
    lam_mid = t * mid.intensity if mid is not None else 0.0
    mid_mean = t * spec.first_moment_between(delta, cut)
    sigma_small = math.sqrt(t * spec.trunc_second_moment(delta)) if use_gauss else 0.0

    out = np.empty(cfg.n_samples)
    for start in range(0, cfg.n_samples, _CHUNK):
        n = min(_CHUNK, cfg.n_samples - start)
        chunk = start // _CHUNK
        total = np.zeros(n)
        if big is not None and lam_big > 0:
            counts = _rng(cfg.seed, _STREAM_COUNT_BIG, chunk).poisson(lam_big, n)
            jumps = big.draw(_rng(cfg.seed, _STREAM_JUMP_BIG, chunk), int(counts.sum()))
            idx = np.repeat(np.arange(n), counts)
            total += np.bincount(idx, weights=jumps, minlength=n)
        if mid is not None and lam_mid > 0:
            counts = _rng(cfg.seed, _STREAM_COUNT_MID, chunk).poisson(lam_mid, n)
            jumps = mid.draw(_rng(cfg.seed, _STREAM_JUMP_MID, chunk), int(counts.sum()))
            idx = np.repeat(np.arange(n), counts)
            total += np.bincount(idx, weights=jumps, minlength=n) - mid_mean
        if use_gauss and sigma_small > 0:
            total += sigma_small * _rng(cfg.seed, _STREAM_GAUSS, chunk).standard_normal(n)
        out[start:start + n] = total - dec.a_t
    return out


# ---------------------------------------------------------------------------
# comparison against the Fourier side


def compare_to_density(samples: np.ndarray, grid: DensityGrid,
                       spec: LevyMeasureSpec | None = None) -> dict:
    """Kolmogorov-Smirnov and Cramer-von Mises distances to the grid CDF.

    The grid must cover the central 99.9% of the sample; the CDF comes from
    trapezoid integration of the grid values plus the left-edge offset
    (computed by quadrature when the spec is given, by mass balance
    otherwise).
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = len(samples)
    q_lo = samples[max(int(0.0005 * n) - 1, 0)]
    q_hi = samples[min(int(math.ceil(0.9995 * n)) - 1, n - 1)]
    x = grid.x_grid
    if x[0] > q_lo or x[-1] < q_hi:
        raise GridCoverageInsufficient(
            f"grid [{x[0]:.3g}, {x[-1]:.3g}] misses the central sample range "
            f"[{q_lo:.3g}, {q_hi:.3g}]"
        )
    dx = np.diff(x)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (grid.values[1:] + grid.values[:-1]) * dx)])
    if spec is not None:
        f_left = float(cdf_points(spec, grid.t, np.array([x[0]]))[0])
    else:
        f_left = max(0.0, (1.0 - cum[-1]) / 2.0)
    f_samples = np.clip(f_left + np.interp(samples, x, cum), 0.0, 1.0)

    i = np.arange(1, n + 1)
    ks = float(np.max(np.maximum(np.abs(f_samples - i / n),
                                 np.abs(f_samples - (i - 1) / n))))
    cvm = float(1.0 / (12 * n) + np.sum((f_samples - (2 * i - 1) / (2 * n)) ** 2))
    threshold = 1.63 / math.sqrt(n) * 1.5
    return {"ks_stat": ks, "cvm_stat": cvm, "n": n,
            "threshold": threshold, "pass": ks <= threshold}


def save_samples(path: str, samples: np.ndarray, spec: LevyMeasureSpec,
                 t: float, cfg: SamplerConfig):
    np.savez_compressed(
        path, samples=samples,
        header=json.dumps({
            "spec_hash": spec.content_hash(), "t": t, "cfg": cfg.to_jsonable(),
        }),
    )
