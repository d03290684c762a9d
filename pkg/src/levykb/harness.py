"""Command orchestration: one function per CLI command.

Each ``run_*`` function returns ``(verdict, report_dict)`` where the verdict
is PASS / MARGINAL / FAIL, and optionally writes machine-readable outputs
(JSON report, CSV sidecars, a manifest with the config hash and all fitted
constants) into an output directory.  Commands are pure given their config,
so reruns are idempotent.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds, density, exponents, mc, measures, scales
from .decomposition import build as build_decomposition
from .errors import LevykbError


@dataclass
class RunConfig:
    spec_source: str = "cauchy"
    t_lo: float = 1e-4
    t_hi: float = 1.0
    t_n: int = 25
    x_points: int = 4001
    k: int = 0
    tail_cdf: dict | None = None
    tail_density: dict | None = None
    mc_n: int = 200_000
    seed: int = 1
    out_dir: str | None = None
    fmt: str = "json"

    def t_grid(self) -> np.ndarray:
        if self.t_n < 1 or self.t_lo <= 0 or self.t_hi < self.t_lo:
            raise ValueError("t grid must be nonempty and inside (0, t0]")
        return np.geomspace(self.t_lo, self.t_hi, self.t_n)

    def to_jsonable(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def parse_grid(text: str) -> tuple[float, float, int]:
    lo, hi, n = text.split(":")
    return float(lo), float(hi), int(n)


def _config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(
        json.dumps(cfg.to_jsonable(), sort_keys=True, default=str).encode()
    ).hexdigest()[:16]


def _emit(cfg: RunConfig, name: str, report: dict, constants: dict | None = None):
    if cfg.out_dir is None:
        return
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, f"{name}.json"), "w") as fh:
        json.dump(report, fh, indent=2, default=_jsonable)
    manifest = {
        "command": name,
        "config": cfg.to_jsonable(),
        "config_hash": _config_hash(cfg),
        "version": __version__,
        "constants": constants or {},
    }
    with open(os.path.join(cfg.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, bool):
        return x
    return str(x)


def _spec(cfg: RunConfig) -> measures.LevyMeasureSpec:
    return measures.load_spec(cfg.spec_source)


# ---------------------------------------------------------------------------
# commands


def run_validate(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    try:
        rep = measures.validate(spec)
    except LevykbError as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        _emit(cfg, "validate", report)
        return "FAIL", report
    report = {
        "spec": spec.to_jsonable(),
        "spec_hash": spec.content_hash(),
        "compensated_mass": rep.compensated_mass,
        "infinite_mass": rep.infinite_mass,
        "infinite_mass_method": rep.infinite_mass_method,
        "symmetric_ok": rep.symmetric_ok,
        "truncation_stable": rep.truncation_stable,
        "notes": list(rep.notes),
    }
    verdict = "PASS" if rep.infinite_mass and (
        rep.symmetric_ok or not rep.symmetric_declared) else "FAIL"
    report["verdict"] = verdict
    _emit(cfg, "validate", report)
    return verdict, report


def run_exponents(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    prof = exponents.exponent_profile(spec)
    grid = exponents.default_xi_grid(spec=spec)
    sandwich = exponents.sandwich_check(spec, grid)
    doubling = exponents.doubling_growth_check(spec, prof.beta_hat, grid)
    relation = exponents.integral_relation_check(
        spec, 0.5, 50.0, rtol=1e-6 if spec.kind == "power_law" else 1e-4
    )
    verdict = "PASS" if (sandwich["pass"] and doubling["pass"]
                         and relation["pass"]) else "FAIL"
    report = {
        "beta_hat": prof.beta_hat,
        "c_floor": prof.c_floor,
        "caveat": prof.caveat,
        "sandwich": sandwich,
        "doubling_growth": doubling,
        "integral_relation": relation,
        "verdict": verdict,
    }
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        prof.to_csv(os.path.join(cfg.out_dir, "exponents.csv"))
    _emit(cfg, "exponents", report,
          constants={"beta_hat": prof.beta_hat, "c_floor": prof.c_floor})
    return verdict, report


def run_scales(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    table = scales.scale_table(spec, cfg.t_grid())
    comp = scales.comparability_report(spec, cfg.t_grid())
    monotone = bool(np.all(np.diff(table.rho) <= 1e-12 * table.rho[:-1]))
    ordered = bool(np.all(table.rho_U <= table.rho_L * (1.0 + 1e-9)))
    re_vals = exponents.re_psi(spec, table.rho)
    fixed_point = float(np.max(np.abs(re_vals * table.t_grid - 1.0)))
    verdict = "PASS" if monotone and ordered and fixed_point < 1e-8 else "FAIL"
    report = {
        "monotone": monotone,
        "ordering_U_le_L": ordered,
        "fixed_point_rel_err": fixed_point,
        "comparability": comp,
        "verdict": verdict,
    }
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        table.to_csv(os.path.join(cfg.out_dir, "scales.csv"))
    _emit(cfg, "scales", report)
    return verdict, report


def run_density(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    t_grid = cfg.t_grid()
    rows = []
    for t in t_grid:
        rho_t = scales.rho(spec, t)
        xs = np.linspace(-50.0 / rho_t, 50.0 / rho_t, cfg.x_points)
        grid = density.density(spec, t, xs, k=cfg.k, keep_lattice=False)
        rows.append((t, grid))
    t_mid = t_grid[len(t_grid) // 2]
    conv = density.convolution_check(spec, t_mid)
    verdict = "PASS" if conv.rel_dev <= 1e-5 else "FAIL"
    report = {
        "t_grid": t_grid.tolist(),
        "k": cfg.k,
        "tail_bounds": [g.tail_bound for _, g in rows],
        "convolution_check": {
            "t": conv.t, "rel_dev": conv.rel_dev, "m_max": conv.m_max,
        },
        "verdict": verdict,
    }
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        for t, grid in rows:
            grid.to_csv(os.path.join(cfg.out_dir, f"density_t{t:.6g}.csv"))
    _emit(cfg, "density", report)
    return verdict, report


def run_bounds(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    t_grid = np.geomspace(max(cfg.t_lo, 1e-3), cfg.t_hi, min(cfg.t_n, 7))
    certs = [
        bounds.fit_on_diagonal(spec, t_grid),
        bounds.fit_compound_upper(spec, t_grid),
        bounds.fit_compound_lower(spec, t_grid),
        bounds.fit_derivative_upper(spec, t_grid, k=1),
        bounds.fit_derivative_upper(spec, t_grid, k=2),
    ]
    if cfg.tail_cdf is not None:
        certs.append(bounds.bell_upper(
            spec, t_grid, bounds.TailSpec.from_jsonable(dict(cfg.tail_cdf, form="cdf"))))
    if cfg.tail_density is not None:
        certs.append(bounds.bell_upper(
            spec, t_grid, bounds.TailSpec.from_jsonable(dict(cfg.tail_density, form="density"))))
    ik = bounds.i_k_diagnostic(spec, t_grid, k=0, lam=1.0)
    verdicts = [c.verdict for c in certs]
    verdict = ("FAIL" if "FAIL" in verdicts
               else "MARGINAL" if "MARGINAL" in verdicts else "PASS")
    report = {
        "certificates": [c.to_jsonable() for c in certs],
        "i_k_diagnostic": ik,
        "verdict": verdict,
    }
    constants = {c.estimate_id: c.constants for c in certs}
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        for c in certs:
            c.dump_json(os.path.join(cfg.out_dir, f"cert_{c.estimate_id}.json"))
    _emit(cfg, "bounds", report, constants=constants)
    return verdict, report


def run_mc(cfg: RunConfig) -> tuple[str, dict]:
    spec = _spec(cfg)
    t = cfg.t_hi
    sampler = mc.SamplerConfig(n_samples=cfg.mc_n, seed=cfg.seed)
    samples = mc.sample_increments(spec, t, sampler)
    q = float(np.quantile(np.abs(samples), 0.9995))
    xs = np.linspace(-1.3 * q, 1.3 * q, 262145)
    grid = density.density(spec, t, xs, keep_lattice=False,
                           space_rtol=1e-7, verify=False)
    stats = mc.compare_to_density(samples, grid, spec=spec)
    verdict = "PASS" if stats["pass"] else "FAIL"
    report = {"t": t, "sampler": sampler.to_jsonable(), **stats,
              "verdict": verdict}
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        mc.save_samples(os.path.join(cfg.out_dir, "samples.npz"),
                        samples, spec, t, sampler)
    _emit(cfg, "mc", report)
    return verdict, report


# ---------------------------------------------------------------------------
# worked examples


def run_example(name: str, cfg: RunConfig, **params) -> tuple[str, dict]:
    if name == "exa1":
        return _example_stable_band(cfg, float(params.get("alpha", 1.0)))
    if name == "exa2a":
        return _example_dyadic_atoms(cfg, float(params.get("gamma", 1.0)),
                                     float(params.get("upsilon", 1.0)))
    if name == "exa2b":
        return _example_dyadic_bell(cfg, float(params.get("gamma", 1.5)),
                                    float(params.get("upsilon", 1.0)))
    if name == "exa3":
        return _example_oscillating(cfg,
                                    float(params.get("alpha_minus", 0.8)),
                                    float(params.get("alpha_plus", 1.6)))
    raise ValueError(f"unknown example {name!r}; choose exa1, exa2a, exa2b, exa3")


def _example_stable_band(cfg: RunConfig, alpha: float) -> tuple[str, dict]:
    """Two-sided envelope  p_t(x) vs t^{-1/a} (1 ^ |t^{-1/a} x|^{-a-1})."""
    spec = measures.preset("stable", alpha=alpha)
    t_grid = np.geomspace(1e-3, 1.0, 7)
    lo, hi = np.inf, 0.0
    for t in t_grid:
        rho_t = t ** (-1.0 / alpha)
        xs = np.linspace(-40.0 / rho_t, 40.0 / rho_t, 2001)
        vals = density.density(spec, t, xs, keep_lattice=False).values
        z = np.abs(xs) * rho_t
        f = np.minimum(1.0, np.where(z > 0, z, 1.0) ** (-alpha - 1.0))
        ratio = vals / (rho_t * f)
        lo = min(lo, float(ratio.min()))
        hi = max(hi, float(ratio.max()))
    band_ratio = hi / lo
    verdict = "PASS" if band_ratio < 10.0 else "FAIL"
    report = {"alpha": alpha, "k1": lo, "k2": hi, "band_ratio": band_ratio,
              "verdict": verdict}
    _emit(cfg, "example_exa1", report, constants={"k1": lo, "k2": hi})
    return verdict, report


def _example_dyadic_atoms(cfg: RunConfig, gamma: float,
                          upsilon: float) -> tuple[str, dict]:
    """Lower bound at atom positions plus the bell-inexactness diagnostic.

    Verification at large n is limited by the floating-point range of the
    atom weights; the table reports the retained index range per horizon.
    """
    spec = measures.DyadicAtoms(gamma=gamma, upsilon=upsilon)
    t_grid = np.geomspace(2.0 ** -12, 2.0 ** -2, 6)
    table = bounds._dyadic_atom_table(spec, t_grid)
    alpha = gamma / upsilon
    divergence = []
    for t in t_grid:
        dec = build_decomposition(spec, t)
        n_idx = np.round(-np.log2(dec.atoms_u) / upsilon).astype(int)
        s = t ** (1.0 - 1.0 / alpha) * float(
            np.sum(np.exp2(n_idx * (gamma - upsilon))))
        divergence.append(s)
    c = table["c_min"]
    verdict = "PASS" if c > 0 else "FAIL"
    report = {
        "gamma": gamma, "upsilon": upsilon, "c_min": c,
        "atom_rows": table["rows"],
        "bell_integral_diagnostic": {
            "t_grid": t_grid.tolist(), "values": divergence,
            "note": "grows without bound as t -> 0 when gamma <= upsilon, "
                    "so no integrable bell envelope exists",
        },
        "verdict": verdict,
    }
    _emit(cfg, "example_exa2a", report, constants={"c_min": c})
    return verdict, report


def _example_dyadic_bell(cfg: RunConfig, gamma: float,
                         upsilon: float) -> tuple[str, dict]:
    """Bell envelope from the tail-dominated regime 1 < gamma/upsilon < 2.

    Off-atom margins are reported without a verdict: the lower bound is
    only claimed on the atom set.
    """
    alpha = gamma / upsilon
    if not 1.0 < alpha < 2.0:
        raise ValueError("exa2b needs 1 < gamma/upsilon < 2")
    spec = measures.DyadicAtoms(gamma=gamma, upsilon=upsilon)
    t_grid = np.geomspace(2.0 ** -12, 2.0 ** -2, 5)
    tail = bounds.TailSpec(form="cdf", kind="power", alpha=alpha)
    cert = bounds.bell_upper(spec, t_grid, tail)
    # off-atom ratio table at the midpoints between atoms
    t_mid = float(t_grid[len(t_grid) // 2])
    dec = build_decomposition(spec, t_mid)
    mids = np.sqrt(dec.atoms_u[:-1] * dec.atoms_u[1:]) if len(dec.atoms_u) > 1 else np.array([])
    off_rows = []
    if len(mids):
        vals = density.density(spec, t_mid, mids, space_rtol=1e-7,
                               keep_lattice=False).values
        rho_t = dec.rho_t
        f = np.minimum(1.0, (np.abs(mids) * rho_t) ** (-alpha))
        for x, v, fv in zip(mids, vals, f):
            off_rows.append({"x": float(x), "p": float(v),
                             "envelope_ratio": float(v / (rho_t * fv))})
    report = {
        "gamma": gamma, "upsilon": upsilon, "alpha": alpha,
        "bell_certificate": cert.to_jsonable(),
        "off_atom_margins": off_rows,
        "off_atom_note": "reported without verdict",
        "verdict": cert.verdict,
    }
    _emit(cfg, "example_exa2b", report, constants=cert.constants)
    return cert.verdict, report


def _example_oscillating(cfg: RunConfig, alpha_minus: float,
                         alpha_plus: float) -> tuple[str, dict]:
    spec = measures.OscillatingStable(alpha_minus=alpha_minus,
                                      alpha_plus=alpha_plus)
    mod = measures.Modulator("default", alpha_minus, alpha_plus)

    flat = measures.build_oscillating_density(alpha_plus, alpha_plus)
    r = flat.u[flat.u <= 1e-3]
    target = (2.0 - alpha_plus) / (2.0 * alpha_plus) * r ** (-1.0 - alpha_plus)
    recovery = float(np.max(np.abs(flat.density_pos(r) / target - 1.0)))

    xi = np.geomspace(1e4, 1e6, 80)
    ratio = exponents.psi_U(spec, xi) / exponents.psi_L(spec, xi)
    tracking = float(np.max(np.abs(ratio / (2.0 / mod(np.log(xi))) - 1.0)))
    beta_hat, _ = exponents.estimate_beta(spec)
    beta_ok = beta_hat <= 2.0 / alpha_minus + 0.1
    verdict = "PASS" if (recovery <= 0.01 and tracking <= 0.10 and beta_ok) else "FAIL"
    report = {
        "alpha_minus": alpha_minus, "alpha_plus": alpha_plus,
        "modulator": spec.table.meta,
        "constant_alpha_recovery": recovery,
        "ratio_tracking_top_decades": tracking,
        "beta_hat": beta_hat,
        "beta_bound": 2.0 / alpha_minus + 0.1,
        "verdict": verdict,
    }
    _emit(cfg, "example_exa3", report, constants={"beta_hat": beta_hat})
    return verdict, report


EXIT_CODES = {"PASS": 0, "MARGINAL": 2, "FAIL": 1}
