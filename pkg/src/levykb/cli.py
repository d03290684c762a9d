"""Command-line front end.

    levykb <command> --spec <preset|path.json> [options]

Commands: validate, exponents, scales, density, bounds, mc, example.
Presets take inline parameters, e.g. ``--spec stable:alpha=1.5`` or
``--spec dyadic:gamma=1,upsilon=1``.  Exit code 0 means every requested
verdict passed, 2 means a marginal verdict is present, 1 means failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import LevykbError
from .harness import EXIT_CODES, RunConfig, parse_grid
from . import harness


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--spec", default="cauchy",
                   help="preset name[:k=v,...] or path to a JSON spec")
    p.add_argument("--t-grid", default="1e-4:1:25", metavar="a:b:n",
                   help="log-spaced horizon grid (default 1e-4:1:25)")
    p.add_argument("--x-points", type=int, default=4001)
    p.add_argument("--k", type=int, default=0, choices=(0, 1, 2))
    p.add_argument("--tail-cdf", default=None, metavar="JSON",
                   help='e.g. {"kind":"power","alpha":1.5}')
    p.add_argument("--tail-density", default=None, metavar="JSON")
    p.add_argument("--mc-n", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", default="json", choices=("json", "csv"))


def _config(args) -> RunConfig:
    lo, hi, n = parse_grid(args.t_grid)
    return RunConfig(
        spec_source=args.spec,
        t_lo=lo, t_hi=hi, t_n=n,
        x_points=args.x_points,
        k=args.k,
        tail_cdf=json.loads(args.tail_cdf) if args.tail_cdf else None,
        tail_density=json.loads(args.tail_density) if args.tail_density else None,
        mc_n=args.mc_n,
        seed=args.seed,
        out_dir=args.out,
        fmt=args.format,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levykb",
        description="Small-time density machinery for one-dimensional "
                    "Levy processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", "exponents", "scales", "density", "bounds", "mc"):
        p = sub.add_parser(name)
        _add_common(p)
    pex = sub.add_parser("example")
    pex.add_argument("name", choices=("exa1", "exa2a", "exa2b", "exa3"))
    pex.add_argument("--alpha", type=float, default=None)
    pex.add_argument("--gamma", type=float, default=None)
    pex.add_argument("--upsilon", type=float, default=None)
    pex.add_argument("--alpha-minus", type=float, default=None)
    pex.add_argument("--alpha-plus", type=float, default=None)
    _add_common(pex)

    args = parser.parse_args(argv)
    cfg = _config(args)
    try:
        if args.command == "example":
            params = {
                key: val for key, val in (
                    ("alpha", args.alpha), ("gamma", args.gamma),
                    ("upsilon", args.upsilon),
                    ("alpha_minus", args.alpha_minus),
                    ("alpha_plus", args.alpha_plus),
                ) if val is not None
            }
            verdict, report = harness.run_example(args.name, cfg, **params)
        else:
            runner = getattr(harness, f"run_{args.command}")
            verdict, report = runner(cfg)
    except LevykbError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2, default=harness._jsonable))
    print(f"verdict: {verdict}", file=sys.stderr)
    return EXIT_CODES[verdict]


if __name__ == "__main__":
    raise SystemExit(main())
