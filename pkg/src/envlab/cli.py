"""Command-line experiment runner.

Subcommands: volume, bergman, energy, approx, envelope, selftest.
Experiments read a JSON config (--config; committed copies live under
configs/), with --out and --k overriding the config in place.  Reports
are CSV (fixed header) plus self-contained SVG; exit status 1 on any
bound violation, with the offending rows printed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import ExperimentConfig, run_experiment
from .report import CSV_HEADER
from .selftest import run_selftest

DEFAULT_FIXTURES = {
    "volume": "third-quarter",
    "bergman": "third-quarter-fs",
    "energy": "bump-fs",
    "approx": "third-quarter",
    "envelope": "third-quarter",
}

DEFAULT_SCHEDULES = {
    "volume": [12, 24, 48, 96, 192, 384, 768, 960],
    "bergman": [25, 50, 100, 200],
    "energy": [25, 50, 100, 200],
    "approx": [25, 50, 100, 200, 400],
    "envelope": [1],
}

# committed fallbacks matching configs/*.json (single source for no-config runs)
DEFAULT_TOLERANCES = {
    ("bergman", "vtheta-fs"): {"trend_slack": 1.1, "final_threshold": 0.006, "leak_tol": 1e-6},
    ("bergman", "third-quarter-fs"): {"trend_slack": 1.1, "final_threshold": 0.025, "leak_tol": 1e-6},
    ("bergman", "annulus-area"): {"trend_slack": 1.1, "final_threshold": 0.30, "leak_tol": 1e-6},
    ("energy", "bump-fs"): {"gap_slack": 1.0, "fd_rel": 1e-3},
}


def _build_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        if cfg.experiment != args.command:
            raise SystemExit(
                f"config is for experiment {cfg.experiment!r}, not {args.command!r}"
            )
    else:
        fixture = args.fixture or DEFAULT_FIXTURES[args.command]
        cfg = ExperimentConfig(
            experiment=args.command,
            fixture=fixture,
            k=DEFAULT_SCHEDULES[args.command],
            tolerances=DEFAULT_TOLERANCES.get((args.command, fixture), {}),
        )
    if args.fixture:
        cfg.fixture = args.fixture
    if args.k:
        cfg.k = sorted(int(x) for x in args.k.split(","))
    if args.out:
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="envlab",
        description="envelope / Bergman / energy laboratory on radial and toric models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("volume", "bergman", "energy", "approx", "envelope"):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--fixture", help="fixture id override")
        p.add_argument("--k", help="comma-separated k schedule override")
        p.add_argument("--out", help="output directory (default: config's)")
    p = sub.add_parser("selftest", help="run the built-in invariant battery")
    p.add_argument("--check-profile", help="validate a serialized profile JSON")
    p.add_argument("--tol-scale", type=float, default=1.0,
                   help="scale all tolerances (0 demands exactness)")
    args = parser.parse_args(argv)

    if args.command == "selftest":
        status, failures = run_selftest(args.tol_scale, args.check_profile)
        if failures:
            print(json.dumps({"status": "fail", "failures": failures}, indent=2))
        else:
            print(json.dumps({"status": "ok", "checks": "all passed"}))
        return status

    cfg = _build_config(args)
    rows, failures = run_experiment(cfg)
    print(CSV_HEADER)
    for row in rows:
        print(row.line())
    if failures:
        print("FAILURES:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
