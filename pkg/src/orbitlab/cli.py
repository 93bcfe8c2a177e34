"""Command line entry point.

Subcommands::

    orbitlab list                                   enumerate suites/experiments
    orbitlab verify <suite> [--config PATH] [--seed N] [--coverage]
    orbitlab sweep <experiment> [--config PATH] [--out DIR] [--seed N]

Exit codes: 0 when everything passes, 1 when any check fails, 2 on
configuration errors (including unknown suite or experiment names).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, UnknownSuiteError, load_config
from .suites import COVERAGE, SUITE_NAMES, coverage_table, run_suite
from .sweeps import EXPERIMENT_NAMES, sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitlab",
        description="desk-scale laboratory for circle diffeomorphism groups, "
                    "phase-space actions, and semiclassical kernel families",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="enumerate suites and experiments")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", help=f"one of {', '.join(SUITE_NAMES)} or 'all'")
    p_verify.add_argument("--config", default=None, help="INI config path")
    p_verify.add_argument("--seed", type=int, default=None,
                          help="override the configured seed")
    p_verify.add_argument("--coverage", action="store_true",
                          help="print the identity-to-check coverage ledger")

    p_sweep = sub.add_parser("sweep", help="run a convergence experiment")
    p_sweep.add_argument("experiment",
                         help=f"one of {', '.join(EXPERIMENT_NAMES)}")
    p_sweep.add_argument("--config", default=None, help="INI config path")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="override the configured seed")
    return parser


def _cmd_list() -> int:
    print("suites:")
    for name in SUITE_NAMES + ("all",):
        anchors = sorted(a for a, owner in COVERAGE.items()
                         if owner.startswith(name + "."))
        print(f"  {name}")
        for anchor in anchors:
            print(f"    - {anchor} -> {COVERAGE[anchor]}")
    print("experiments:")
    for name in EXPERIMENT_NAMES:
        print(f"  {name}")
    return 0


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    results = run_suite(args.suite, cfg)
    for result in results:
        for line in result.lines():
            print(line)
    if args.coverage:
        print("coverage ledger (identity anchor -> owning check):")
        for anchor, owner in coverage_table():
            print(f"  {anchor},{owner}")
    return 0 if all(r.passed for r in results) else 1


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report, csv_path, fig_path = sweep(args.experiment, cfg, args.out)
    print(f"experiment {report.label}: slope={report.fitted_slope:.6g} "
          f"extrapolated=({report.extrapolated_limit.real:.12g},"
          f"{report.extrapolated_limit.imag:.12g}) "
          f"target=({report.target.real:.12g},{report.target.imag:.12g})")
    print(f"wrote {csv_path}")
    print(f"wrote {fig_path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_sweep(args)
    except (ConfigError, UnknownSuiteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
