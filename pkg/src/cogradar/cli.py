"""Command-line interface: ``cogradar {run,mc,compare,validate,selftest}``.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import selftest
from .core import ContractError
from .export import report_to_csv, report_to_json
from .harness import ALLOCATORS, AllocationInfeasible, Report, compare, cumulative, monte_carlo, run_episode
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("cogradar")


def _emit(report: Report, args, tag: str) -> None:
    text = report_to_json(report) if args.format == "json" else report_to_csv(report)
    if args.out is None:
        sys.stdout.write(text)
        return
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.scenario}_{tag}.{args.format}"
    path.write_text(text)
    for alloc in report.allocators:
        totals = cumulative(report, alloc, "total_time")
        errs = cumulative(report, alloc, "threat_sq_err")
        print(f"{alloc:>5}: mean cumulative dwell {np.mean(list(totals.values())):.6g} s, "
              f"mean cumulative threat sq. error {np.mean(list(errs.values())):.6g}")
    print(f"wrote {path}")


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    seed = scenario.seed if args.seed is None else args.seed
    rows = run_episode(scenario, args.allocator, trial=0, seed=seed)
    report = Report(scenario.name, seed, 1, (args.allocator,), len(scenario.radars), rows)
    _emit(report, args, f"run_{args.allocator}")
    return EXIT_OK


def _cmd_mc(args) -> int:
    scenario = load_scenario(args.scenario)
    report = monte_carlo(scenario, args.allocator, args.trials, args.seed, args.workers)
    _emit(report, args, f"mc_{args.allocator}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    report = compare(scenario, args.trials, args.seed, args.workers)
    _emit(report, args, "compare")
    return EXIT_OK


def _cmd_validate(args) -> int:
    status = EXIT_OK
    for path in args.scenario:
        try:
            sc = load_scenario(path)
        except ScenarioError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            status = EXIT_INVALID
            continue
        print(f"ok: {path} ({sc.name}, {len(sc.radars)} radars, {sc.frames} frames, "
              f"P = {sc.p_threshold:g} m^2)")
    return status


def _cmd_selftest(args) -> int:
    results = selftest.run(args.suite or None)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<24} {r.detail}  ({r.seconds:.2f} s)")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cogradar", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_args(p, trials: bool, allocator: bool):
        p.add_argument("--scenario", required=True,
                       help="scenario YAML file, or the name of a shipped scenario")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        if trials:
            p.add_argument("--trials", type=int, default=20)
            p.add_argument("--workers", type=int, default=1, help="worker processes")
        if allocator:
            p.add_argument("--allocator", choices=ALLOCATORS, default="socp")
        p.add_argument("--out", default=None, help="output directory (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("run", help="one episode with one allocator")
    sim_args(p, trials=False, allocator=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("mc", help="Monte Carlo trials with one allocator")
    sim_args(p, trials=True, allocator=True)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("compare", help="both allocators on common random numbers")
    sim_args(p, trials=True, allocator=False)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("validate", help="check scenario files")
    p.add_argument("--scenario", required=True, nargs="+")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("--suite", choices=sorted(selftest.SUITES), action="append")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ArithmeticError, AllocationInfeasible, np.linalg.LinAlgError) as exc:
        # LinAlgError derives from ValueError, so this clause must come first
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ScenarioError, ContractError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
