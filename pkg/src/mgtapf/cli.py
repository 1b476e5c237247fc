"""Command-line interface: ``mgtapf {solve,validate,gen,bench,oracle}``.

Exit codes: 0 solved / valid, 1 infeasible / invalid, 2 timeout, 3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bench import SweepError, load_map, load_sweep, run_benchmark, write_csv
from .formats import FormatError, format_solution, parse_scenario, parse_solution, write_scenario
from .highlevel import ALGORITHMS, INFEASIBLE, SOLVED, SolverConfig, solve
from .instances import GenerationError, generate_instance
from .model import validate_solution
from .oracle import OracleLimitError, oracle_solve

EXIT_OK, EXIT_FAIL, EXIT_TIMEOUT, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _ratio(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio {text!r}") from None
    if not value >= 1:
        raise argparse.ArgumentTypeError("omega must be ≥ 1")
    return value


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be ≥ 0")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mgtapf", description="Multi-goal task assignment and path finding.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a scenario")
    s.add_argument("--map", required=True, help="map file or built-in name")
    s.add_argument("--scen", required=True)
    s.add_argument("--algo", choices=sorted(ALGORITHMS), default="cbs-ta")
    s.add_argument("--heuristic", choices=["none", "cg", "dg", "wdg"], default=None,
                   help="default: wdg for cbsh-ta, none otherwise")
    s.add_argument("--omega", type=_ratio, default=1.0)
    s.add_argument("--time-limit", type=_positive_float, default=60.0)
    s.add_argument("--horizon", type=_nonneg_int, default=None)
    s.add_argument("--out", help="solution file (default: stdout)")
    s.add_argument("--stats", help="write solver statistics as JSON")

    v = sub.add_parser("validate", help="check a solution file")
    v.add_argument("--map", required=True)
    v.add_argument("--scen", required=True)
    v.add_argument("--solution", required=True)

    g = sub.add_parser("gen", help="generate a random scenario")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--map", required=True)
    g.add_argument("--agents", type=int, required=True)
    g.add_argument("--kmin", type=int, default=2)
    g.add_argument("--kmax", type=int, default=2)
    g.add_argument("--out", help="scenario file (default: stdout)")

    b = sub.add_parser("bench", help="run a benchmark sweep")
    b.add_argument("--sweep", required=True, help="JSON sweep file")
    b.add_argument("--out", help="CSV file (default: stdout)")
    b.add_argument("--workers", type=int, default=1)

    o = sub.add_parser("oracle", help="brute-force optimal solve of a tiny scenario")
    o.add_argument("--map", required=True)
    o.add_argument("--scen", required=True)
    o.add_argument("--horizon", type=_nonneg_int, default=None)
    o.add_argument("--out")
    return p


def _read(path):
    with open(path) as fh:
        return fh.read()


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_instance(args):
    grid = load_map(args.map)
    return parse_scenario(_read(args.scen), grid)


def cmd_solve(args) -> int:
    inst = _load_instance(args)
    heuristic = args.heuristic or ("wdg" if args.algo == "cbsh-ta" else "none")
    cfg = SolverConfig.for_algorithm(args.algo, heuristic, omega=args.omega,
                                     time_limit=args.time_limit, horizon=args.horizon)
    res = solve(inst, cfg)
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump({"status": res.status, **res.stats.as_dict()}, fh, indent=2)
    if res.status == SOLVED:
        _emit(format_solution(res.plan), args.out)
        return EXIT_OK
    print(res.status, file=sys.stderr)
    return EXIT_FAIL if res.status == INFEASIBLE else EXIT_TIMEOUT


def cmd_validate(args) -> int:
    inst = _load_instance(args)
    try:
        plan = parse_solution(_read(args.solution))
    except FormatError as e:
        print(f"malformed plan: {e}")
        return EXIT_FAIL
    report = validate_solution(inst, plan)
    print(report)
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_gen(args) -> int:
    grid = load_map(args.map)
    inst = generate_instance(args.seed, grid, args.agents, args.kmin, args.kmax)
    _emit(write_scenario(inst), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = run_benchmark(load_sweep(args.sweep), workers=max(1, args.workers))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load_instance(args)
    plan = oracle_solve(inst, horizon=args.horizon)
    if plan is None:
        print(INFEASIBLE, file=sys.stderr)
        return EXIT_FAIL
    _emit(format_solution(plan), args.out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "validate": cmd_validate, "gen": cmd_gen,
            "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (OSError, KeyError, FormatError, GenerationError, SweepError, OracleLimitError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
