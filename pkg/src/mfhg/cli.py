"""Command-line entry point: check, solve, dynamics, generate, suite.

Exit codes: 0 success / property holds, 1 property fails, 2 usage or input
error, 3 enumeration guard exceeded. Only JSON (or graph text) goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dynamics import SCHEDULERS, ScriptError, run_dynamics
from .experiments import (
    FAMILIES,
    InstanceError,
    InstanceSpec,
    generate,
    load_suite,
    run_suite,
)
from .game import PartitionError, read_partition
from .graph import GraphFormatError, format_graph, read_graph
from .solvers import (
    DEFAULT_CAP,
    ConstructionError,
    brute_force_optimum,
    greedy_core,
    optimal_basic_partition,
    strong_nash_from_optimum,
)
from .stability import DEFAULT_GUARD, GuardExceeded, check

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

ALGORITHMS = {
    "brute": lambda g, a: brute_force_optimum(g, a.cap),
    "optimal-basic": lambda g, a: optimal_basic_partition(g),
    "strong-nash": lambda g, a: strong_nash_from_optimum(g, guard_limit=a.guard_limit),
    "greedy-core": lambda g, a: greedy_core(g),
}


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def cmd_check(args) -> int:
    g = read_graph(args.graph)
    C = read_partition(args.partition)
    if C.n != g.n:
        raise PartitionError(f"partition has {C.n} agents, graph has {g.n}")
    res = check(g, C, args.kind, args.k, args.mode, args.guard_limit)
    out = {"kind": args.kind, "stable": res.stable, "witness": res.witness.to_json() if res.witness else None}
    if args.kind == "kstrong":
        out["k"] = g.n if args.k is None else args.k
        out["mode"] = args.mode
    _emit(out)
    return EXIT_OK if res.stable else EXIT_FAIL


def cmd_solve(args) -> int:
    g = read_graph(args.graph)
    report = ALGORITHMS[args.alg](g, args)
    out = report.to_json()
    out["algorithm"] = args.alg
    _emit(out)
    return EXIT_OK


def cmd_dynamics(args) -> int:
    g = read_graph(args.graph)
    C = read_partition(args.partition)
    script = None
    if args.script:
        with open(args.script, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            script = [(int(a), None if t is None else int(t)) for a, t in raw]
        except (TypeError, ValueError):
            raise PartitionError("script must be a JSON list of [agent, target-or-null] pairs") from None
    scheduler = args.scheduler
    if script is not None and scheduler != "scripted":
        scheduler = "scripted"
    trace = run_dynamics(g, C, scheduler, args.max_steps, script, args.seed)
    sys.stdout.write(trace.to_jsonl())
    return EXIT_OK


def _family(name: str) -> str:
    return name.replace("-", "_")


def cmd_generate(args) -> int:
    params = {}
    for key in ("n", "k", "eps", "M", "p", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.weights:
        params["weights"] = args.weights.split(",")
    g = generate(InstanceSpec(_family(args.family), params))
    sys.stdout.write(format_graph(g))
    return EXIT_OK


def cmd_suite(args) -> int:
    config = load_suite(args.config)
    report = run_suite(config, jobs=args.jobs, cap=args.cap, guard_limit=args.guard_limit)
    _emit(report)
    return EXIT_OK if report["summary"]["failed"] == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--guard-limit", type=int, default=argparse.SUPPRESS,
                        help=f"largest exhaustive search allowed (default {DEFAULT_GUARD})")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes for suite")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomised parts")
    common.add_argument("--cap", type=int, default=argparse.SUPPRESS,
                        help=f"largest n for partition enumeration (default {DEFAULT_CAP})")

    parser = argparse.ArgumentParser(prog="mfhg", parents=[common],
                                     description="Modified fractional hedonic games toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="test a partition for stability")
    p.add_argument("graph")
    p.add_argument("partition")
    p.add_argument("--kind", required=True, choices=["nash", "kstrong", "core", "strict-core"])
    p.add_argument("--k", type=int, default=None, help="coalition size bound for kstrong (default n)")
    p.add_argument("--mode", choices=["strict", "relaxed"], default="strict")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="run a constructive algorithm")
    p.add_argument("graph")
    p.add_argument("--alg", required=True, choices=sorted(ALGORITHMS))
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dynamics", parents=[common], help="run improving dynamics")
    p.add_argument("graph")
    p.add_argument("partition")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="first-improve")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--script", help="JSON list of [agent, target-or-null] for the scripted scheduler")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("generate", parents=[common], help="print a named instance family as a graph file")
    p.add_argument("family", choices=sorted(set(FAMILIES) | {f.replace("_", "-") for f in FAMILIES}))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--eps")
    p.add_argument("--M")
    p.add_argument("--p")
    p.add_argument("--weights", help="comma-separated rationals for random-er")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("suite", parents=[common], help="run an experiment suite")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("guard_limit", DEFAULT_GUARD), ("jobs", 1), ("seed", None), ("cap", DEFAULT_CAP)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (GraphFormatError, PartitionError, InstanceError, ScriptError, ValueError, IndexError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
