"""Command line interface: solve, oracle, bench, and serve subcommands.

Exit codes: 0 solved (optimal or within the requested gap), 1 usage, parse or
validation failure, 2 infeasible pins, 3 instance too large for the oracle,
4 stopped on the time limit without an optimality proof.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import logging
import os
import sys

from . import __version__, generator, model, oracle
from .formulation import InfeasiblePinError, build, preprocess, write_lp
from .model import STATUS_GAP_REACHED, STATUS_OPTIMAL, STATUS_TIME_LIMIT
from .service import serve_forever
from .solver import SolveOptions, solve

log = logging.getLogger("duiopt")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_TOO_LARGE = 3
EXIT_TIME_LIMIT = 4


def _write_output(text: str, target: str) -> None:
    if target == "-":
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str) -> model.ProblemInstance:
    instance = model.load_scenario(path)
    problems = model.validate(instance)
    if problems:
        raise model.ScenarioError("; ".join(problems))
    return instance


def _solve_options(args: argparse.Namespace) -> SolveOptions:
    return SolveOptions(
        gap_tolerance=args.gap,
        time_limit_millis=args.time_limit_ms,
        node_log=(lambda line: print(line, file=sys.stderr)) if args.log_nodes else None,
    )


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _load(args.scenario)
    try:
        milp = build(instance, preprocess(instance))
    except InfeasiblePinError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    if args.lp_dump:
        _write_output(write_lp(milp), args.lp_dump)
    solution = solve(milp, _solve_options(args))
    _write_output(
        json.dumps(model.solution_to_dict(instance, solution), indent=2) + "\n",
        args.output)
    if solution.status in (STATUS_OPTIMAL, STATUS_GAP_REACHED):
        return EXIT_OK
    if solution.status == STATUS_TIME_LIMIT:
        return EXIT_TIME_LIMIT
    return EXIT_INFEASIBLE


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = _load(args.scenario)
    try:
        result = oracle.enumerate_assignments(instance)
    except oracle.InstanceTooLarge as exc:
        log.error("%s", exc)
        return EXIT_TOO_LARGE
    body = {
        "best_objective": result.best_objective,
        "enumerated": result.enumerated,
        "elements": [e.id for e in instance.elements],
        "devices": [d.id for d in instance.devices],
        "best_assignments": [
            [list(row) for row in matrix] for matrix in result.best_assignments
        ],
    }
    _write_output(json.dumps(body, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        points = tuple(int(p) for p in args.points.split(","))
    except ValueError:
        log.error("--points must be comma-separated integers, got %r", args.points)
        return EXIT_USAGE
    spec = generator.SweepSpec(
        axis=args.axis,
        points=points,
        seeds=args.seeds,
        fixed_elements=args.elements,
        fixed_devices=args.devices,
        fixed_users=args.users,
        options=SolveOptions(gap_tolerance=args.gap,
                             time_limit_millis=args.time_limit_ms),
    )
    rows = generator.run_sweep(spec)
    if args.output == "-":
        generator.write_csv(rows, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            generator.write_csv(rows, fh)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    instance = _load(args.scenario)
    options = SolveOptions(gap_tolerance=args.gap,
                           time_limit_millis=args.time_limit_ms)
    ui_dir = args.ui_dir if args.ui_dir and os.path.isdir(args.ui_dir) else None
    if args.ui_dir and not ui_dir:
        log.warning("ui directory %s not found; serving the API only", args.ui_dir)
    try:
        asyncio.run(serve_forever(
            instance,
            host=args.host,
            port=args.port,
            stream_port=args.stream_port,
            ui_dir=ui_dir,
            options=options,
            debounce=args.debounce_ms / 1000.0,
        ))
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duiopt",
        description="Assign UI elements to devices for multi-user sessions.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config", metavar="PATH",
        help="JSON file with default values for any flag; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--gap", type=float, default=0.0,
                       help="relative optimality gap to stop at (default: prove optimality)")
        p.add_argument("--time-limit-ms", type=int, default=None,
                       help="wall clock budget for the search")

    p_solve = sub.add_parser("solve", help="solve one scenario file")
    p_solve.add_argument("scenario")
    add_solver_flags(p_solve)
    p_solve.add_argument("--output", default="-",
                         help="where to write the solution JSON ('-' = stdout)")
    p_solve.add_argument("--lp-dump", metavar="PATH",
                         help="also write the model in LP text format")
    p_solve.add_argument("--log-nodes", action="store_true",
                         help="log incumbent updates to stderr")
    p_solve.set_defaults(func=cmd_solve)

    p_oracle = sub.add_parser(
        "oracle", help="exhaustively enumerate a small scenario")
    p_oracle.add_argument("scenario")
    p_oracle.add_argument("--output", default="-")
    p_oracle.set_defaults(func=cmd_oracle)

    p_bench = sub.add_parser("bench", help="run a sweep and write CSV rows")
    p_bench.add_argument("--axis", choices=generator.SWEEP_AXES, required=True)
    p_bench.add_argument("--points", required=True,
                         help="comma-separated axis values, e.g. 10,20,30")
    p_bench.add_argument("--seeds", type=int, default=3)
    p_bench.add_argument("--elements", type=int, default=20)
    p_bench.add_argument("--devices", type=int, default=20)
    p_bench.add_argument("--users", type=int, default=10)
    add_solver_flags(p_bench)
    p_bench.set_defaults(gap=0.05, time_limit_ms=60_000)
    p_bench.add_argument("--output", default="-",
                         help="CSV path ('-' = stdout)")
    p_bench.set_defaults(func=cmd_bench)

    p_serve = sub.add_parser("serve", help="serve a live session")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("DUIOPT_PORT", "8765")),
                         help="websocket/HTTP port (env DUIOPT_PORT overrides the default)")
    p_serve.add_argument("--stream-port", type=int, default=None,
                         help="also listen for newline-delimited JSON on this TCP port")
    p_serve.add_argument("--ui-dir", help="static UI bundle to serve at /")
    p_serve.add_argument("--debounce-ms", type=int, default=50)
    add_solver_flags(p_serve)
    p_serve.set_defaults(gap=0.01, time_limit_ms=10_000)
    p_serve.set_defaults(func=cmd_serve)
    parser.subcommand_parsers = [p_solve, p_oracle, p_bench, p_serve]  # type: ignore[attr-defined]
    return parser


def main(argv: list[str] | None = None) -> int:
    # force=True rebinds the handler to the stderr of this invocation
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.INFO, force=True)
    parser = build_parser()
    try:
        # first pass only to find --config, then re-parse with its defaults
        probe, _ = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(probe, "config", None):
        try:
            with open(probe.config, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            log.error("cannot read config %s: %s", probe.config, exc)
            return EXIT_USAGE
        if not isinstance(defaults, dict):
            log.error("config must be a JSON object of flag defaults")
            return EXIT_USAGE
        cleaned = {k.replace("-", "_"): v for k, v in defaults.items()}
        parser.set_defaults(**cleaned)
        for sub in parser.subcommand_parsers:  # type: ignore[attr-defined]
            sub.set_defaults(**cleaned)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except model.ScenarioError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
