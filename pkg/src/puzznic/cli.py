"""Command line: solve, encode, check, show, export, bench.

Exit codes form a stable contract: 0 success, 1 parse/validation errors,
2 proved unsolvable within the bound (solve) or plan rejected (check),
3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

from puzznic import encoder, engine, levels, pddl, planner
from puzznic.backends import ENV_BACKEND, BackendFailure, default_backend
from puzznic.engine import QuiescentState
from puzznic.levels import LevelError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2
EXIT_BUDGET = 3

PLANNER_METHODS = ("bfs", "astar", "iddfs")
SAT_METHODS = ("sat-fixed", "sat-varmoves")
ALL_METHODS = PLANNER_METHODS + SAT_METHODS

_BUNDLED = pathlib.Path(__file__).parent / "levels"


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def cmd_solve(args) -> int:
    try:
        lf = levels.load_level(args.level, pre_resolve=args.pre_resolve)
    except (LevelError, OSError) as exc:
        return _fail(str(exc))
    result = planner.solve(
        QuiescentState(lf.grid),
        max_moves=args.max_moves,
        algo=args.algo,
        time_limit=args.time_limit,
    )
    print(result.stats.as_text(), file=sys.stderr)
    if isinstance(result.outcome, planner.Solved):
        sys.stdout.write(levels.emit_plan(result.outcome.plan.moves))
        return EXIT_OK
    if isinstance(result.outcome, planner.ProvedUnsolvable):
        sys.stderr.write(planner.prove_unsolvable_report(result))
        return EXIT_UNSOLVABLE
    print("budget exhausted before a verdict", file=sys.stderr)
    return EXIT_BUDGET


def cmd_encode(args) -> int:
    try:
        lf = levels.load_level(args.level)
        if args.mode == "fixed":
            instance = encoder.encode_fixed(lf.grid, args.horizon)
        else:
            instance = encoder.encode_varmoves(lf.grid, args.horizon)
    except (LevelError, encoder.EncoderError, OSError) as exc:
        return _fail(str(exc))
    text = instance.to_dimacs()
    if args.output:
        pathlib.Path(args.output).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    print(
        f"variables={instance.num_vars} clauses={len(instance.clauses)}",
        file=sys.stderr,
    )
    return EXIT_OK


def _replay(level_path, plan_path):
    lf = levels.load_level(level_path)
    plan = levels.parse_plan(pathlib.Path(plan_path).read_text(encoding="utf-8"))
    state = QuiescentState(lf.grid)
    events = []
    for index, move in enumerate(plan, start=1):
        try:
            state, trace, _ = engine.apply_move(state, move)
        except engine.IllegalMove as exc:
            return lf, state, events, index, str(exc)
        events.extend(trace.events)
    return lf, state, events, None, None


def cmd_check(args) -> int:
    try:
        lf, state, events, bad_step, why = _replay(args.level, args.plan)
    except (LevelError, OSError) as exc:
        return _fail(str(exc))
    if bad_step is not None:
        print(f"illegal move at step {bad_step}: {why}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    if not engine.is_goal(state.grid):
        print("plan is legal but the final state is not cleared", file=sys.stderr)
        return EXIT_UNSOLVABLE
    print("plan ok", file=sys.stderr)
    return EXIT_OK


def cmd_show(args) -> int:
    try:
        lf, state, events, bad_step, why = _replay(args.level, args.plan)
    except (LevelError, OSError) as exc:
        return _fail(str(exc))
    trace = engine.Trace(initial=lf.grid, events=tuple(events))
    sys.stdout.write(levels.render_trace(trace, lf.symbol_table))
    if bad_step is not None:
        print(f"illegal move at step {bad_step}: {why}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        lf = levels.load_level(args.level)
        problem = pddl.export_pddl_problem(lf.grid, lf.name or "level", lf.symbol_table)
    except (LevelError, encoder.LevelInvalid, OSError) as exc:
        return _fail(str(exc))
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    domain_path = out_dir / "domain.pddl"
    problem_path = out_dir / f"{lf.name or 'level'}.pddl"
    domain_path.write_text(pddl.export_pddl_domain(), encoding="ascii")
    problem_path.write_text(problem, encoding="ascii")
    print(f"wrote {domain_path} and {problem_path}", file=sys.stderr)
    return EXIT_OK


def _bench_row(level_path: pathlib.Path, method: str, timeout: float, max_moves: int):
    name = level_path.stem
    try:
        lf = levels.load_level(level_path)
    except (LevelError, OSError) as exc:
        print(f"skipping {name}: {exc}", file=sys.stderr)
        return (name, method, "E", "-", "-", "0.00")
    start = time.monotonic()
    try:
        if method in PLANNER_METHODS:
            result = planner.solve(
                QuiescentState(lf.grid),
                max_moves=max_moves,
                algo=method,
                time_limit=timeout,
            )
            measure = "moves"
            cost = (
                result.outcome.plan.cost
                if isinstance(result.outcome, planner.Solved)
                else "-"
            )
        else:
            mode = "fixed" if method == "sat-fixed" else "varmoves"
            bound = max_moves
            if mode == "fixed":
                bound = max_moves + encoder.max_match_steps(lf.grid)
            result = encoder.solve_iterative(
                lf.grid,
                mode=mode,
                bound=bound,
                backend=default_backend(),
                time_limit=timeout,
            )
            if mode == "fixed":
                measure = "steps"
                if isinstance(result.outcome, planner.Solved):
                    trace = result.outcome.trace
                    cost = trace.move_count + trace.match_count
                else:
                    cost = "-"
            else:
                measure = "moves"
                cost = (
                    result.outcome.plan.cost
                    if isinstance(result.outcome, planner.Solved)
                    else "-"
                )
    except MemoryError:
        return (name, method, "M", "-", "-", f"{time.monotonic() - start:.2f}")
    except BackendFailure as exc:
        print(f"{name}/{method}: {exc}", file=sys.stderr)
        return (name, method, "E", "-", "-", f"{time.monotonic() - start:.2f}")
    elapsed = f"{result.stats.elapsed:.2f}"
    if isinstance(result.outcome, planner.Solved):
        return (name, method, "Y", str(cost), measure, elapsed)
    if isinstance(result.outcome, planner.ProvedUnsolvable):
        return (name, method, "U", "-", measure, elapsed)
    return (name, method, "N", "-", measure, elapsed)


def cmd_bench(args) -> int:
    corpus_dir = pathlib.Path(args.corpus) if args.corpus else _BUNDLED
    paths = sorted(corpus_dir.glob("*.txt"))
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ALL_METHODS:
            return _fail(f"unknown method {m!r} (choose from {', '.join(ALL_METHODS)})")
    jobs = [(path, method) for path in paths for method in methods]
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(
                pool.map(
                    _bench_row_star,
                    [(p, m, args.timeout, args.max_moves) for p, m in jobs],
                )
            )
    else:
        rows = [_bench_row(p, m, args.timeout, args.max_moves) for p, m in jobs]
    rows.sort(key=lambda row: (row[0], row[1]))
    header = ("instance", "method", "outcome", "cost", "measure", "seconds")
    print("\t".join(header))
    for row in rows:
        print("\t".join(row))
    widths = [
        max(len(str(row[i])) for row in [header, *rows]) for i in range(len(header))
    ]
    for row in [header, *rows]:
        print(
            "  ".join(str(col).ljust(w) for col, w in zip(row, widths)),
            file=sys.stderr,
        )
    return EXIT_OK


def _bench_row_star(packed):
    return _bench_row(*packed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puzznic",
        description="Solve, encode, validate, and export static-grid Puzznic levels.",
        epilog=f"Set {ENV_BACKEND} to route CNF solving to an external DIMACS solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a minimum-move plan")
    p.add_argument("level")
    p.add_argument("--algo", choices=PLANNER_METHODS, default="astar")
    p.add_argument("--max-moves", type=int, default=planner.DEFAULT_MAX_MOVES)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument(
        "--pre-resolve",
        action="store_true",
        help="resolve a non-quiescent level to quiescence before solving",
    )
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("encode", help="emit a DIMACS CNF for a level")
    p.add_argument("level")
    p.add_argument("--mode", choices=("fixed", "varmoves"), default="fixed")
    p.add_argument(
        "--horizon",
        type=int,
        required=True,
        help="exact step count (fixed) or move budget (varmoves)",
    )
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("check", help="validate a plan file against a level")
    p.add_argument("level")
    p.add_argument("plan")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("show", help="render a plan's full playback")
    p.add_argument("level")
    p.add_argument("plan")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("export", help="write PDDL domain and problem files")
    p.add_argument("level")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", help="run solver methods over a level corpus")
    p.add_argument(
        "corpus",
        nargs="?",
        default=None,
        help="directory of .txt levels (default: bundled corpus)",
    )
    p.add_argument("--methods", default=",".join(ALL_METHODS))
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-moves", type=int, default=planner.DEFAULT_MAX_MOVES)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
