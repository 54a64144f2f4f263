"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 usage/input error,
3 planning infeasible.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .bench import BenchConfig, run_benchmark
from .bnb import BudgetExhausted, Infeasible
from .grid import PRESETS, GridError, GridMap, Instance, TooManyRobots, generate_instance
from .ipmodel import (
    InfeasibleAssignment, build_model, decode_solution, evaluate, export_lp, read_assignment,
)
from .paths import dump_warmstart
from .pipeline import dumps, load_plan, plan_instance, solution_dict
from .projection import project_paths
from .render import render_svg
from .topo import prepare
from .validate import optimality_ratio, plan_problems, validate_plan

EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

log = logging.getLogger("owip")


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from None


def _grid(args) -> GridMap:
    name = getattr(args, "grid", None) or getattr(args, "map", None)
    if name is None:
        raise UsageError("need --map or --grid")
    if name in PRESETS:
        return PRESETS[name]()
    return GridMap.from_dict(_read_json(name))


def _instance(args) -> Instance:
    if getattr(args, "instance", None):
        return Instance.from_dict(_read_json(args.instance))
    grid = _grid(args)
    if args.robots is None:
        raise UsageError("need --instance, or --map with --robots")
    return generate_instance(grid, int(args.robots), args.seed)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, data: dict, lines: List[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=2))
    else:
        print("\n".join(lines))


def cmd_generate(args) -> int:
    _emit(args, _instance(args).dumps())
    return 0


def cmd_plan(args) -> int:
    inst = _instance(args)
    res = plan_instance(
        inst, args.objective, args.congestion, args.budget_seconds, warmstart=not args.no_warmstart
    )
    sol = res.solution
    ratio = optimality_ratio(res.plan, inst, args.objective)
    report = sol.report()
    report["ratio"] = float(ratio)
    report["warmstart_objective"] = res.warm.paths.objective(res.topo, args.objective)
    if args.out:
        data = solution_dict(inst, res.topo, res.plan, sol.directions, sol.objective, report)
        Path(args.out).write_text(dumps(data))
    if args.runs:
        rep = validate_plan(res.plan, args.runs, args.seed)
        report["validation"] = rep.to_dict()
    _report(args, report, [f"{k}: {v}" for k, v in report.items() if k != "validation"])
    return 0


def cmd_warmstart(args) -> int:
    inst = _instance(args)
    res = plan_instance(inst, args.objective, heuristic_only=True)
    text = dump_warmstart(res.topo, res.warm.paths, res.warm.dmap.directions)
    if args.solution_out:
        obj = res.warm.paths.objective(res.topo, args.objective)
        meta = {"method": "heuristic", "repair": res.warm.dmap.repaired or "none"}
        data = solution_dict(inst, res.topo, res.plan, res.warm.dmap.directions, obj, meta)
        Path(args.solution_out).write_text(dumps(data))
    _emit(args, text)
    return 0


def cmd_export_lp(args) -> int:
    inst = _instance(args)
    topo, mapped = prepare(inst)
    _emit(args, export_lp(build_model(topo, mapped, args.objective, args.congestion)))
    return 0


def cmd_import_solution(args) -> int:
    inst = _instance(args)
    topo, mapped = prepare(inst)
    model = build_model(topo, mapped, args.objective, args.congestion)
    values = read_assignment(Path(args.assignment).read_text())
    bad = evaluate(model, values)
    if bad:
        data = {"feasible": False, "violations": [[v.name, v.detail] for v in bad]}
        _report(args, data, [f"infeasible: {v.name} {v.detail}" for v in bad])
        return EXIT_VIOLATION
    paths = decode_solution(model, values)
    dirs = paths.directions(topo)
    plan = project_paths(paths, topo, inst, dirs)
    obj = model.objective_value(values)
    data = solution_dict(inst, topo, plan, dirs, obj, {"method": "imported"})
    if args.out:
        Path(args.out).write_text(dumps(data))
    _report(args, {"feasible": True, "objective": obj}, [f"feasible, objective {obj:g}"])
    return 0


def cmd_validate(args) -> int:
    inst = _instance(args)
    plan = load_plan(_read_json(args.solution), inst.grid)
    problems = plan_problems(plan, inst)
    if problems:
        _report(args, {"ok": False, "problems": problems}, [f"malformed: {p}" for p in problems])
        return EXIT_VIOLATION
    rep = validate_plan(plan, args.runs, args.seed)
    data = rep.to_dict()
    data["ratio"] = float(optimality_ratio(plan, inst, args.objective))
    sim = data["simulation"] or {}
    _report(args, data, [
        f"static one-way audit: {'ok' if rep.static_oneway_ok else 'FAILED'}"
        + ("" if rep.static_oneway_ok else f" ({len(rep.violations)} edges)"),
        f"simulation: {sim.get('runs', 0)} runs, {sim.get('collisions', 0)} collisions",
        f"ratio: {data['ratio']:.4f}",
    ])
    return 0 if rep.ok else EXIT_VIOLATION


def _robot_range(text: str, step: int) -> List[int]:
    if ".." in text:
        lo, hi = (int(x) for x in text.split(".."))
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",")]


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        grid=_grid(args), robots=_robot_range(args.robots, args.step), reps=args.reps,
        objective=args.objective, budget=args.budget_seconds or 60.0, seed=args.seed,
        sim_runs=args.sim_runs, oracle=args.oracle,
    )
    res = run_benchmark(cfg)
    if args.out:
        Path(args.out + ".csv").write_text(res.to_csv())
        Path(args.out + ".json").write_text(res.to_json())
    if args.json:
        print(res.to_json(), end="")
    else:
        print(res.to_csv(), end="")
        for m in res.means():
            print(f"# n={m['n']} {m['method']}: mean ratio {m['mean_ratio']:.4f}, "
                  f"mean runtime {m['mean_runtime_ms']:.1f} ms")
    return 0 if all(not r.error for r in res.rows) else EXIT_VIOLATION


def cmd_render(args) -> int:
    inst = _instance(args) if (args.instance or args.robots is not None) else None
    grid = inst.grid if inst else _grid(args)
    plan = dirs = topo = None
    if inst is not None:
        topo, _ = prepare(inst)
    if args.solution:
        data = _read_json(args.solution)
        plan = load_plan(data, grid)
        dirs = {d["passage"]: {"AtoB": 1, "BtoA": -1}.get(d["direction"], 0)
                for d in data.get("passage_directions", [])}
        if topo is None:
            from .topo import extract_topo

            topo = extract_topo(grid)
    _emit(args, render_svg(grid, plan, dirs, topo))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", help="grid JSON file (h, w, hRows, vCols) or preset name")
    common.add_argument("--grid", choices=sorted(PRESETS), help="preset grid")
    common.add_argument("--instance", help="instance JSON file")
    common.add_argument("--robots", help="robot count (bench: range like 10..50)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--objective", choices=("total", "max"), default="total")
    common.add_argument("--congestion", action="store_true")
    common.add_argument("--budget-seconds", type=float, default=None)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", help="output file (bench: path prefix)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="owip", description="One-way multi-robot path planning")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="random instance").set_defaults(fn=cmd_generate)

    sp = sub.add_parser("plan", parents=[common], help="solve an instance exactly")
    sp.add_argument("--no-warmstart", action="store_true")
    sp.add_argument("--runs", type=int, default=0, help="simulation runs for validation")
    sp.set_defaults(fn=cmd_plan)

    sp = sub.add_parser("warmstart", parents=[common], help="heuristic warm start only")
    sp.add_argument("--solution-out", help="also write the projected heuristic plan")
    sp.set_defaults(fn=cmd_warmstart)

    sub.add_parser("export-lp", parents=[common], help="write the IP in LP format").set_defaults(
        fn=cmd_export_lp
    )

    sp = sub.add_parser("import-solution", parents=[common], help="check and project a solver assignment")
    sp.add_argument("--assignment", required=True, help="'name value' lines")
    sp.set_defaults(fn=cmd_import_solution)

    sp = sub.add_parser("validate", parents=[common], help="audit and simulate a solution file")
    sp.add_argument("--solution", required=True)
    sp.add_argument("--runs", type=int, default=100)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("bench", parents=[common], help="benchmark table")
    sp.add_argument("--step", type=int, default=10)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--sim-runs", type=int, default=20)
    sp.add_argument("--oracle", action="store_true", help="add brute-force rows on small maps")
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("render", parents=[common], help="SVG of map, paths and directions")
    sp.add_argument("--solution")
    sp.set_defaults(fn=cmd_render)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.fn(args)
    except (UsageError, GridError, TooManyRobots, ValueError) as e:
        if isinstance(e, InfeasibleAssignment):
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VIOLATION
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (Infeasible, BudgetExhausted) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
