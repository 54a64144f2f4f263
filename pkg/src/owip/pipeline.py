"""End-to-end planning: extract, warm start, solve, project."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Optional

from .bnb import Solution, solve
from .grid import GridMap, Instance
from .heuristic import WarmStart, heuristic_warmstart
from .paths import TOTAL
from .projection import ProjectedPlan, project_paths
from .search import OpCounter
from .topo import MappedInstance, TopoMap, prepare


@dataclass
class PlanResult:
    instance: Instance
    topo: TopoMap
    mapped: MappedInstance
    warm: WarmStart
    warm_time: float
    solution: Optional[Solution]
    plan: ProjectedPlan
    warm_plan: ProjectedPlan


def plan_instance(
    inst: Instance,
    objective: str = TOTAL,
    congestion: bool = False,
    budget: Optional[float] = None,
    warmstart: bool = True,
    heuristic_only: bool = False,
) -> PlanResult:
    topo, mapped = prepare(inst)
    t0 = time.perf_counter()
    warm = heuristic_warmstart(topo, mapped, counter=OpCounter())
    warm_time = time.perf_counter() - t0
    warm_plan = project_paths(warm.paths, topo, inst, warm.dmap.directions)
    if heuristic_only:
        return PlanResult(inst, topo, mapped, warm, warm_time, None, warm_plan, warm_plan)
    sol = solve(
        topo, mapped, objective, incumbent=warm.paths if warmstart else None,
        budget=budget, congestion=congestion,
    )
    plan = project_paths(sol.paths, topo, inst, sol.directions)
    return PlanResult(inst, topo, mapped, warm, warm_time, sol, plan, warm_plan)


def solution_dict(inst: Instance, topo: TopoMap, plan: ProjectedPlan, directions, objective, meta) -> dict:
    dirs = []
    for pid in sorted(topo.passages):
        p = topo.passages[pid]
        d = directions.get(pid, 0)
        dirs.append({
            "passage": pid,
            "ends": [list(p.ends[0]), list(p.ends[1])],
            "direction": "AtoB" if d == 1 else "BtoA" if d == -1 else "free",
        })
    return {
        "robots": [{"id": t.id, "cells": [list(c) for c in plan.paths[t.id]]} for t in inst.robots],
        "passage_directions": dirs,
        "objective": objective,
        "meta": meta,
    }


def load_plan(data: dict, grid: GridMap) -> ProjectedPlan:
    paths = {int(r["id"]): [tuple(c) for c in r["cells"]] for r in data["robots"]}
    crossings = frozenset((i, j) for i in grid.h_rows for j in grid.v_cols)
    return ProjectedPlan(paths, crossings)


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2) + "\n"
