"""Exact solver: branch and bound over passage directions.

Once every passage has a fixed direction the robots no longer interact, so
each one simply takes its cheapest directed path. Leaving a passage free
only enlarges every robot's arc set, which makes the aggregate of the
relaxed shortest paths a valid lower bound. Whenever the relaxed paths use
some free passage in both directions we branch on it.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Mapping, Optional, Tuple

from .paths import TOTAL, TopoPathSet, aggregate, congestion as congestion_of
from .search import Unreachable, shortest_path
from .topo import MappedInstance, TopoMap

MAX_BRUTE_FORCE_PASSAGES = 16


class Direction(IntEnum):
    FREE = 0
    A_TO_B = 1
    B_TO_A = -1


class Infeasible(Exception):
    pass


class BudgetExhausted(Exception):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DirectionAssignment:
    """Per-passage state; passages not listed are free."""

    states: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "DirectionAssignment":
        return cls(tuple(sorted((p, int(d)) for p, d in mapping.items() if d)))

    def as_dict(self) -> Dict[int, int]:
        return dict(self.states)

    def state(self, pid: int) -> Direction:
        return Direction(self.as_dict().get(pid, 0))

    def directed_edges(self, topo: TopoMap) -> List[Tuple[int, int]]:
        d = self.as_dict()
        out = []
        for pid in sorted(topo.passages):
            p = topo.passages[pid]
            s = d.get(pid, 0)
            if s >= 0:
                out += p.arcs(1)
            if s <= 0:
                out += p.arcs(-1)
        return out


def directed_shortest_path(topo: TopoMap, assignment, source: int, target: int):
    """Cost and vertex list of the cheapest path under ``assignment``."""
    dirs = assignment.as_dict() if isinstance(assignment, DirectionAssignment) else dict(assignment or {})
    return shortest_path(topo, source, target, dirs)


@dataclass
class Solution:
    paths: TopoPathSet
    objective: int
    distance: int
    bound: int
    optimal: bool
    nodes: int
    wall_time: float
    directions: Dict[int, int] = field(default_factory=dict)
    objective_kind: str = TOTAL
    congestion: Optional[int] = None

    def report(self) -> dict:
        return {
            "objective": self.objective,
            "distance": self.distance,
            "objective_kind": self.objective_kind,
            "congestion": self.congestion,
            "bound": self.bound,
            "nodes": self.nodes,
            "time": round(self.wall_time, 6),
            "optimal": self.optimal,
        }


def _finish(topo, mapped, paths, costs, kind, bound, optimal, nodes, t0, fixed, with_congestion):
    full = {r.id: [r.start] for r in mapped.robots if r.stationary}
    full.update(paths)
    ps = TopoPathSet({rid: list(full[rid]) for rid in sorted(full)})
    dirs = dict(fixed)
    dirs.update(ps.directions(topo))
    dist = aggregate(list(costs.values()), kind)
    cong = congestion_of(topo, ps) if with_congestion else None
    return Solution(
        paths=ps,
        objective=dist + (cong or 0),
        distance=dist,
        bound=bound,
        optimal=optimal,
        nodes=nodes,
        wall_time=time.perf_counter() - t0,
        directions=dirs,
        objective_kind=kind,
        congestion=cong,
    )


def _first_conflict(topo, paths) -> Optional[int]:
    seen: Dict[int, int] = {}
    clash = set()
    for p in paths.values():
        for a, b in zip(p, p[1:]):
            arc = topo.arc_info[(a, b)]
            prev = seen.setdefault(arc.passage, arc.sign)
            if prev != arc.sign:
                clash.add(arc.passage)
    return min(clash) if clash else None


def _uses_against(topo, path, pid, sign) -> bool:
    for a, b in zip(path, path[1:]):
        arc = topo.arc_info[(a, b)]
        if arc.passage == pid and arc.sign != sign:
            return True
    return False


def solve(
    topo: TopoMap,
    mapped: MappedInstance,
    objective: str = TOTAL,
    incumbent: Optional[TopoPathSet] = None,
    budget: Optional[float] = None,
    node_limit: Optional[int] = None,
    congestion: bool = False,
    base: Optional[Mapping[int, int]] = None,
) -> Solution:
    """Provably optimal one-way path set, or the best incumbent when the budget runs out.

    ``budget`` is wall-clock seconds. ``base`` pre-fixes passage directions.
    Congestion is only reported, never optimized here.
    """
    t0 = time.perf_counter()
    robots = mapped.active
    fixed0 = {p: int(d) for p, d in (base or {}).items() if d}

    root_paths, root_costs = {}, {}
    for r in robots:
        try:
            root_costs[r.id], root_paths[r.id] = shortest_path(topo, r.start, r.goal, fixed0)
        except Unreachable as e:
            raise Infeasible(f"robot {r.id}: {e}") from None
    root_bound = aggregate(list(root_costs.values()), objective)

    best_val = float("inf")
    best = None
    if incumbent is not None:
        inc = {r.id: list(incumbent[r.id]) for r in robots}
        inc_set = TopoPathSet(inc)
        inc_dirs = inc_set.directions(topo)  # raises on an inconsistent warm start
        if any(fixed0.get(p, d) != d for p, d in inc_dirs.items()):
            raise ValueError("incumbent contradicts the pre-fixed directions")
        inc_costs = inc_set.costs(topo)
        best_val = aggregate(list(inc_costs.values()), objective)
        best = (inc, inc_costs, fixed0)

    nodes = 0
    exhausted = False
    heap = []
    conflict = _first_conflict(topo, root_paths)
    if conflict is None:
        if root_bound < best_val:
            best_val, best = root_bound, (root_paths, root_costs, fixed0)
    elif root_bound < best_val:
        key = tuple(sorted(fixed0.items()))
        heap.append((root_bound, 0, key, conflict, root_paths, root_costs))

    while heap:
        if (budget is not None and time.perf_counter() - t0 > budget) or (
            node_limit is not None and nodes >= node_limit
        ):
            exhausted = True
            break
        bound, negdepth, key, pid, paths, costs = heapq.heappop(heap)
        if bound >= best_val:
            heap.clear()
            break
        nodes += 1
        fixed = dict(key)
        for sign in (1, -1):
            child_fixed = dict(fixed)
            child_fixed[pid] = sign
            child_paths, child_costs = dict(paths), dict(costs)
            try:
                for r in robots:
                    if _uses_against(topo, paths[r.id], pid, sign):
                        child_costs[r.id], child_paths[r.id] = shortest_path(
                            topo, r.start, r.goal, child_fixed
                        )
            except Unreachable:
                continue
            cb = aggregate(list(child_costs.values()), objective)
            if cb >= best_val:
                continue
            c = _first_conflict(topo, child_paths)
            if c is None:
                best_val, best = cb, (child_paths, child_costs, child_fixed)
            else:
                ckey = tuple(sorted(child_fixed.items()))
                heapq.heappush(heap, (cb, negdepth - 1, ckey, c, child_paths, child_costs))

    if best is None:
        if exhausted:
            raise BudgetExhausted("budget exhausted before any feasible solution", None)
        raise Infeasible("no direction assignment lets every robot reach its goal")
    if exhausted:
        lower = min([h[0] for h in heap] + [best_val])
    else:
        lower = best_val
    paths, costs, fixed = best
    return _finish(topo, mapped, paths, costs, objective, int(lower), not exhausted, nodes, t0, fixed, congestion)


def brute_force_optimum(
    topo: TopoMap,
    mapped: MappedInstance,
    objective: str = TOTAL,
    base: Optional[Mapping[int, int]] = None,
    congestion: bool = False,
) -> Solution:
    """Exact optimum by enumerating every full direction assignment."""
    t0 = time.perf_counter()
    fixed0 = {p: int(d) for p, d in (base or {}).items() if d}
    free = [p for p in sorted(topo.passages) if p not in fixed0]
    if len(free) > MAX_BRUTE_FORCE_PASSAGES:
        raise TooLarge(f"{len(free)} free passages > {MAX_BRUTE_FORCE_PASSAGES}")
    robots = mapped.active
    best_val, best = float("inf"), None
    count = 0
    for signs in itertools.product((1, -1), repeat=len(free)):
        count += 1
        dirs = dict(fixed0)
        dirs.update(zip(free, signs))
        paths, costs = {}, {}
        try:
            for r in robots:
                costs[r.id], paths[r.id] = shortest_path(topo, r.start, r.goal, dirs)
        except Unreachable:
            continue
        val = aggregate(list(costs.values()), objective)
        if val < best_val:
            best_val, best = val, (paths, costs, dirs)
    if best is None:
        raise Infeasible("no direction assignment lets every robot reach its goal")
    paths, costs, dirs = best
    return _finish(topo, mapped, paths, costs, objective, best_val, True, count, t0, dirs, congestion)
