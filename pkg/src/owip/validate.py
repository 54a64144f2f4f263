"""Anytime-feasibility checks for projected plans.

The static audit proves the passage part: no grid edge is travelled in both
directions. The simulator exercises the rest under random release times and
per-step delays, with robots queueing behind occupied cells and waiting
before crossings until they are empty.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .grid import Cell, GridMap, Instance, neighbors, path_length
from .paths import TOTAL, aggregate
from .projection import ProjectedPlan


class DeadlockDetected(RuntimeError):
    pass


@dataclass
class AuditResult:
    ok: bool
    violations: List[Tuple[Cell, Cell]]


def static_oneway_audit(plan: ProjectedPlan) -> AuditResult:
    seen: Dict[frozenset, Tuple[Cell, Cell]] = {}
    bad = set()
    for rid in sorted(plan.paths):
        cells = plan.paths[rid]
        for a, b in zip(cells, cells[1:]):
            if a == b:
                continue
            key = frozenset((a, b))
            first = seen.setdefault(key, (a, b))
            if first != (a, b):
                bad.add(tuple(sorted((a, b))))
    return AuditResult(not bad, sorted(bad))


@dataclass
class SimulationResult:
    runs: int
    collisions: int
    max_crossing_wait: int
    seeds: List[int] = field(default_factory=list)
    makespans: List[int] = field(default_factory=list)
    total_times: List[int] = field(default_factory=list)
    events: List[Tuple[int, str, int, int, Cell]] = field(default_factory=list)


@dataclass
class Timing:
    release: Dict[int, int]
    dwell: Dict[int, List[int]]  # per robot, ticks to spend on each cell of its path


def random_timing(plan: ProjectedPlan, rng: random.Random) -> Timing:
    n = len(plan.paths)
    release = {rid: rng.randint(0, 5 * n) for rid in sorted(plan.paths)}
    dwell = {rid: [rng.randint(1, 3) for _ in plan.paths[rid]] for rid in sorted(plan.paths)}
    return Timing(release, dwell)


def adversarial_timing(plan: ProjectedPlan) -> Optional[Timing]:
    """Unit-speed timing that brings two robots onto a shared crossing at the same tick."""
    first: Dict[Cell, Tuple[int, int]] = {}
    for rid in sorted(plan.paths):
        for k, c in enumerate(plan.paths[rid]):
            if c not in plan.crossings:
                continue
            if c in first and first[c][0] != rid:
                other, ko = first[c]
                shift = max(ko, k)
                later = shift + max(len(p) for p in plan.paths.values()) + 1
                release = {r: later for r in plan.paths}
                release[other] = shift - ko + 1  # ticks start at 1
                release[rid] = shift - k + 1
                dwell = {r: [1] * len(plan.paths[r]) for r in plan.paths}
                return Timing(release, dwell)
            first.setdefault(c, (rid, k))
    return None


def _simulate_once(plan: ProjectedPlan, timing: Timing, controller: bool, horizon: int):
    """One run; returns (collision count, max crossing wait, makespan, total time, events)."""
    rids = sorted(plan.paths)
    paths = plan.paths
    pos: Dict[int, int] = {}  # rid -> index into its path (present robots only)
    left: Dict[int, int] = {}  # ticks still to dwell on the current cell
    done: Dict[int, int] = {}
    waiting: Dict[int, int] = {}
    max_wait = 0
    collisions = 0
    events = []
    t = 0
    stalled = 0
    crossings = plan.crossings
    for rid in rids:
        if len(paths[rid]) == 0:
            done[rid] = 0
    while len(done) < len(rids):
        t += 1
        occupied = {paths[r][k]: r for r, k in pos.items()}
        prev = {r: paths[r][k] for r, k in pos.items()}
        claimed = set()
        moves: Dict[int, int] = {}
        progressed = False
        for rid in rids:
            if rid in done:
                continue
            if rid in pos:
                if left[rid] > 1:
                    left[rid] -= 1
                    progressed = True
                    continue
                k = pos[rid]
                if k == len(paths[rid]) - 1:
                    moves[rid] = -1  # vanish at the goal
                    progressed = True
                    continue
                target = paths[rid][k + 1]
            elif t >= timing.release[rid]:
                k = -1
                target = paths[rid][0]
            else:
                progressed = True  # not released yet
                continue
            if controller and (target in occupied or target in claimed):
                if target in crossings:
                    waiting[rid] = waiting.get(rid, 0) + 1
                    max_wait = max(max_wait, waiting[rid])
                continue
            waiting.pop(rid, None)
            claimed.add(target)
            moves[rid] = k + 1
            progressed = True
        for rid, k in moves.items():
            if k == -1:
                del pos[rid]
                done[rid] = t - 1
                continue
            pos[rid] = k
            left[rid] = timing.dwell[rid][k]
        cur: Dict[Cell, int] = {}
        for r, k in pos.items():
            c = paths[r][k]
            if c in cur:
                collisions += 1
                events.append((t, "meet", cur[c], r, c))
            else:
                cur[c] = r
        hops = {(prev[r], paths[r][k]): r for r, k in pos.items() if r in prev and prev[r] != paths[r][k]}
        for (a, b), r in hops.items():
            o = hops.get((b, a))
            if o is not None and r < o:
                collisions += 1
                events.append((t, "head-on", r, o, b))
        stalled = 0 if progressed else stalled + 1
        if stalled > horizon:
            raise DeadlockDetected(f"no robot moved for {horizon} ticks at t={t}")
    makespan = max(done.values(), default=0)
    total = sum(done[r] - timing.release[r] for r in rids if paths[r])
    return collisions, max_wait, makespan, total, events


def simulate_execution(
    plan: ProjectedPlan,
    runs: int = 100,
    seed: int = 0,
    controller: bool = True,
    timing: Optional[Timing] = None,
    horizon: int = 200,
) -> SimulationResult:
    """Monte Carlo execution with random releases in [0, 5n] and dwell times in {1, 2, 3}."""
    res = SimulationResult(runs, 0, 0)
    master = random.Random(seed)
    for _ in range(runs):
        s = master.randrange(2 ** 31)
        tm = timing or random_timing(plan, random.Random(s))
        c, w, mk, tot, ev = _simulate_once(plan, tm, controller, horizon)
        res.collisions += c
        res.max_crossing_wait = max(res.max_crossing_wait, w)
        res.seeds.append(s)
        res.makespans.append(mk)
        res.total_times.append(tot)
        res.events.extend(ev[:10])
    return res


@dataclass
class FeasibilityReport:
    static_oneway_ok: bool
    violations: List[Tuple[Cell, Cell]]
    simulation: Optional[SimulationResult]

    @property
    def ok(self) -> bool:
        sim_ok = self.simulation is None or self.simulation.collisions == 0
        return self.static_oneway_ok and sim_ok

    def to_dict(self) -> dict:
        sim = self.simulation
        return {
            "ok": self.ok,
            "static_oneway_ok": self.static_oneway_ok,
            "violations": [[list(a), list(b)] for a, b in self.violations],
            "simulation": None if sim is None else {
                "runs": sim.runs,
                "collisions": sim.collisions,
                "max_crossing_wait": sim.max_crossing_wait,
                "seeds": sim.seeds,
                "mean_makespan": sum(sim.makespans) / len(sim.makespans) if sim.makespans else 0,
                "mean_total_time": sum(sim.total_times) / len(sim.total_times) if sim.total_times else 0,
            },
        }


def validate_plan(plan: ProjectedPlan, runs: int = 100, seed: int = 0) -> FeasibilityReport:
    audit = static_oneway_audit(plan)
    sim = simulate_execution(plan, runs, seed) if runs else None
    return FeasibilityReport(audit.ok, audit.violations, sim)


def plan_problems(plan: ProjectedPlan, inst: Instance) -> List[str]:
    """Mismatches between a plan and its instance: missing robots, wrong endpoints, jumps."""
    out = []
    for t in inst.robots:
        cells = plan.paths.get(t.id)
        if not cells:
            out.append(f"robot {t.id}: no path")
            continue
        if cells[0] != t.start or cells[-1] != t.goal:
            out.append(f"robot {t.id}: path runs {cells[0]} -> {cells[-1]}, task is {t.start} -> {t.goal}")
        for a, b in zip(cells, cells[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) > 1 or not inst.grid.is_free(b):
                out.append(f"robot {t.id}: illegal step {a} -> {b}")
                break
    return out


def grid_distance(grid: GridMap, a: Cell, b: Cell) -> int:
    """Breadth-first grid distance between two free cells."""
    if a == b:
        return 0
    dist = {a: 0}
    todo = deque([a])
    while todo:
        u = todo.popleft()
        for v in sorted(neighbors(grid, u)):
            if v not in dist:
                dist[v] = dist[u] + 1
                if v == b:
                    return dist[v]
                todo.append(v)
    raise ValueError(f"{b} unreachable from {a}")


def optimality_ratio(plan: ProjectedPlan, inst: Instance, objective: str = TOTAL) -> Fraction:
    """Plan cost over the collision-ignoring lower bound; 1 when the bound is 0."""
    num = aggregate([path_length(plan.paths[t.id]) for t in inst.robots], objective)
    den = aggregate([grid_distance(inst.grid, t.start, t.goal) for t in inst.robots], objective)
    if den == 0:
        return Fraction(1)
    return Fraction(num, den)
