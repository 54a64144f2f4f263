"""Polynomial-time warm start.

Robots are first routed between the crossings nearest their endpoints while
ignoring each other. The resulting edge usage scores both orientations of
the loop around every shelf; loops are then committed greedily, highest
score first, which orients every passage. A final directed A* per robot on
the oriented map gives a one-way consistent path set.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .paths import TopoPathSet
from .search import OpCounter, Unreachable, shortest_path
from .topo import BACKWARD, FORWARD, MappedInstance, TopoMap, manhattan

Arc = Tuple[int, int]


def project_to_crossings(mapped: MappedInstance, topo: TopoMap) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Nearest crossing (Manhattan, lexicographic tie-break) of every mapped endpoint."""
    order = sorted(topo.crossings, key=lambda v: topo.cells[v])

    def nearest(v):
        c = topo.cells[v]
        return min(order, key=lambda u: (manhattan(c, topo.cells[u]), topo.cells[u]))

    xi = {r.id: nearest(r.start) for r in mapped.robots}
    xg = {r.id: nearest(r.goal) for r in mapped.robots}
    return xi, xg


@dataclass
class UsageStats:
    """Accumulated distance per arc (``O``) and which robots used it (``N``)."""

    O: Dict[Arc, int] = field(default_factory=dict)
    N: Dict[Arc, Set[int]] = field(default_factory=dict)

    def used(self, e: Arc, rid: int) -> int:
        return 1 if rid in self.N.get(e, ()) else 0

    def record(self, e: Arc, rid: int, weight: int) -> None:
        self.O[e] = self.O.get(e, 0) + weight
        self.N.setdefault(e, set()).add(rid)


def initial_path_plan(
    xi: Dict[int, int], xg: Dict[int, int], topo: TopoMap, counter: Optional[OpCounter] = None
) -> Tuple[UsageStats, TopoPathSet]:
    stats = UsageStats()
    paths = {}
    for rid in sorted(xi):
        _, p = shortest_path(topo, xi[rid], xg[rid], astar=True, counter=counter)
        paths[rid] = p
        for a, b in zip(p, p[1:]):
            stats.record((a, b), rid, topo.weight(a, b))
    return stats, TopoPathSet(paths)


@dataclass(frozen=True)
class Loop:
    """Vertex cycle around one shelf, stored clockwise (row 1 at the top)."""

    shelf: int
    block: Tuple[int, int]
    cw: Tuple[int, ...]
    passages: Tuple[Tuple[int, int], ...]  # (passage id, its direction when the loop runs clockwise)

    @property
    def ccw(self) -> Tuple[int, ...]:
        return self.cw[::-1]

    def vertices(self, clockwise: bool = True) -> Tuple[int, ...]:
        return self.cw if clockwise else self.ccw

    def edges(self, clockwise: bool = True) -> List[Arc]:
        seq = self.vertices(clockwise)
        return list(zip(seq, seq[1:]))

    def orientation(self, clockwise: bool) -> Dict[int, int]:
        return {pid: (s if clockwise else -s) for pid, s in self.passages}


def shelf_loops(topo: TopoMap) -> List[Loop]:
    g = topo.grid
    loops = []
    sid = 0
    for a, (r0, r1) in enumerate(zip(g.h_rows, g.h_rows[1:])):
        for b, (c0, c1) in enumerate(zip(g.v_cols, g.v_cols[1:])):
            corners = [(r0, c0), (r0, c1), (r1, c1), (r1, c0)]
            seq = [topo.crossing_at[corners[0]]]
            passages = []
            for u, v in zip(corners, corners[1:] + corners[:1]):
                p = topo.passages[topo.passage_between[frozenset((u, v))]]
                sign = FORWARD if p.ends[0] == u else BACKWARD
                chain = p.chain if sign == FORWARD else p.chain[::-1]
                seq += chain[1:]
                passages.append((p.id, sign))
            loops.append(Loop(sid, (a, b), tuple(seq), tuple(passages)))
            sid += 1
    return loops


def loop_circumference(topo: TopoMap, loop: Loop) -> int:
    return sum(topo.weight(a, b) for a, b in loop.edges())


def detour_cost(topo: TopoMap, loop: Loop, stats: UsageStats, clockwise: bool = True,
                robots: Optional[Sequence[int]] = None) -> int:
    """Supporters times loop length minus the distance they already spend on it."""
    edges = loop.edges(clockwise)
    if robots is None:
        robots = sorted({r for e in edges for r in stats.N.get(e, ())})
    supporters = sum(min(sum(stats.used(e, r) for e in edges), 1) for r in robots)
    length = sum(topo.weight(a, b) for a, b in edges)
    return supporters * length - sum(stats.O.get(e, 0) for e in edges)


@dataclass
class DirectedTopoMap:
    """Topo map with every passage oriented; optional record of how it was built."""

    topo: TopoMap
    directions: Dict[int, int]
    loops: List[Loop] = field(default_factory=list)
    clockwise: Dict[int, bool] = field(default_factory=dict)
    scores: Dict[int, int] = field(default_factory=dict)
    order: List[int] = field(default_factory=list)
    repaired: str = ""

    def arc_set(self) -> Set[Arc]:
        out = set()
        for pid, p in self.topo.passages.items():
            out.update(p.arcs(self.directions[pid]))
        return out

    def is_strongly_connected(self, counter: Optional[OpCounter] = None) -> bool:
        return strongly_connected(self.topo, self.directions, counter)


def strongly_connected(topo: TopoMap, directions: Dict[int, int], counter: Optional[OpCounter] = None) -> bool:
    """Forward and backward reachability sweeps from one vertex."""
    live = sorted({v for p in topo.passages.values() for v in p.chain})
    if not live:
        return True
    fwd: Dict[int, List[int]] = {v: [] for v in live}
    bwd: Dict[int, List[int]] = {v: [] for v in live}
    for pid, p in topo.passages.items():
        for a, b in p.arcs(directions[pid]):
            fwd[a].append(b)
            bwd[b].append(a)
    ops = 0
    for adj in (fwd, bwd):
        seen = {live[0]}
        todo = deque([live[0]])
        while todo:
            u = todo.popleft()
            for v in adj[u]:
                ops += 1
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        if len(seen) != len(live):
            if counter is not None:
                counter.add(ops)
            return False
    if counter is not None:
        counter.add(ops)
    return True


def _accumulate(loops: List[Loop], order: List[int], clockwise: Dict[int, bool]) -> Dict[int, int]:
    """Earlier loops keep the passages they share with later ones."""
    dirs: Dict[int, int] = {}
    by_id = {lp.shelf: lp for lp in loops}
    for sid in order:
        for pid, d in by_id[sid].orientation(clockwise[sid]).items():
            dirs.setdefault(pid, d)
    return dirs


def one_way_regulation(
    loops: List[Loop], stats: UsageStats, topo: TopoMap, mode: str = "argmax",
    counter: Optional[OpCounter] = None,
) -> DirectedTopoMap:
    """Orient each loop by its detour scores and commit loops in descending score order.

    ``mode="argmin"`` picks the lower-scoring orientation instead (ablation).
    Equal scores resolve to clockwise; equal loop scores to the lower shelf id.
    """
    if mode not in ("argmax", "argmin"):
        raise ValueError(mode)
    robots = sorted({r for users in stats.N.values() for r in users})
    clockwise, scores = {}, {}
    for lp in loops:
        d_cw = detour_cost(topo, lp, stats, True, robots)
        d_ccw = detour_cost(topo, lp, stats, False, robots)
        if counter is not None:
            counter.add(2 * len(lp.cw) * max(1, len(robots)))
        scores[lp.shelf] = max(d_cw, d_ccw)
        clockwise[lp.shelf] = d_cw >= d_ccw if mode == "argmax" else d_cw <= d_ccw
    order = sorted(scores, key=lambda s: (-scores[s], s))
    dirs = _accumulate(loops, order, clockwise)
    if counter is not None:
        counter.add(sum(len(lp.passages) for lp in loops))
    missing = set(topo.passages) - set(dirs)
    if missing:
        raise ValueError(f"passages {sorted(missing)} not on any shelf loop")
    return DirectedTopoMap(topo, dirs, list(loops), clockwise, scores, order)


def checkerboard(loops: List[Loop]) -> Dict[int, int]:
    """Alternate loop orientation by shelf parity; shared passages always agree."""
    dirs: Dict[int, int] = {}
    for lp in loops:
        dirs.update(lp.orientation(sum(lp.block) % 2 == 0))
    return dirs


def repair_connectivity(dmap: DirectedTopoMap, counter: Optional[OpCounter] = None) -> DirectedTopoMap:
    """Make the oriented map strongly connected.

    Unchanged when already connected. Otherwise whole loops are flipped one by
    one, lowest score first, and the checkerboard orientation is the fallback.
    """
    if dmap.is_strongly_connected(counter):
        return dmap
    loops = dmap.loops or shelf_loops(dmap.topo)
    if dmap.order and dmap.clockwise:
        clockwise = dict(dmap.clockwise)
        for sid in sorted(dmap.order, key=lambda s: (dmap.scores.get(s, 0), s)):
            clockwise[sid] = not clockwise[sid]
            dirs = _accumulate(loops, dmap.order, clockwise)
            if strongly_connected(dmap.topo, dirs, counter):
                return DirectedTopoMap(dmap.topo, dirs, loops, clockwise, dmap.scores, dmap.order, "flip")
    dirs = checkerboard(loops)
    cw = {lp.shelf: sum(lp.block) % 2 == 0 for lp in loops}
    return DirectedTopoMap(dmap.topo, dirs, loops, cw, dmap.scores, dmap.order, "checkerboard")


def final_path_plan(
    dmap: DirectedTopoMap, mapped: MappedInstance, counter: Optional[OpCounter] = None
) -> TopoPathSet:
    paths = {}
    for r in mapped.robots:
        if r.stationary:
            paths[r.id] = [r.start]
            continue
        try:
            _, paths[r.id] = shortest_path(
                dmap.topo, r.start, r.goal, dmap.directions, astar=True, counter=counter
            )
        except Unreachable as e:  # pragma: no cover - excluded by repair
            raise AssertionError(f"oriented map not strongly connected: {e}") from None
    return TopoPathSet(paths)


@dataclass
class WarmStart:
    paths: TopoPathSet
    dmap: DirectedTopoMap
    stats: UsageStats
    ignoring: TopoPathSet
    ops: int


def heuristic_warmstart(
    topo: TopoMap, mapped: MappedInstance, mode: str = "argmax", counter: Optional[OpCounter] = None
) -> WarmStart:
    counter = counter if counter is not None else OpCounter()
    xi, xg = project_to_crossings(mapped, topo)
    counter.add(len(mapped.robots))
    active = {r.id for r in mapped.active}
    stats, ignoring = initial_path_plan(
        {k: v for k, v in xi.items() if k in active}, {k: v for k, v in xg.items() if k in active},
        topo, counter,
    )
    loops = shelf_loops(topo)
    dmap = one_way_regulation(loops, stats, topo, mode, counter)
    dmap = repair_connectivity(dmap, counter)
    paths = final_path_plan(dmap, mapped, counter)
    return WarmStart(paths, dmap, stats, ignoring, counter.ops)
