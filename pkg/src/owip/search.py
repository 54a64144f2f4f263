from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple

from .topo import TopoMap, manhattan


class Unreachable(Exception):
    pass


@dataclass
class OpCounter:
    """Counts heap pops and arc relaxations (and anything else callers add)."""

    ops: int = 0

    def add(self, k: int = 1) -> None:
        self.ops += k


def shortest_path(
    topo: TopoMap,
    source: int,
    target: int,
    directions: Optional[Mapping[int, int]] = None,
    astar: bool = False,
    counter: Optional[OpCounter] = None,
) -> Tuple[int, List[int]]:
    """Cheapest path on the topo map honouring passage directions.

    ``directions`` maps passage id to FORWARD/BACKWARD; a missing or zero
    entry leaves the passage usable both ways. Ties between equal-cost
    predecessors go to the smaller vertex id.
    """
    if source == target:
        return 0, [source]
    directions = directions or {}
    cells = topo.cells
    goal_cell = cells[target]
    arcs = topo.arcs
    dist = {source: 0}
    pred = {source: -1}
    closed = set()
    h0 = manhattan(cells[source], goal_cell) if astar else 0
    heap = [(h0, source)]
    ops = 0
    while heap:
        f, u = heapq.heappop(heap)
        ops += 1
        if u in closed:
            continue
        closed.add(u)
        if u == target:
            break
        du = dist[u]
        for a in arcs[u]:
            d = directions.get(a.passage, 0)
            if d and d != a.sign:
                continue
            v = a.head
            if v in closed:
                continue
            ops += 1
            nd = du + a.weight
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                pred[v] = u
                hv = manhattan(cells[v], goal_cell) if astar else 0
                heapq.heappush(heap, (nd + hv, v))
            elif nd == old and u < pred[v]:
                pred[v] = u
    if counter is not None:
        counter.add(ops)
    if target not in closed:
        raise Unreachable(f"{topo.label(target)} unreachable from {topo.label(source)}")
    path = [target]
    while path[-1] != source:
        path.append(pred[path[-1]])
    path.reverse()
    return dist[target], path
