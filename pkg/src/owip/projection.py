from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from .grid import Cell, Instance, path_length as _cells_length
from .paths import TopoPathSet
from .topo import CROSSING, FORWARD, BACKWARD, TopoMap


class DirectionMismatch(ValueError):
    pass


@dataclass
class ProjectedPlan:
    """Untimed grid paths per robot; crossing cells act as mutual-exclusion resources."""

    paths: Dict[int, List[Cell]]
    crossings: frozenset = field(default_factory=frozenset)

    def __getitem__(self, rid: int) -> List[Cell]:
        return self.paths[rid]


def _walk(topo: TopoMap, pid: int, src: Cell, dst: Cell, directions) -> List[Cell]:
    """Cells strictly after ``src`` up to and including ``dst`` along one passage."""
    p = topo.passages[pid]
    line = [p.ends[0], *p.cells, p.ends[1]]
    i, j = line.index(src), line.index(dst)
    sign = FORWARD if j > i else BACKWARD
    want = directions.get(pid, 0) if directions else 0
    if i != j and want and want != sign:
        raise DirectionMismatch(f"passage {pid} is oriented {want}, robot walks {sign}")
    return line[i + 1 : j + 1] if sign == FORWARD else line[j:i][::-1]


def project_paths(
    topo_paths: TopoPathSet,
    topo: TopoMap,
    inst: Instance,
    directions: Optional[Mapping[int, int]] = None,
) -> ProjectedPlan:
    """Expand each topo path into unit grid steps from the true start cell to the true goal cell."""
    out = {}
    for task in inst.robots:
        tp = topo_paths[task.id]
        s, g = task.start, task.goal
        if s == g:
            out[task.id] = [s]
            continue
        hubs = [topo.cells[v] for v in tp if topo.kinds[v] == CROSSING]
        cells = [s]
        if not hubs:
            pid = topo.passage_at[s]
            if topo.passage_at.get(g) != pid:
                raise DirectionMismatch(f"robot {task.id}: no crossing on path between passages")
            cells += _walk(topo, pid, s, g, directions)
        else:
            if s != hubs[0]:
                cells += _walk(topo, topo.passage_at[s], s, hubs[0], directions)
            for a, b in zip(hubs, hubs[1:]):
                cells += _walk(topo, topo.passage_between[frozenset((a, b))], a, b, directions)
            if g != hubs[-1]:
                cells += _walk(topo, topo.passage_at[g], hubs[-1], g, directions)
        out[task.id] = cells
    return ProjectedPlan(out, frozenset(topo.crossing_at))


def path_length(plan: ProjectedPlan, rid: int) -> int:
    return _cells_length(plan.paths[rid])
