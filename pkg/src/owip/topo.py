"""Compression of a warehouse grid into its crossing/passage graph.

Every crossing cell becomes a vertex, and every corridor between two adjacent
crossings collapses into a single passage vertex placed on its median cell.
Robot endpoints lying inside a corridor are represented by that corridor's
passage vertex, while the true grid cell is kept for projection.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from .grid import Cell, GridMap, Instance

CROSSING = "crossing"
PASSAGE = "passage"

FORWARD = 1
BACKWARD = -1


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class Passage:
    """Corridor between two adjacent crossings.

    ``ends[0]`` is the lexicographically smaller crossing; ``cells`` and
    ``chain`` are both ordered from ``ends[0]`` to ``ends[1]``. Travelling in
    that order is the FORWARD direction.
    """

    id: int
    ends: Tuple[Cell, Cell]
    cells: Tuple[Cell, ...]
    vertex: Cell
    chain: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.cells)

    @property
    def horizontal(self) -> bool:
        return self.ends[0][0] == self.ends[1][0]

    @property
    def split(self) -> bool:
        return len(self.chain) > 3

    def index(self, cell: Cell) -> int:
        return self.cells.index(cell)

    @property
    def vertex_index(self) -> int:
        return self.cells.index(self.vertex)

    def arcs(self, sign: int) -> List[Tuple[int, int]]:
        seq = self.chain if sign == FORWARD else self.chain[::-1]
        return list(zip(seq, seq[1:]))


@dataclass(frozen=True)
class Arc:
    head: int
    weight: int
    passage: int
    sign: int


@dataclass(eq=False)
class TopoMap:
    """Topological map: crossing vertices plus one (or a split pair of) passage vertices per corridor."""

    grid: GridMap
    cells: Tuple[Cell, ...]
    kinds: Tuple[str, ...]
    tags: Tuple[str, ...]
    passage_of: Tuple[Optional[int], ...]
    passages: Dict[int, Passage]

    @property
    def n_vertices(self) -> int:
        return len(self.cells)

    def label(self, v: int) -> str:
        i, j = self.cells[v]
        prefix = "c" if self.kinds[v] == CROSSING else "p"
        return f"{prefix}{i}_{j}{self.tags[v]}"

    @cached_property
    def by_label(self) -> Dict[str, int]:
        return {self.label(v): v for v in range(self.n_vertices)}

    @cached_property
    def crossings(self) -> Tuple[int, ...]:
        return tuple(v for v, k in enumerate(self.kinds) if k == CROSSING)

    @cached_property
    def crossing_at(self) -> Dict[Cell, int]:
        return {self.cells[v]: v for v in self.crossings}

    @cached_property
    def passage_at(self) -> Dict[Cell, int]:
        """Interior cell -> passage id."""
        return {c: p.id for p in self.passages.values() for c in p.cells}

    @cached_property
    def passage_between(self) -> Dict[frozenset, int]:
        return {frozenset(p.ends): p.id for p in self.passages.values()}

    @cached_property
    def edges(self) -> Tuple[Tuple[int, int, int], ...]:
        """Undirected edges ``(u, v, weight)`` in passage-chain order."""
        out = []
        for pid in sorted(self.passages):
            ch = self.passages[pid].chain
            for a, b in zip(ch, ch[1:]):
                out.append((a, b, manhattan(self.cells[a], self.cells[b])))
        return tuple(out)

    @cached_property
    def arcs(self) -> Tuple[Tuple[Arc, ...], ...]:
        """Outgoing arcs per vertex, sorted by head id."""
        out: List[List[Arc]] = [[] for _ in range(self.n_vertices)]
        for pid in sorted(self.passages):
            ch = self.passages[pid].chain
            for a, b in zip(ch, ch[1:]):
                w = manhattan(self.cells[a], self.cells[b])
                out[a].append(Arc(b, w, pid, FORWARD))
                out[b].append(Arc(a, w, pid, BACKWARD))
        return tuple(tuple(sorted(lst, key=lambda e: e.head)) for lst in out)

    @cached_property
    def arc_list(self) -> Tuple[Tuple[int, int, Arc], ...]:
        return tuple((u, a.head, a) for u in range(self.n_vertices) for a in self.arcs[u])

    @cached_property
    def arc_info(self) -> Dict[Tuple[int, int], Arc]:
        return {(u, v): a for u, v, a in self.arc_list}

    def weight(self, u: int, v: int) -> int:
        return self.arc_info[(u, v)].weight

    def path_cost(self, path) -> int:
        return sum(self.arc_info[(a, b)].weight for a, b in zip(path, path[1:]))

    def vertex_for_cell(self, cell: Cell) -> int:
        """Nearest topological vertex of a free grid cell."""
        if cell in self.crossing_at:
            return self.crossing_at[cell]
        p = self.passages[self.passage_at[cell]]
        inner = p.chain[1:-1]
        if len(inner) == 1:
            return inner[0]
        return inner[0] if p.index(cell) <= p.vertex_index else inner[1]

    def drop_passages(self, ids) -> "TopoMap":
        """Copy without the given corridors (their vertices stay, isolated)."""
        ids = set(ids)
        return replace(self, passages={k: p for k, p in self.passages.items() if k not in ids})

    def dump(self) -> str:
        """Plain-text vertex and passage tables."""
        lines = ["# vertices", "id\tkind\tcell\tlabel"]
        for v in range(self.n_vertices):
            i, j = self.cells[v]
            lines.append(f"{v}\t{self.kinds[v]}\t{i},{j}\t{self.label(v)}")
        lines += ["# passages", "id\tends\tvertex\tlength\tweights"]
        for pid in sorted(self.passages):
            p = self.passages[pid]
            ws = [manhattan(self.cells[a], self.cells[b]) for a, b in zip(p.chain, p.chain[1:])]
            (a1, a2), (b1, b2) = p.ends
            lines.append(
                f"{pid}\t{a1},{a2}-{b1},{b2}\t{p.vertex[0]},{p.vertex[1]}\t{p.length}\t"
                + ",".join(map(str, ws))
            )
        return "\n".join(lines) + "\n"


def _median_cell(cells: Tuple[Cell, ...]) -> Cell:
    return cells[(len(cells) - 1) // 2]


def extract_topo(grid: GridMap) -> TopoMap:
    spans = []
    for i in grid.h_rows:
        for a, b in zip(grid.v_cols, grid.v_cols[1:]):
            spans.append(((i, a), (i, b), tuple((i, j) for j in range(a + 1, b))))
    for j in grid.v_cols:
        for a, b in zip(grid.h_rows, grid.h_rows[1:]):
            spans.append(((a, j), (b, j), tuple((i, j) for i in range(a + 1, b))))
    spans.sort()

    cells: List[Cell] = sorted((i, j) for i in grid.h_rows for j in grid.v_cols)
    kinds = [CROSSING] * len(cells)
    tags = [""] * len(cells)
    passage_of: List[Optional[int]] = [None] * len(cells)
    index = {c: k for k, c in enumerate(cells)}
    passages = {}
    for pid, (a, b, interior) in enumerate(spans):
        vp = _median_cell(interior)
        vid = len(cells)
        cells.append(vp)
        kinds.append(PASSAGE)
        tags.append("")
        passage_of.append(pid)
        passages[pid] = Passage(pid, (a, b), interior, vp, (index[a], vid, index[b]))
    return TopoMap(grid, tuple(cells), tuple(kinds), tuple(tags), tuple(passage_of), passages)


@dataclass(frozen=True)
class MappedRobot:
    id: int
    start_cell: Cell
    goal_cell: Cell
    start: int
    goal: int

    @property
    def stationary(self) -> bool:
        return self.start_cell == self.goal_cell


@dataclass(frozen=True)
class SplitRecord:
    robot: int
    original: int
    v_in: int
    v_out: int
    passage: int


@dataclass(frozen=True)
class MappedInstance:
    instance: Instance
    robots: Tuple[MappedRobot, ...]
    splits: Tuple[SplitRecord, ...] = field(default=())

    @property
    def active(self) -> Tuple[MappedRobot, ...]:
        """Robots that actually have to move."""
        return tuple(r for r in self.robots if not r.stationary)

    def robot(self, rid: int) -> MappedRobot:
        for r in self.robots:
            if r.id == rid:
                return r
        raise KeyError(rid)


def map_endpoints(topo: TopoMap, inst: Instance) -> MappedInstance:
    robots = tuple(
        MappedRobot(t.id, t.start, t.goal, topo.vertex_for_cell(t.start), topo.vertex_for_cell(t.goal))
        for t in inst.robots
    )
    return MappedInstance(inst, robots)


def split_identical_endpoints(topo: TopoMap, mapped: MappedInstance) -> Tuple[TopoMap, MappedInstance]:
    """Separate start and goal of robots that share one passage vertex.

    The passage vertex is subdivided into an ``a`` half (towards ``ends[0]``)
    and a ``b`` half joined by a zero-weight link. A robot whose goal lies
    further along the forward direction starts on ``a`` and ends on ``b``;
    otherwise the other way round.
    """
    targets = sorted(
        {topo.passage_of[r.start] for r in mapped.robots if r.start == r.goal and not r.stationary}
    )
    if not targets:
        return topo, mapped
    cells = list(topo.cells)
    kinds = list(topo.kinds)
    tags = list(topo.tags)
    passage_of = list(topo.passage_of)
    passages = dict(topo.passages)
    for pid in targets:
        p = passages[pid]
        a, vp, b = p.chain
        nb = len(cells)
        cells.append(cells[vp])
        kinds.append(PASSAGE)
        tags[vp] = "a"
        tags.append("b")
        passage_of.append(pid)
        passages[pid] = replace(p, chain=(a, vp, nb, b))
    new = TopoMap(topo.grid, tuple(cells), tuple(kinds), tuple(tags), tuple(passage_of), passages)

    robots = []
    splits = []
    for r in mapped.robots:
        s, g = new.vertex_for_cell(r.start_cell), new.vertex_for_cell(r.goal_cell)
        if r.start == r.goal and not r.stationary:
            p = new.passages[topo.passage_of[r.start]]
            lo, hi = p.chain[1], p.chain[2]
            if p.index(r.start_cell) < p.index(r.goal_cell):
                s, g = lo, hi
            else:
                s, g = hi, lo
            splits.append(SplitRecord(r.id, r.start, s, g, p.id))
        robots.append(replace(r, start=s, goal=g))
    return new, MappedInstance(mapped.instance, tuple(robots), tuple(splits))


def prepare(inst: Instance) -> Tuple[TopoMap, MappedInstance]:
    """Extract, map and split in one go."""
    topo = extract_topo(inst.grid)
    return split_identical_endpoints(topo, map_endpoints(topo, inst))
