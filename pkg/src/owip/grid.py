"""Narrow-passage warehouse grids, robot instances and grid-level collisions.

Cells are 1-based ``(row, col)`` tuples. A cell is free exactly when its row
is a horizontal passage row or its column is a vertical passage column; every
other cell belongs to a 2-row shelf block.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

Cell = Tuple[int, int]

SHELF_HEIGHT = 2
ROW_SPACING = SHELF_HEIGHT + 1


class GridError(ValueError):
    pass


class NonUniformSpacing(GridError):
    pass


class BoundaryMissing(GridError):
    pass


class SpacingTooSmall(GridError):
    pass


class ShelfHeightError(GridError):
    """Row spacing other than 3 (shelf height is fixed to 2)."""


class OutOfBounds(GridError):
    pass


class NotFree(GridError):
    pass


class TooManyRobots(ValueError):
    pass


class InstanceError(ValueError):
    pass


def _check_axis(indices: Sequence[int], size: int, name: str) -> int:
    if len(indices) < 2:
        raise BoundaryMissing(f"{name} needs passages on both borders, got {list(indices)}")
    if list(indices) != sorted(set(indices)):
        raise GridError(f"{name} must be strictly increasing")
    gaps = {b - a for a, b in zip(indices, indices[1:])}
    if len(gaps) != 1:
        raise NonUniformSpacing(f"{name} gaps differ: {sorted(gaps)}")
    if indices[0] != 1 or indices[-1] != size:
        raise BoundaryMissing(f"{name} must start at 1 and end at {size}, got {list(indices)}")
    gap = gaps.pop()
    if gap < 2:
        raise SpacingTooSmall(f"{name} spacing {gap} < 2")
    return gap


@dataclass(frozen=True)
class GridMap:
    """Warehouse occupancy grid described by its passage rows and columns."""

    h: int
    w: int
    h_rows: Tuple[int, ...]
    v_cols: Tuple[int, ...]
    row_spacing: int = field(init=False)
    col_spacing: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h_rows", tuple(self.h_rows))
        object.__setattr__(self, "v_cols", tuple(self.v_cols))
        hs = _check_axis(self.h_rows, self.h, "hRows")
        ws = _check_axis(self.v_cols, self.w, "vCols")
        if hs != ROW_SPACING:
            raise ShelfHeightError(f"row spacing must be {ROW_SPACING}, got {hs}")
        object.__setattr__(self, "row_spacing", hs)
        object.__setattr__(self, "col_spacing", ws)

    @property
    def shelf_size(self) -> Tuple[int, int]:
        return self.row_spacing - 1, self.col_spacing - 1

    @property
    def shelf_count(self) -> int:
        return (len(self.h_rows) - 1) * (len(self.v_cols) - 1)

    @cached_property
    def _row_set(self):
        return frozenset(self.h_rows)

    @cached_property
    def _col_set(self):
        return frozenset(self.v_cols)

    @cached_property
    def occupancy(self) -> Tuple[Tuple[bool, ...], ...]:
        """``occupancy[i-1][j-1]`` is True for shelf cells."""
        return tuple(
            tuple(not (i in self._row_set or j in self._col_set) for j in range(1, self.w + 1))
            for i in range(1, self.h + 1)
        )

    def in_bounds(self, cell: Cell) -> bool:
        i, j = cell
        return 1 <= i <= self.h and 1 <= j <= self.w

    def is_free(self, cell: Cell) -> bool:
        i, j = cell
        return self.in_bounds(cell) and (i in self._row_set or j in self._col_set)

    def is_crossing(self, cell: Cell) -> bool:
        return cell[0] in self._row_set and cell[1] in self._col_set

    @cached_property
    def free_cells(self) -> Tuple[Cell, ...]:
        return tuple(
            (i, j) for i in range(1, self.h + 1) for j in range(1, self.w + 1) if self.is_free((i, j))
        )

    def to_dict(self) -> dict:
        return {"h": self.h, "w": self.w, "hRows": list(self.h_rows), "vCols": list(self.v_cols)}

    @classmethod
    def from_dict(cls, data: dict) -> "GridMap":
        return cls(int(data["h"]), int(data["w"]), tuple(data["hRows"]), tuple(data["vCols"]))


def build_grid_map(h: int, w: int, h_rows: Iterable[int], v_cols: Iterable[int]) -> GridMap:
    return GridMap(h, w, tuple(h_rows), tuple(v_cols))


def regular_grid(shelf_rows: int, shelf_cols: int, col_spacing: int) -> GridMap:
    """Grid with ``shelf_rows x shelf_cols`` shelf blocks of size 2 x (col_spacing-1)."""
    h_rows = tuple(1 + ROW_SPACING * k for k in range(shelf_rows + 1))
    v_cols = tuple(1 + col_spacing * k for k in range(shelf_cols + 1))
    return GridMap(h_rows[-1], v_cols[-1], h_rows, v_cols)


def fig1_grid() -> GridMap:
    """The 7 x 13 example warehouse with four 2 x 5 shelves."""
    return build_grid_map(7, 13, (1, 4, 7), (1, 7, 13))


def paper_grid() -> GridMap:
    """Benchmark-scale grid: 19 x 22, 18 shelves of size 2 x 6."""
    return regular_grid(6, 3, 7)


PRESETS = {"fig1": fig1_grid, "paper": paper_grid}


def neighbors(grid: GridMap, v: Cell) -> set:
    if not grid.in_bounds(v):
        raise OutOfBounds(f"{v} outside {grid.h}x{grid.w}")
    if not grid.is_free(v):
        raise NotFree(f"{v} is a shelf cell")
    i, j = v
    cand = ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1))
    return {c for c in cand if grid.is_free(c)}


@dataclass(frozen=True)
class Task:
    id: int
    start: Cell
    goal: Cell


@dataclass(frozen=True)
class Instance:
    grid: GridMap
    robots: Tuple[Task, ...]
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(self.robots))
        starts = [t.start for t in self.robots]
        goals = [t.goal for t in self.robots]
        ids = [t.id for t in self.robots]
        if len(set(ids)) != len(ids):
            raise InstanceError("robot ids must be unique")
        if len(set(starts)) != len(starts) or len(set(goals)) != len(goals):
            raise InstanceError("starts and goals must be pairwise distinct")
        for c in starts + goals:
            if not self.grid.is_free(c):
                raise NotFree(f"endpoint {c} is not a free cell")

    def __len__(self):
        return len(self.robots)

    def to_dict(self) -> dict:
        data = self.grid.to_dict()
        data["robots"] = [
            {"id": t.id, "start": list(t.start), "goal": list(t.goal)} for t in self.robots
        ]
        data["seed"] = self.seed
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        grid = GridMap.from_dict(data)
        robots = tuple(
            Task(int(r["id"]), tuple(r["start"]), tuple(r["goal"])) for r in data.get("robots", [])
        )
        return cls(grid, robots, data.get("seed"))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def generate_instance(grid: GridMap, n: int, seed: int) -> Instance:
    free = grid.free_cells
    if n > len(free):
        raise TooManyRobots(f"{n} robots but only {len(free)} free cells")
    rng = random.Random(seed)
    starts = rng.sample(free, n)
    goals = rng.sample(free, n)
    return Instance(grid, tuple(Task(k, s, g) for k, (s, g) in enumerate(zip(starts, goals))), seed)


def path_length(cells: Sequence[Cell]) -> int:
    """Number of residing-vertex changes; repeated cells count once."""
    return sum(1 for a, b in zip(cells, cells[1:]) if a != b)


@dataclass(frozen=True)
class TimedPath:
    release: int
    cells: Tuple[Cell, ...]

    def at(self, t: int) -> Optional[Cell]:
        """Cell occupied at time ``t``, or None when the robot is absent."""
        k = t - self.release
        if 0 <= k < len(self.cells):
            return self.cells[k]
        return None

    @property
    def end(self) -> int:
        return self.release + len(self.cells) - 1


@dataclass(frozen=True)
class CollisionReport:
    kind: str  # "meet" or "head-on"
    time: int
    cells: frozenset


def detect_collision(pi: TimedPath, pj: TimedPath) -> Optional[CollisionReport]:
    """First meet or head-on collision between two timed paths.

    A robot is absent outside its ``[release, release + T]`` window.
    """
    lo = max(pi.release, pj.release)
    hi = min(pi.end, pj.end)
    for t in range(lo, hi + 1):
        a, b = pi.at(t), pj.at(t)
        if a == b:
            return CollisionReport("meet", t, frozenset([a]))
        if t > lo:
            pa, pb = pi.at(t - 1), pj.at(t - 1)
            if pa == b and pb == a and a != pa:
                return CollisionReport("head-on", t, frozenset([a, b]))
    return None
