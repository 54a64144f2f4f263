import json

import pytest
from hypothesis import given, settings, strategies as st

from owip.grid import (
    BoundaryMissing, GridMap, Instance, NonUniformSpacing, NotFree, OutOfBounds, ShelfHeightError,
    SpacingTooSmall, Task, TimedPath, TooManyRobots, build_grid_map, detect_collision,
    generate_instance, neighbors, path_length, regular_grid,
)


def brute_free(grid):
    return [(i, j) for i in range(1, grid.h + 1) for j in range(1, grid.w + 1)
            if not grid.occupancy[i - 1][j - 1]]


grids = st.builds(regular_grid, st.integers(1, 4), st.integers(1, 4), st.integers(2, 7))


def test_fig1_shelves(fig1):
    assert fig1.shelf_count == 4
    assert fig1.shelf_size == (2, 5)
    assert (fig1.row_spacing, fig1.col_spacing) == (3, 6)


def test_fig1_free_cell_count(fig1):
    assert len(brute_free(fig1)) == 91 - 4 * 10
    assert len(fig1.free_cells) == 51


@pytest.mark.parametrize("args, exc", [
    ((7, 13, [1, 4, 8], [1, 7, 13]), NonUniformSpacing),
    ((7, 13, [1, 4, 7], [1, 7]), BoundaryMissing),
    ((7, 13, [1, 4], [1, 7, 13]), BoundaryMissing),
    ((7, 13, [1, 4, 7], list(range(1, 14))), SpacingTooSmall),
    ((9, 13, [1, 5, 9], [1, 7, 13]), ShelfHeightError),
])
def test_build_rejects(args, exc):
    with pytest.raises(exc):
        build_grid_map(*args)


def test_neighbors(fig1):
    assert neighbors(fig1, (1, 1)) == {(1, 2), (2, 1)}
    assert neighbors(fig1, (4, 7)) == {(3, 7), (5, 7), (4, 6), (4, 8)}
    with pytest.raises((OutOfBounds, NotFree)):
        neighbors(fig1, (2, 2))
    with pytest.raises(OutOfBounds):
        neighbors(fig1, (0, 1))


def test_generate_instance(fig1):
    inst = generate_instance(fig1, 2, seed=1)
    assert len(inst.robots) == 2
    assert all(fig1.is_free(c) for t in inst.robots for c in (t.start, t.goal))
    assert len({t.start for t in inst.robots}) == 2
    assert generate_instance(fig1, 2, seed=1) == inst
    assert generate_instance(fig1, 0, seed=7).robots == ()
    with pytest.raises(TooManyRobots):
        generate_instance(fig1, 52, seed=1)
    assert len(generate_instance(fig1, 51, seed=1).robots) == 51


def test_instance_validation(fig1):
    with pytest.raises(ValueError):
        Instance(fig1, (Task(0, (1, 1), (1, 2)), Task(1, (1, 1), (1, 3))))
    with pytest.raises(NotFree):
        Instance(fig1, (Task(0, (2, 2), (1, 2)),))


def test_instance_file_roundtrip(fig1):
    inst = generate_instance(fig1, 6, seed=3)
    text = inst.dumps()
    assert Instance.loads(text) == inst
    assert Instance.loads(text).dumps() == text
    data = json.loads(text)
    assert set(data) == {"h", "w", "hRows", "vCols", "robots", "seed"}


def test_collision_examples():
    meet = detect_collision(TimedPath(0, ((1, 1), (1, 2))), TimedPath(0, ((1, 3), (1, 2))))
    assert (meet.kind, meet.time) == ("meet", 1)
    head = detect_collision(TimedPath(0, ((1, 1), (1, 2))), TimedPath(0, ((1, 2), (1, 1))))
    assert (head.kind, head.time) == ("head-on", 1)
    # robots are absent outside their windows
    assert detect_collision(TimedPath(0, ((1, 1),)), TimedPath(1, ((1, 1),))) is None
    assert detect_collision(TimedPath(0, ((1, 1), (1, 2))), TimedPath(2, ((1, 1), (1, 2)))) is None


@settings(max_examples=60, deadline=None)
@given(grids)
def test_generated_maps_are_consistent(g):
    free = set(brute_free(g))
    assert free == set(g.free_cells)
    assert all(i in g.h_rows or j in g.v_cols for i, j in free)
    sh, sw = g.shelf_size
    for r0 in g.h_rows[:-1]:
        for c0 in g.v_cols[:-1]:
            block = [(i, j) for i in range(r0 + 1, r0 + 1 + sh) for j in range(c0 + 1, c0 + 1 + sw)]
            assert all(not g.is_free(c) for c in block)
    assert len(g.free_cells) + g.shelf_count * sh * sw == g.h * g.w
    assert GridMap.from_dict(g.to_dict()) == g


@st.composite
def walks(draw):
    g = draw(grids)
    cell = draw(st.sampled_from(g.free_cells))
    cells = [cell]
    for _ in range(draw(st.integers(0, 25))):
        options = sorted(neighbors(g, cells[-1])) + [cells[-1]]
        cells.append(draw(st.sampled_from(options)))
    return cells


@settings(max_examples=100, deadline=None)
@given(walks())
def test_path_length_counts_changes(cells):
    changes = [t for t in range(1, len(cells)) if cells[t] != cells[t - 1]]
    assert path_length(cells) == len(changes)


timed = st.builds(
    TimedPath, st.integers(0, 4),
    st.lists(st.tuples(st.integers(1, 2), st.integers(1, 3)), min_size=1, max_size=6).map(tuple),
)


@settings(max_examples=200, deadline=None)
@given(timed, timed)
def test_collision_symmetric(a, b):
    x, y = detect_collision(a, b), detect_collision(b, a)
    assert (x is None) == (y is None)
    if x is not None:
        assert (x.kind, x.time, x.cells) == (y.kind, y.time, y.cells)
