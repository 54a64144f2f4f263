import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from owip.grid import Instance, Task, generate_instance, regular_grid
from owip.heuristic import (
    DirectedTopoMap, UsageStats, checkerboard, detour_cost, final_path_plan, heuristic_warmstart,
    initial_path_plan, loop_circumference, one_way_regulation, project_to_crossings,
    repair_connectivity, shelf_loops, strongly_connected,
)
from owip.ipmodel import build_model, encode_warmstart, evaluate
from owip.paths import TOTAL
from owip.search import shortest_path
from owip.topo import BACKWARD, FORWARD, extract_topo, prepare

grids = st.builds(regular_grid, st.integers(1, 4), st.integers(1, 4), st.integers(2, 7))


def nx_directed(topo, directions):
    G = nx.DiGraph()
    G.add_nodes_from({v for p in topo.passages.values() for v in p.chain})
    for pid, p in topo.passages.items():
        G.add_edges_from(p.arcs(directions[pid]))
    return G


def arc(topo, a, b):
    return topo.vertex_for_cell(a), topo.vertex_for_cell(b)


def test_project_to_crossings(fig1):
    inst = Instance(fig1, (Task(0, (1, 4), (2, 7)), Task(1, (4, 7), (1, 3))))
    topo, m = prepare(inst)
    xi, xg = project_to_crossings(m, topo)
    assert topo.cells[xi[0]] == (1, 1)
    assert topo.cells[xg[0]] == (1, 7)
    assert topo.cells[xi[1]] == (4, 7)


def test_initial_path_plan_stats(fig1_topo):
    c = fig1_topo.crossing_at
    vp = fig1_topo.vertex_for_cell((1, 4))
    stats, paths = initial_path_plan({0: c[(1, 1)]}, {0: c[(1, 7)]}, fig1_topo)
    assert stats.N == {(c[(1, 1)], vp): {0}, (vp, c[(1, 7)]): {0}}
    assert stats.O == {(c[(1, 1)], vp): 3, (vp, c[(1, 7)]): 3}
    stats2, _ = initial_path_plan({0: c[(1, 1)], 1: c[(1, 1)]}, {0: c[(1, 7)], 1: c[(1, 7)]}, fig1_topo)
    assert set(stats2.O.values()) == {6}
    stats3, p3 = initial_path_plan({0: c[(4, 7)]}, {0: c[(4, 7)]}, fig1_topo)
    assert stats3.O == {} and stats3.N == {} and p3[0] == [c[(4, 7)]]


def test_usage_identity(fig1):
    topo, m = prepare(generate_instance(fig1, 8, 2))
    xi, xg = project_to_crossings(m, topo)
    stats, _ = initial_path_plan(xi, xg, topo)
    for e, total in stats.O.items():
        assert total == len(stats.N[e]) * topo.weight(*e)


def test_loop_shape(fig1_topo):
    loops = shelf_loops(fig1_topo)
    assert len(loops) == 4
    for lp in loops:
        assert len(lp.cw) == 9 and lp.cw[0] == lp.cw[-1]
        assert {(b, a) for a, b in lp.edges(True)} == set(lp.edges(False))
        assert loop_circumference(fig1_topo, lp) == 2 * (6 + 3) == 18
    first = loops[0]
    corners = [fig1_topo.cells[v] for v in first.cw if fig1_topo.kinds[v] == "crossing"]
    assert corners == [(1, 1), (1, 7), (4, 7), (4, 1), (1, 1)]


def test_detour_cost_examples(fig1_topo):
    loop = shelf_loops(fig1_topo)[0]
    one = UsageStats()
    for e in [arc(fig1_topo, (1, 1), (1, 4)), arc(fig1_topo, (1, 4), (1, 7))]:
        one.record(e, 0, fig1_topo.weight(*e))
    assert detour_cost(fig1_topo, loop, one, True) == 12
    assert detour_cost(fig1_topo, loop, one, False) == 0
    empty = UsageStats()
    assert detour_cost(fig1_topo, loop, empty, True) == detour_cost(fig1_topo, loop, empty, False) == 0
    two = UsageStats()
    cw = loop.edges(True)
    top, bottom = cw[0:2], cw[4:6]
    for e in top + bottom:
        two.record(e, 0, fig1_topo.weight(*e))
    for a, b in top:
        two.record((b, a), 1, fig1_topo.weight(a, b))
    assert detour_cost(fig1_topo, loop, two, True) == 18 - 12
    assert detour_cost(fig1_topo, loop, two, False) == 18 - 6


def test_single_shelf_follows_robot():
    g = regular_grid(1, 1, 5)
    topo = extract_topo(g)
    (loop,) = shelf_loops(topo)
    inst = Instance(g, (Task(0, (1, 1), (1, 6)),))
    topo, m = prepare(inst)
    xi, xg = project_to_crossings(m, topo)
    stats, _ = initial_path_plan(xi, xg, topo)
    dmap = one_way_regulation([loop], stats, topo)
    assert dmap.clockwise[loop.shelf]
    assert dmap.directions == loop.orientation(True)
    assert one_way_regulation([loop], stats, topo, mode="argmin").directions == loop.orientation(False)


def test_no_robots_defaults(fig1_topo):
    loops = shelf_loops(fig1_topo)
    dmap = one_way_regulation(loops, UsageStats(), fig1_topo)
    assert set(dmap.scores.values()) == {0}
    assert all(dmap.clockwise.values())
    assert dmap.order == [0, 1, 2, 3]
    assert set(dmap.directions) == set(fig1_topo.passages)
    assert set(dmap.directions.values()) <= {FORWARD, BACKWARD}


def test_shared_passage_goes_to_higher_loop(fig1_topo):
    loops = shelf_loops(fig1_topo)
    left, right = loops[0], loops[1]
    stats = UsageStats()
    for rid in (0, 1):
        for e in right.edges(True)[0:2]:  # top of the right shelf, clockwise
            stats.record(e, rid, fig1_topo.weight(*e))
    e = left.edges(True)[0]
    stats.record(e, 2, fig1_topo.weight(*e))
    dmap = one_way_regulation(loops, stats, fig1_topo)
    assert dmap.scores[right.shelf] > dmap.scores[left.shelf] > 0
    assert dmap.clockwise[left.shelf] and dmap.clockwise[right.shelf]
    shared = fig1_topo.passage_between[frozenset([(1, 7), (4, 7)])]
    assert dmap.directions[shared] == right.orientation(True)[shared] == BACKWARD
    for pid, d in left.orientation(True).items():
        if pid != shared:
            assert dmap.directions[pid] == d


def test_repair_identity_and_sink(fig1_topo):
    loops = shelf_loops(fig1_topo)
    good = DirectedTopoMap(fig1_topo, checkerboard(loops), loops)
    assert repair_connectivity(good) is good
    sink = fig1_topo.crossing_at[(4, 7)]
    dirs = {}
    for pid, p in fig1_topo.passages.items():
        dirs[pid] = FORWARD if p.chain[-1] == sink else BACKWARD if p.chain[0] == sink else FORWARD
    bad = DirectedTopoMap(fig1_topo, dirs, loops)
    assert not strongly_connected(fig1_topo, dirs)
    fixed = repair_connectivity(bad)
    assert nx.is_strongly_connected(nx_directed(fig1_topo, fixed.directions))


def test_repair_flips_before_checkerboard(fig1_topo):
    loops = shelf_loops(fig1_topo)
    cw = {lp.shelf: True for lp in loops}
    from owip.heuristic import _accumulate
    dirs = _accumulate(loops, [0, 1, 2, 3], cw)
    dmap = DirectedTopoMap(fig1_topo, dirs, loops, cw, {0: 0, 1: 0, 2: 0, 3: 0}, [0, 1, 2, 3])
    out = repair_connectivity(dmap)
    assert out.is_strongly_connected()
    assert nx.is_strongly_connected(nx_directed(fig1_topo, out.directions))
    if not strongly_connected(fig1_topo, dirs):
        assert out.repaired in ("flip", "checkerboard")


def test_checkerboard_fig1(fig1_topo):
    dirs = checkerboard(shelf_loops(fig1_topo))
    assert len(dirs) == 12
    G = nx_directed(fig1_topo, dirs)
    assert G.number_of_nodes() == 21 and nx.is_strongly_connected(G)


def test_final_plan_exits_along_passage(fig1):
    inst = Instance(fig1, (Task(0, (1, 3), (1, 2)), Task(1, (1, 5), (4, 1))))
    topo, m = prepare(inst)
    loops = shelf_loops(topo)
    dirs = checkerboard(loops)
    top = topo.passage_between[frozenset([(1, 1), (1, 7)])]
    dmap = DirectedTopoMap(topo, dirs, loops)
    paths = final_path_plan(dmap, m)
    r = m.robot(1)
    cost_free = shortest_path(topo, r.start, r.goal)[0]
    first_hop = topo.arc_info[(paths[1][0], paths[1][1])]
    assert first_hop.passage == top and first_hop.sign == dirs[top]
    assert topo.path_cost(paths[1]) >= cost_free
    assert final_path_plan(dmap, prepare(Instance(fig1, ()))[1]).paths == {}


@pytest.mark.parametrize("seed", range(10))
def test_warm_start_encodes_feasibly(fig1, seed):
    topo, m = prepare(generate_instance(fig1, 8, seed))
    warm = heuristic_warmstart(topo, m)
    for cong in (False, True):
        model = build_model(topo, m, TOTAL, cong)
        assert evaluate(model, encode_warmstart(model, warm.paths)) == []


@settings(max_examples=60, deadline=None)
@given(grids, st.integers(0, 12), st.integers(0, 10 ** 6))
def test_regulated_map_is_oriented_and_strongly_connected(g, n, seed):
    inst = generate_instance(g, min(n, len(g.free_cells)), seed)
    topo, m = prepare(inst)
    warm = heuristic_warmstart(topo, m)
    assert set(warm.dmap.directions) == set(topo.passages)
    assert set(warm.dmap.directions.values()) <= {FORWARD, BACKWARD}
    assert nx.is_strongly_connected(nx_directed(topo, warm.dmap.directions))
    dirs = warm.paths.directions(topo)
    assert all(warm.dmap.directions[p] == d for p, d in dirs.items())
    for r in m.robots:
        p = warm.paths[r.id]
        assert p[0] == r.start and p[-1] == r.goal
        assert warm.paths.is_simple(r.id) and warm.paths.is_continuous(topo, r.id)
        assert topo.path_cost(p) >= shortest_path(topo, r.start, r.goal)[0]


@settings(max_examples=40, deadline=None)
@given(grids)
def test_checkerboard_always_strongly_connected(g):
    topo = extract_topo(g)
    assert nx.is_strongly_connected(nx_directed(topo, checkerboard(shelf_loops(topo))))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 10))
def test_detour_identity(seed, n):
    g = regular_grid(2, 2, 6)
    topo, m = prepare(generate_instance(g, n, seed))
    xi, xg = project_to_crossings(m, topo)
    stats, _ = initial_path_plan(xi, xg, topo)
    robots = sorted(xi)
    for lp in shelf_loops(topo):
        circ = loop_circumference(topo, lp)
        touch = lambda cw: sum(min(sum(stats.used(e, r) for e in lp.edges(cw)), 1) for r in robots)  # noqa: E731
        O = lambda cw: sum(stats.O.get(e, 0) for e in lp.edges(cw))  # noqa: E731
        lhs = detour_cost(topo, lp, stats, True, robots) + detour_cost(topo, lp, stats, False, robots)
        assert lhs == (touch(True) + touch(False)) * circ - O(True) - O(False)
