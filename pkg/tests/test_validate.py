from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from owip.bnb import solve
from owip.grid import Instance, Task, generate_instance, neighbors, regular_grid
from owip.paths import MAX, TOTAL
from owip.pipeline import plan_instance
from owip.projection import ProjectedPlan, project_paths
from owip.topo import prepare
from owip.validate import (
    DeadlockDetected, Timing, adversarial_timing, grid_distance, optimality_ratio, simulate_execution,
    static_oneway_audit, validate_plan,
)

TINY = regular_grid(1, 1, 2)
CORRIDOR = [(1, j) for j in range(1, 8)]


def crossings(grid):
    return frozenset((i, j) for i in grid.h_rows for j in grid.v_cols)


def test_audit_examples(fig1):
    inst = generate_instance(fig1, 6, 1)
    assert static_oneway_audit(plan_instance(inst).plan).ok
    opposing = ProjectedPlan({0: CORRIDOR[:4], 1: CORRIDOR[3:0:-1]})
    res = static_oneway_audit(opposing)
    assert not res.ok
    assert len(res.violations) == 2  # (1,2)-(1,3) and (1,3)-(1,4)
    single = static_oneway_audit(ProjectedPlan({0: [(1, 1), (1, 2)], 1: [(1, 2), (1, 1)]}))
    assert single.violations == [((1, 1), (1, 2))]
    disjoint = ProjectedPlan({0: CORRIDOR, 1: [(7, j) for j in range(13, 6, -1)]})
    assert static_oneway_audit(disjoint).ok


def test_single_robot_simulation(fig1):
    plan = ProjectedPlan({0: CORRIDOR + [(2, 7), (3, 7), (4, 7)]}, crossings(fig1))
    res = simulate_execution(plan, runs=50, seed=3)
    assert res.collisions == 0 and res.max_crossing_wait == 0


def test_follower_queues(fig1):
    plan = ProjectedPlan({0: CORRIDOR[1:], 1: CORRIDOR[:-1]}, crossings(fig1))
    slow = Timing({0: 1, 1: 0}, {0: [3] * 6, 1: [1] * 6})
    res = simulate_execution(plan, runs=1, timing=slow)
    assert res.collisions == 0
    alone = [
        simulate_execution(ProjectedPlan({r: plan.paths[r]}, plan.crossings), runs=1,
                           timing=Timing({r: slow.release[r]}, {r: slow.dwell[r]})).total_times[0]
        for r in (0, 1)
    ]
    assert res.total_times[0] > sum(alone)  # the follower had to wait
    assert simulate_execution(plan, runs=200, seed=5).collisions == 0


def test_head_on_without_controller():
    plan = ProjectedPlan({0: [(1, 1), (1, 2)], 1: [(1, 2), (1, 1)]}, frozenset())
    t = Timing({0: 1, 1: 1}, {0: [1, 1], 1: [1, 1]})
    res = simulate_execution(plan, runs=1, timing=t, controller=False)
    assert res.collisions >= 1
    assert any(e[1] == "head-on" for e in res.events)


def test_deadlock_on_opposing_plan():
    plan = ProjectedPlan({0: CORRIDOR[:3], 1: CORRIDOR[2::-1]}, frozenset())
    t = Timing({0: 1, 1: 1}, {0: [1] * 3, 1: [1] * 3})
    with pytest.raises(DeadlockDetected):
        simulate_execution(plan, runs=1, timing=t, horizon=20)


def test_negative_control(paper):
    for seed in range(20):
        plan = plan_instance(generate_instance(paper, 10, seed)).plan
        timing = adversarial_timing(plan)
        if timing is not None:
            break
    assert timing is not None
    assert simulate_execution(plan, runs=1, timing=timing, controller=False).collisions >= 1
    assert simulate_execution(plan, runs=1, timing=timing, controller=True).collisions == 0


def test_ratio_examples(fig1):
    one = Instance(fig1, (Task(0, (1, 1), (7, 13)),))
    assert optimality_ratio(plan_instance(one).plan, one) == 1
    ring = Instance(TINY, (Task(0, (1, 1), (1, 3)), Task(1, (1, 3), (1, 1))))
    plan = plan_instance(ring).plan
    assert optimality_ratio(plan, ring, TOTAL) == Fraction(2 + 8, 2 + 2)
    assert optimality_ratio(plan, ring, MAX) == Fraction(8, 2)
    still = Instance(fig1, (Task(0, (1, 1), (1, 1)),))
    assert optimality_ratio(plan_instance(still).plan, still) == 1
    assert optimality_ratio(ProjectedPlan({}), Instance(fig1, ())) == 1


def test_report_dict(fig1):
    plan = plan_instance(generate_instance(fig1, 5, 2)).plan
    rep = validate_plan(plan, runs=10, seed=1)
    d = rep.to_dict()
    assert d["ok"] and d["static_oneway_ok"] and d["violations"] == []
    assert d["simulation"]["runs"] == 10 and len(d["simulation"]["seeds"]) == 10
    assert validate_plan(plan, runs=10, seed=1).to_dict() == d


@settings(max_examples=40, deadline=None)
@given(st.builds(regular_grid, st.integers(1, 3), st.integers(1, 3), st.integers(2, 6)),
       st.integers(0, 10 ** 6), st.data())
def test_grid_distance_matches_networkx(g, seed, data):
    G = nx.Graph([(c, d) for c in g.free_cells for d in neighbors(g, c)])
    a = data.draw(st.sampled_from(g.free_cells))
    b = data.draw(st.sampled_from(g.free_cells))
    assert grid_distance(g, a, b) == nx.shortest_path_length(G, a, b)


@settings(max_examples=25, deadline=None)
@given(st.builds(regular_grid, st.integers(1, 3), st.integers(1, 3), st.integers(2, 6)),
       st.integers(1, 10), st.integers(0, 10 ** 6))
def test_audited_plans_never_collide(g, n, seed):
    inst = generate_instance(g, min(n, len(g.free_cells)), seed)
    topo, m = prepare(inst)
    sol = solve(topo, m)
    plan = project_paths(sol.paths, topo, inst, sol.directions)
    assert static_oneway_audit(plan).ok
    assert simulate_execution(plan, runs=30, seed=seed).collisions == 0
