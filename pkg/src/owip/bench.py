"""Benchmark harness: random instances, heuristic vs. branch and bound, feasibility checked per row."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from statistics import mean
from typing import List, Optional, Sequence

from .bnb import MAX_BRUTE_FORCE_PASSAGES, brute_force_optimum, solve
from .grid import GridMap, generate_instance, path_length
from .heuristic import heuristic_warmstart
from .paths import TOTAL, aggregate
from .projection import project_paths
from .search import OpCounter
from .topo import prepare
from .validate import optimality_ratio, simulate_execution, static_oneway_audit

log = logging.getLogger(__name__)

CSV_COLUMNS = ("n", "rep", "method", "objective", "ratio", "runtime_ms", "nodes", "optimal")


@dataclass
class BenchConfig:
    grid: GridMap
    robots: Sequence[int]
    reps: int = 10
    objective: str = TOTAL
    budget: float = 60.0
    seed: int = 0
    sim_runs: int = 20
    oracle: bool = False


@dataclass
class BenchRecord:
    n: int
    rep: int
    method: str
    objective: Optional[int] = None
    ratio: Optional[float] = None
    runtime_ms: float = 0.0
    nodes: int = 0
    optimal: bool = False
    grid_objective: Optional[int] = None
    feasible: bool = False
    seed: int = 0
    error: str = ""


@dataclass
class BenchResult:
    config: BenchConfig
    rows: List[BenchRecord] = field(default_factory=list)

    def means(self) -> List[dict]:
        out = []
        keys = sorted({(r.n, r.method) for r in self.rows}, key=lambda k: (k[0], k[1]))
        for n, method in keys:
            ok = [r for r in self.rows if r.n == n and r.method == method and not r.error]
            if not ok:
                continue
            out.append({
                "n": n,
                "method": method,
                "reps": len(ok),
                "mean_ratio": mean(r.ratio for r in ok),
                "mean_objective": mean(r.objective for r in ok),
                "mean_runtime_ms": mean(r.runtime_ms for r in ok),
                "optimal_fraction": mean(1.0 if r.optimal else 0.0 for r in ok),
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.n, r.rep, r.method, "" if r.objective is None else r.objective,
                "" if r.ratio is None else f"{r.ratio:.6f}", f"{r.runtime_ms:.3f}", r.nodes,
                str(r.optimal).lower(),
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = asdict(self.config)
        cfg["grid"] = self.config.grid.to_dict()
        cfg["robots"] = list(self.config.robots)
        return json.dumps(
            {"config": cfg, "rows": [asdict(r) for r in self.rows], "means": self.means()}, indent=2
        ) + "\n"


def _checked(plan, inst, cfg, seed) -> bool:
    if not static_oneway_audit(plan).ok:
        return False
    return simulate_execution(plan, cfg.sim_runs, seed).collisions == 0


def run_row(cfg: BenchConfig, n: int, rep: int) -> List[BenchRecord]:
    seed = cfg.seed + 1000 * n + rep
    inst = generate_instance(cfg.grid, n, seed)
    topo, mapped = prepare(inst)

    t0 = time.perf_counter()
    warm = heuristic_warmstart(topo, mapped, counter=OpCounter())
    t_warm = time.perf_counter() - t0
    wplan = project_paths(warm.paths, topo, inst, warm.dmap.directions)
    heur = BenchRecord(
        n, rep, "heuristic", warm.paths.objective(topo, cfg.objective),
        float(optimality_ratio(wplan, inst, cfg.objective)), 1000 * t_warm, 0, False,
        aggregate([path_length(c) for c in wplan.paths.values()], cfg.objective),
        _checked(wplan, inst, cfg, seed), seed,
    )

    t1 = time.perf_counter()
    sol = solve(topo, mapped, cfg.objective, incumbent=warm.paths, budget=cfg.budget)
    t_bnb = time.perf_counter() - t1
    plan = project_paths(sol.paths, topo, inst, sol.directions)
    bnb = BenchRecord(
        n, rep, "bnb", sol.objective, float(optimality_ratio(plan, inst, cfg.objective)),
        1000 * (t_warm + t_bnb), sol.nodes, sol.optimal,
        aggregate([path_length(c) for c in plan.paths.values()], cfg.objective),
        _checked(plan, inst, cfg, seed), seed,
    )
    rows = [heur, bnb]
    if cfg.oracle and len(topo.passages) <= MAX_BRUTE_FORCE_PASSAGES:
        t2 = time.perf_counter()
        bf = brute_force_optimum(topo, mapped, cfg.objective)
        bplan = project_paths(bf.paths, topo, inst, bf.directions)
        rows.append(BenchRecord(
            n, rep, "oracle", bf.objective, float(optimality_ratio(bplan, inst, cfg.objective)),
            1000 * (time.perf_counter() - t2), bf.nodes, True,
            aggregate([path_length(c) for c in bplan.paths.values()], cfg.objective),
            static_oneway_audit(bplan).ok, seed,
        ))
    for r in rows:
        if not r.feasible:
            r.error = "plan failed static audit or simulation"
    return rows


def run_benchmark(cfg: BenchConfig) -> BenchResult:
    res = BenchResult(cfg)
    for n in cfg.robots:
        for rep in range(cfg.reps):
            try:
                res.rows.extend(run_row(cfg, n, rep))
            except Exception as e:  # keep going; the row is recorded as failed
                log.warning("row n=%d rep=%d failed: %s", n, rep, e)
                res.rows.append(BenchRecord(n, rep, "bnb", error=f"{type(e).__name__}: {e}"))
    return res
