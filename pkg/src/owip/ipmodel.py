"""Integer program over the topo map with one-way passage constraints.

Per robot ``r`` and arc ``(a, b)`` a binary ``x`` says whether the robot's
path uses the arc. Flow rows make it a single start-to-goal path, MTZ rows
remove detached subtours, and one binary ``z`` per passage selects which of
the two directions robots may use. ``z = 0`` permits FORWARD travel,
``z = 1`` BACKWARD travel.

The model is plain data; nothing here calls a solver. ``export_lp`` writes
it in CPLEX LP syntax and ``read_assignment`` reads solver output back.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

from .paths import MAX, TOTAL, TopoPathSet
from .topo import FORWARD, MappedInstance, MappedRobot, TopoMap

TAGS = ("EndFlow", "EndBlock", "Conservation", "MTZ", "OneWay", "XmaxLink", "Congestion")
MTZ_LOW = 3


class UnreachableEndpoint(ValueError):
    pass


class InfeasibleAssignment(ValueError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__(f"{len(violations)} violated rows, first: {violations[0]}")


class BrokenFlow(ValueError):
    pass


class CycleDetected(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "integer"
    lb: int
    ub: int


@dataclass(frozen=True)
class Constraint:
    name: str
    tag: str
    terms: Tuple[Tuple[str, int], ...]
    sense: str  # "<=", "=", ">="
    rhs: int

    def lhs(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0) for v, c in self.terms)

    def satisfied(self, values: Mapping[str, float], tol: float = 1e-6) -> bool:
        lhs = self.lhs(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class IpModel:
    topo: TopoMap
    mapped: MappedInstance
    objective_kind: str = TOTAL
    congestion: bool = False
    variables: Dict[str, Variable] = field(default_factory=dict)
    constraints: List[Constraint] = field(default_factory=list)
    objective: Dict[str, int] = field(default_factory=dict)
    x: Dict[Tuple[int, int, int], str] = field(default_factory=dict)
    u: Dict[Tuple[int, int], str] = field(default_factory=dict)
    z: Dict[int, str] = field(default_factory=dict)
    row_counts: Dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def robots(self) -> Tuple[MappedRobot, ...]:
        return self.mapped.active

    def count(self, kind_prefix: str) -> int:
        return sum(1 for n in self.variables if n.startswith(kind_prefix))

    def _var(self, name, kind, lb, ub):
        if name not in self.variables:
            self.variables[name] = Variable(name, kind, lb, ub)
        return name

    def _row(self, tag, terms, sense, rhs):
        merged: Dict[str, int] = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0) + c
        k = self.row_counts.get(tag, 0)
        self.row_counts[tag] = k + 1
        self.constraints.append(
            Constraint(f"{tag}_{k}", tag, tuple((v, c) for v, c in merged.items() if c), sense, rhs)
        )

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0) for v, c in self.objective.items())


def _xname(topo, rid, a, b):
    return f"x_r{rid}_{topo.label(a)}_{topo.label(b)}"


def build_model(
    topo: TopoMap, mapped: MappedInstance, objective_kind: str = TOTAL, congestion: bool = False
) -> IpModel:
    """Path-continuity, subtour-elimination and one-way rows, then the objective.

    Expects endpoint splitting to have been applied already.
    """
    m = IpModel(topo, mapped)
    n_v = topo.n_vertices
    arcs = topo.arc_list
    for r in m.robots:
        for end in (r.start, r.goal):
            if not topo.arcs[end]:
                raise UnreachableEndpoint(f"robot {r.id}: {topo.label(end)} has no incident edges")
        for a, b, _ in arcs:
            m.x[(r.id, a, b)] = m._var(_xname(topo, r.id, a, b), "binary", 0, 1)

    for r in m.robots:
        x = lambda a, b: m.x[(r.id, a, b)]  # noqa: E731
        out_of = lambda v: [(x(v, e.head), 1) for e in topo.arcs[v]]  # noqa: E731
        into = lambda v: [(x(e.head, v), 1) for e in topo.arcs[v]]  # noqa: E731
        m._row("EndFlow", out_of(r.start), "=", 1)
        m._row("EndFlow", into(r.goal), "=", 1)
        m._row("EndBlock", into(r.start), "=", 0)
        m._row("EndBlock", out_of(r.goal), "=", 0)
        for v in range(n_v):
            if v in (r.start, r.goal) or not topo.arcs[v]:
                continue
            m._row("Conservation", out_of(v) + [(n, -c) for n, c in into(v)], "=", 0)
            m._row("Conservation", out_of(v), "<=", 1)
        for a, b, _ in arcs:
            if a in (r.start, r.goal) or b in (r.start, r.goal):
                continue
            ua = m._var(f"u_r{r.id}_{topo.label(a)}", "integer", MTZ_LOW, n_v)
            ub = m._var(f"u_r{r.id}_{topo.label(b)}", "integer", MTZ_LOW, n_v)
            m.u[(r.id, a)], m.u[(r.id, b)] = ua, ub
            m._row("MTZ", [(ua, 1), (ub, -1), (x(a, b), n_v)], "<=", n_v - 1)

    for pid in sorted(topo.passages):
        p = topo.passages[pid]
        for r in m.robots:
            fwd, bwd = _direction_arcs(topo, p, r)
            if not fwd and not bwd:
                continue
            z = m.z.setdefault(pid, m._var(f"z_p{pid}", "binary", 0, 1))
            for a, b in fwd:
                m._row("OneWay", [(m.x[(r.id, a, b)], 1), (z, 1)], "<=", 1)
            for a, b in bwd:
                m._row("OneWay", [(m.x[(r.id, a, b)], 1), (z, -1)], "<=", 0)
    return set_objective(m, objective_kind, congestion)


def _direction_arcs(topo, p, r):
    """Arcs whose use reveals the robot's direction in passage ``p``.

    Returns (forward arcs, backward arcs). For an unsplit passage this is the
    single pair that distinguishes the two directions given where the robot
    starts and ends; split passages list every chain arc.
    """
    A, B = p.chain[0], p.chain[-1]
    inner = p.chain[1:-1]
    if p.split:
        return p.arcs(FORWARD), p.arcs(-FORWARD)
    (vp,) = inner
    if r.start == vp:
        return [(vp, B)], [(vp, A)]
    if r.goal == vp:
        return [(A, vp)], [(B, vp)]
    return [(A, vp)], [(vp, A)]


def set_objective(model: IpModel, kind: str = TOTAL, congestion: bool = False) -> IpModel:
    """Copy of ``model`` with the distance objective (and optional congestion term) replaced."""
    if kind not in (TOTAL, MAX):
        raise ValueError(f"unknown objective {kind!r}")
    topo = model.topo
    m = replace(
        model,
        objective_kind=kind,
        congestion=congestion,
        variables={
            n: v for n, v in model.variables.items() if n[0] in "xuz" and not n.startswith("xmax")
        },
        constraints=[c for c in model.constraints if c.tag not in ("XmaxLink", "Congestion")],
        objective={},
        row_counts={t: k for t, k in model.row_counts.items() if t not in ("XmaxLink", "Congestion")},
    )
    dist = {
        r.id: [(m.x[(r.id, a, b)], arc.weight) for a, b, arc in topo.arc_list] for r in m.robots
    }
    big = sum(w for _, _, w in topo.edges)
    if kind == TOTAL:
        for terms in dist.values():
            for v, w in terms:
                m.objective[v] = m.objective.get(v, 0) + w
    elif m.robots:
        top = m._var("Xmax", "integer", 0, big)
        for r in m.robots:
            xm = m._var(f"xmax_r{r.id}", "integer", 0, big)
            m._row("XmaxLink", dist[r.id] + [(xm, -1)], "<=", 0)
            m._row("XmaxLink", [(top, 1), (xm, -1)], ">=", 0)
        m.objective[top] = 1
    if congestion and m.robots:
        cmax = m._var("Cmax", "integer", 0, len(m.robots))
        for v in topo.crossings:
            if not topo.arcs[v]:
                continue
            flags = []
            for r in m.robots:
                pv = m._var(f"P_r{r.id}_{topo.label(v)}", "binary", 0, 1)
                flags.append(pv)
                for e in topo.arcs[v]:
                    m._row("Congestion", [(pv, 1), (m.x[(r.id, v, e.head)], -1)], ">=", 0)
            m._row("Congestion", [(cmax, 1)] + [(f, -1) for f in flags], ">=", 0)
        m.objective[cmax] = m.objective.get(cmax, 0) + 1
    return m


@dataclass(frozen=True)
class Violation:
    name: str
    detail: str


def evaluate(model: IpModel, values: Mapping[str, float], tol: float = 1e-6) -> List[Violation]:
    """Every bound, integrality and row violation of an assignment."""
    bad = []
    for name, var in model.variables.items():
        val = values.get(name, 0)
        if abs(val - round(val)) > tol:
            bad.append(Violation(name, f"non-integral value {val}"))
        if val < var.lb - tol or val > var.ub + tol:
            bad.append(Violation(name, f"value {val} outside [{var.lb}, {var.ub}]"))
    for c in model.constraints:
        if not c.satisfied(values, tol):
            bad.append(Violation(c.name, f"lhs {c.lhs(values)} {c.sense} {c.rhs} fails"))
    return bad


def _fmt_terms(terms) -> List[str]:
    out = []
    for k, (v, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag} "
        if k == 0:
            out.append(f"{'-' if c < 0 else ''}{coef}{v}")
        else:
            out.append(f"{sign} {coef}{v}")
    return out


def _wrap(prefix: str, tokens: List[str], tail: str = "", per_line: int = 8) -> List[str]:
    if not tokens:
        return [f"{prefix}{(' ' + tail) if tail else ''}".rstrip()]
    lines = []
    for k in range(0, len(tokens), per_line):
        chunk = " ".join(tokens[k : k + per_line])
        lines.append((prefix if k == 0 else "   ") + chunk)
    if tail:
        lines[-1] += " " + tail
    return lines


def export_lp(model: IpModel) -> str:
    """CPLEX-LP text of the model; byte-identical for identical inputs."""
    lines = [
        "\\ one-way multi-robot path planning model",
        f"\\ objective: {model.objective_kind}{' + congestion' if model.congestion else ''}",
        f"\\ robots: {len(model.robots)}  vertices: {model.topo.n_vertices}",
        "Minimize",
    ]
    lines += _wrap(" obj: ", _fmt_terms(list(model.objective.items())))
    lines.append("Subject To")
    for c in model.constraints:
        lines += _wrap(f" {c.name}: ", _fmt_terms(c.terms) or ["0 " + next(iter(model.variables))],
                       f"{c.sense} {c.rhs}")
    bounds = [v for v in model.variables.values() if v.kind == "integer"]
    if bounds:
        lines.append("Bounds")
        lines += [f" {v.lb} <= {v.name} <= {v.ub}" for v in bounds]
    binaries = [v.name for v in model.variables.values() if v.kind == "binary"]
    if binaries:
        lines.append("Binaries")
        lines += _wrap(" ", binaries)
    generals = [v.name for v in bounds]
    if generals:
        lines.append("Generals")
        lines += _wrap(" ", generals)
    lines.append("End")
    return "\n".join(lines) + "\n"


def read_assignment(text: str) -> Dict[str, float]:
    """Parse ``name value`` lines; ``#`` comments and blank lines are skipped."""
    values: Dict[str, float] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, val = line.split()[:2]
        f = float(val)
        values[name] = int(round(f)) if abs(f - round(f)) < 1e-6 else f
    return values


def write_assignment(values: Mapping[str, float]) -> str:
    return "".join(f"{k} {v}\n" for k, v in values.items())


def decode_solution(model: IpModel, values: Mapping[str, float], check: bool = True) -> TopoPathSet:
    """Recover each robot's path by following its positive arc variables."""
    if check:
        bad = evaluate(model, values)
        if bad:
            raise InfeasibleAssignment(bad)
    topo = model.topo
    out = {}
    for r in model.mapped.robots:
        if r.stationary:
            out[r.id] = [r.start]
            continue
        used = {(a, b) for (rid, a, b), n in model.x.items() if rid == r.id and values.get(n, 0) > 0.5}
        path = [r.start]
        seen = {r.start}
        while path[-1] != r.goal:
            nxt = [b for (a, b) in used if a == path[-1]]
            if len(nxt) != 1:
                raise BrokenFlow(f"robot {r.id}: {len(nxt)} positive arcs leave {topo.label(path[-1])}")
            if nxt[0] in seen:
                raise CycleDetected(f"robot {r.id}: revisits {topo.label(nxt[0])}")
            seen.add(nxt[0])
            path.append(nxt[0])
        if len(used) != len(path) - 1:
            raise CycleDetected(f"robot {r.id}: positive arcs off the path (subtour)")
        out[r.id] = path
    return TopoPathSet(out)


def encode_warmstart(model: IpModel, paths: TopoPathSet) -> Dict[str, int]:
    """Full variable assignment corresponding to a one-way-consistent path set."""
    topo = model.topo
    directions = paths.directions(topo)  # raises OneWayViolation
    values = {n: 0 for n in model.variables}
    costs = {}
    for r in model.robots:
        p = paths[r.id]
        if p[0] != r.start or p[-1] != r.goal:
            raise ValueError(f"robot {r.id}: path does not join its endpoints")
        for a, b in zip(p, p[1:]):
            values[model.x[(r.id, a, b)]] = 1
        order = {v: k for k, v in enumerate(p)}
        for (rid, v), name in model.u.items():
            if rid == r.id:
                values[name] = MTZ_LOW - 1 + order[v] if v in order else MTZ_LOW
        costs[r.id] = topo.path_cost(p)
    for pid, name in model.z.items():
        values[name] = 1 if directions.get(pid, FORWARD) != FORWARD else 0
    if model.objective_kind == MAX and model.robots:
        for rid, c in costs.items():
            values[f"xmax_r{rid}"] = c
        values["Xmax"] = max(costs.values())
    if model.congestion and model.robots:
        counts = {}
        for r in model.robots:
            p = paths[r.id]
            for v in p[:-1]:
                name = f"P_r{r.id}_{topo.label(v)}"
                if name in values:
                    values[name] = 1
                    counts[v] = counts.get(v, 0) + 1
        values["Cmax"] = max(counts.values(), default=0)
    return values


def direction_values(model: IpModel, values: Mapping[str, float]) -> Dict[int, Optional[int]]:
    """Direction of every passage as observed by the evaluator (no variable needed).

    Per robot direction is 0 (unused), 1 or 3; the passage direction is the
    maximum over robots. Returns None for a passage used both ways.
    """
    topo = model.topo
    out = {}
    for pid, p in topo.passages.items():
        dirs = set()
        for r in model.robots:
            fwd, bwd = _direction_arcs(topo, p, r)
            d = 0
            if any(values.get(model.x[(r.id, a, b)], 0) > 0.5 for a, b in fwd):
                d = 1
            if any(values.get(model.x[(r.id, a, b)], 0) > 0.5 for a, b in bwd):
                d = 3
            dirs.add(d)
        D = max(dirs, default=0)
        out[pid] = None if any(D - d == 2 for d in dirs) else D
    return out

