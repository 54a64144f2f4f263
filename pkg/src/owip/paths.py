from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Set, Tuple

from .topo import FORWARD, TopoMap

TOTAL = "total"
MAX = "max"


class OneWayViolation(ValueError):
    pass


def aggregate(costs: Sequence[int], kind: str) -> int:
    if kind == TOTAL:
        return sum(costs)
    if kind == MAX:
        return max(costs, default=0)
    raise ValueError(f"unknown objective {kind!r}")


@dataclass
class TopoPathSet:
    """Per-robot vertex sequences on the topo map, keyed by robot id."""

    paths: Dict[int, List[int]] = field(default_factory=dict)

    def __getitem__(self, rid: int) -> List[int]:
        return self.paths[rid]

    def __len__(self):
        return len(self.paths)

    def __eq__(self, other):
        if not isinstance(other, TopoPathSet):
            return NotImplemented
        return {k: list(v) for k, v in self.paths.items()} == {k: list(v) for k, v in other.paths.items()}

    def costs(self, topo: TopoMap) -> Dict[int, int]:
        return {rid: topo.path_cost(p) for rid, p in self.paths.items()}

    def objective(self, topo: TopoMap, kind: str) -> int:
        return aggregate(list(self.costs(topo).values()), kind)

    def passage_usage(self, topo: TopoMap) -> Dict[int, Dict[int, Set[int]]]:
        """passage id -> sign -> robots travelling it that way."""
        use: Dict[int, Dict[int, Set[int]]] = {}
        for rid, p in self.paths.items():
            for a, b in zip(p, p[1:]):
                arc = topo.arc_info[(a, b)]
                use.setdefault(arc.passage, {}).setdefault(arc.sign, set()).add(rid)
        return use

    def directions(self, topo: TopoMap) -> Dict[int, int]:
        """Direction of every used passage; raises on opposite traversals."""
        out = {}
        for pid, signs in self.passage_usage(topo).items():
            if len(signs) > 1:
                raise OneWayViolation(
                    f"passage {pid} used both ways by robots "
                    f"{sorted(signs[FORWARD])} and {sorted(signs[-FORWARD])}"
                )
            out[pid] = next(iter(signs))
        return out

    def is_simple(self, rid: int) -> bool:
        p = self.paths[rid]
        return len(set(p)) == len(p)

    def is_continuous(self, topo: TopoMap, rid: int) -> bool:
        p = self.paths[rid]
        return all((a, b) in topo.arc_info for a, b in zip(p, p[1:]))


def congestion(topo: TopoMap, paths: TopoPathSet) -> int:
    """Largest number of robots leaving through any single crossing."""
    counts: Dict[int, int] = {}
    crossing = set(topo.crossings)
    for p in paths.paths.values():
        for v in p[:-1]:
            if v in crossing:
                counts[v] = counts.get(v, 0) + 1
    return max(counts.values(), default=0)


def dump_warmstart(topo: TopoMap, paths: TopoPathSet, directions: Mapping[int, int]) -> str:
    """Text dump: one ``robot <id>: <labels>`` line per robot, one ``passage`` line per direction."""
    lines = ["# warm start"]
    for rid in sorted(paths.paths):
        lines.append(f"robot {rid}: " + " ".join(topo.label(v) for v in paths.paths[rid]))
    for pid in sorted(directions):
        d = directions[pid]
        lines.append(f"passage {pid}: {'AtoB' if d == FORWARD else 'BtoA' if d else 'free'}")
    return "\n".join(lines) + "\n"


def parse_warmstart(topo: TopoMap, text: str) -> Tuple[TopoPathSet, Dict[int, int]]:
    paths: Dict[int, List[int]] = {}
    dirs: Dict[int, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, _, body = line.partition(":")
        kind, key = head.split()
        if kind == "robot":
            paths[int(key)] = [topo.by_label[t] for t in body.split()]
        elif kind == "passage":
            dirs[int(key)] = {"AtoB": 1, "BtoA": -1, "free": 0}[body.strip()]
        else:
            raise ValueError(f"bad warm-start line: {line!r}")
    return TopoPathSet(paths), dirs
