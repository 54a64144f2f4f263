from __future__ import annotations

from typing import Mapping, Optional

from .grid import GridMap
from .projection import ProjectedPlan
from .topo import CROSSING, TopoMap

CELL = 20
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _center(cell):
    i, j = cell
    return (j - 0.5) * CELL, (i - 0.5) * CELL


def render_svg(
    grid: GridMap,
    plan: Optional[ProjectedPlan] = None,
    directions: Optional[Mapping[int, int]] = None,
    topo: Optional[TopoMap] = None,
) -> str:
    """Shelves, topo vertices, one arrow per oriented topo edge and one polyline per robot."""
    w, h = grid.w * CELL, grid.h * CELL
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" '
        'markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="black"/></marker></defs>',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#f7f7f7"/>',
    ]
    sh, sw = grid.shelf_size
    for r0 in grid.h_rows[:-1]:
        for c0 in grid.v_cols[:-1]:
            out.append(
                f'<rect class="shelf" x="{c0 * CELL}" y="{r0 * CELL}" width="{sw * CELL}" '
                f'height="{sh * CELL}" fill="#9e9e9e"/>'
            )
    if topo is None and directions:
        from .topo import extract_topo

        topo = extract_topo(grid)
    if topo is not None:
        for v, c in enumerate(topo.cells):
            x, y = _center(c)
            color = "#f48fb1" if topo.kinds[v] == CROSSING else "#81c784"
            out.append(f'<circle class="{topo.kinds[v]}" cx="{x}" cy="{y}" r="{CELL * 0.3}" fill="{color}"/>')
    if directions and topo is not None:
        for pid in sorted(topo.passages):
            d = directions.get(pid, 0)
            if not d:
                continue
            for a, b in topo.passages[pid].arcs(d):
                (x1, y1), (x2, y2) = _center(topo.cells[a]), _center(topo.cells[b])
                if (x1, y1) == (x2, y2):
                    continue
                out.append(
                    f'<line class="arrow" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" '
                    f'stroke-width="1.5" marker-end="url(#arrow)"/>'
                )
    if plan is not None:
        for k, rid in enumerate(sorted(plan.paths)):
            cells = plan.paths[rid]
            color = PALETTE[k % len(PALETTE)]
            pts = " ".join("{:g},{:g}".format(*_center(c)) for c in cells)
            out.append(
                f'<polyline class="robot" data-robot="{rid}" points="{pts}" fill="none" '
                f'stroke="{color}" stroke-width="3" stroke-opacity="0.8"/>'
            )
            if cells:
                sx, sy = _center(cells[0])
                gx, gy = _center(cells[-1])
                out.append(f'<circle cx="{sx}" cy="{sy}" r="{CELL * 0.2}" fill="{color}"/>')
                out.append(
                    f'<rect x="{gx - CELL * 0.2}" y="{gy - CELL * 0.2}" width="{CELL * 0.4}" '
                    f'height="{CELL * 0.4}" fill="{color}"/>'
                )
    out.append("</svg>")
    return "\n".join(out) + "\n"
