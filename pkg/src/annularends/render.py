"""Static SVG rendering of a traced level-set complex.

Output is a pure function of its input: coordinates are printed with a
fixed number of decimals and elements are emitted in arc/node order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .levelset import EndpointTag, LevelSetComplex, default_schedule
from .annulus import AnnulusDomain


@dataclass(frozen=True)
class SvgStyle:
    size: int = 512
    radial: str = "log"  # "log": radius drawn affinely in log r; "plane": true positions
    arc_color: str = "#1f4e79"
    loop_color: str = "#2e7d32"
    node_color: str = "#c62828"
    arrow_color: str = "#e65100"
    stroke: float = 1.2


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Frame:
    def __init__(self, cx: LevelSetComplex, style: SvgStyle):
        self.style = style
        self.half = style.size / 2
        self.rad = 0.45 * style.size
        g = cx.grid
        self.lo, self.hi = np.log(g.r_min), np.log(g.r_max)
        self.r_max = g.r_max
        # in log mode the innermost grid circle sits at 12% of the outline radius
        self.inner_frac = 0.12

    def radius(self, r):
        r = np.asarray(r, float)
        if self.style.radial == "plane":
            return self.rad * r / self.r_max
        t = (np.log(r) - self.lo) / (self.hi - self.lo)
        return self.rad * (self.inner_frac + (1 - self.inner_frac) * t)

    def xy(self, z):
        z = np.asarray(z, complex)
        rho = self.radius(np.abs(z))
        ang = np.angle(z)
        return self.half + rho * np.cos(ang), self.half - rho * np.sin(ang)


def render_svg(cx: LevelSetComplex, domain: AnnulusDomain | None = None, style: SvgStyle | None = None,
               schedule=None) -> str:
    """Annulus outline, arcs as polylines, node markers and inward end arrows."""
    style = style or SvgStyle()
    fr = _Frame(cx, style)
    s = style.size
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">',
        '<desc>format_version 1</desc>',
        f'<defs><marker id="end" viewBox="0 0 10 10" refX="5" refY="5" markerWidth="6" markerHeight="6" '
        f'orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="{style.arrow_color}"/></marker></defs>',
        f'<rect width="{s}" height="{s}" fill="white"/>',
    ]
    c = _fmt(fr.half)
    out.append(f'<circle class="outline" cx="{c}" cy="{c}" r="{_fmt(fr.radius(cx.grid.r_max))}" '
               f'fill="none" stroke="black" stroke-width="1"/>')
    out.append(f'<circle class="outline" cx="{c}" cy="{c}" r="{_fmt(fr.radius(cx.grid.r_min))}" '
               f'fill="none" stroke="black" stroke-width="1" stroke-dasharray="4 3"/>')
    if domain is not None:
        sched = default_schedule(cx.grid, domain) if schedule is None else np.asarray(schedule)
        inner = float(np.min(sched))
    else:
        inner = cx.grid.r_min
    for arc in cx.arcs:
        x, y = fr.xy(arc.points)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))
        color = style.loop_color if arc.closed else style.arc_color
        tag = "polygon" if arc.closed else "polyline"
        out.append(f'<{tag} class="arc" data-arc="{arc.id}" points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="{style.stroke}"/>')
    arrows = 0
    for arc in cx.arcs:
        for germ in arc.inner_germs():
            z = arc.points[germ]
            r = np.abs(z)
            k = int(np.argmin(np.abs(np.log(r) - np.log(max(inner, r.min())))))
            k = max(k, 1)
            a, b = z[k], z[k - 1]
            (x0, x1), (y0, y1) = fr.xy(np.array([a, b]))
            out.append(f'<line class="end" x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                       f'stroke="{style.arrow_color}" stroke-width="{style.stroke}" marker-end="url(#end)"/>')
            arrows += 1
    for node in cx.nodes:
        x, y = fr.xy(np.array([node.z]))
        out.append(f'<circle class="node" cx="{_fmt(x[0])}" cy="{_fmt(y[0])}" r="3" fill="{style.node_color}"/>')
    out.append(f'<text x="8" y="{s - 8}" font-family="monospace" font-size="11">level {cx.level:.6g}, '
               f'{len(cx.arcs)} arcs, {arrows} ends</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
