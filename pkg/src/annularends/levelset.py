"""Level sets of harmonic functions on annular ends.

Level sets are extracted by marching squares on the log-polar grid with
periodic stitching in ``theta``; segments are chained into arcs whose
endpoints are tagged by where they stop (outer circle, inner limit, a
crossing node, or nowhere for closed loops).  The end count, end limit
points and angular limits are built on top of the traced complex.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .annulus import AnnulusDomain, PolarGrid
from .errors import (
    CriticalLevel,
    DomainError,
    PreconditionError,
    ResolutionError,
    UndeterminedEnd,
)
from .harmonic import ClosedFormField, HarmonicField, SampledField, value_scale

F_TOL = 1e-9
G_TOL = 1e-6
ANGLE_TOL = 1e-2
LIMIT_TOL = 1e-6
SCHEDULE_SIZE = 12


class EndpointTag(str, Enum):
    OUTER_BOUNDARY = "OuterBoundary"
    CROSSING_NODE = "CrossingNode"
    INNER_LIMIT = "InnerLimit"
    CLOSED_LOOP = "ClosedLoop"


@dataclass(eq=False)
class Arc:
    """Polyline piece of a level set.

    ``s`` and ``theta`` are the conformal coordinates of the vertices with
    ``theta`` unrolled (continuous along the arc); ``points`` are the
    corresponding complex positions.  Open arcs with exactly one inner end
    are oriented so that the inner end comes last.
    """

    id: int
    s: np.ndarray
    theta: np.ndarray
    start_tag: EndpointTag
    end_tag: EndpointTag
    start_node: int | None = None
    end_node: int | None = None

    @property
    def points(self) -> np.ndarray:
        return np.exp(self.s + 1j * self.theta)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.s)

    @property
    def closed(self) -> bool:
        return self.start_tag is EndpointTag.CLOSED_LOOP

    @property
    def n_vertices(self) -> int:
        return self.s.size

    def winding_number(self) -> int:
        """Turns around ``z = 0``; meaningful for closed loops."""
        if not self.closed:
            return 0
        total = self.theta[-1] - self.theta[0]
        closing = np.angle(np.exp(1j * (self.theta[0] - self.theta[-1])))
        return int(np.rint((total + closing) / (2 * np.pi)))

    def inner_germs(self) -> list[np.ndarray]:
        """Vertex index sequences walking away from each inner-limit endpoint."""
        idx = np.arange(self.n_vertices)
        germs = []
        if self.end_tag is EndpointTag.INNER_LIMIT:
            germs.append(idx[::-1])
        if self.start_tag is EndpointTag.INNER_LIMIT:
            germs.append(idx)
        return germs

    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.points))))


@dataclass(eq=False)
class CrossingNode:
    id: int
    z: complex
    incident: list[int] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return len(self.incident)


@dataclass(eq=False)
class LevelSetComplex:
    level: float
    arcs: list[Arc]
    nodes: list[CrossingNode]
    grid: PolarGrid
    components: list[list[int]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def arc(self, arc_id: int) -> Arc:
        return self.arcs[arc_id]

    @property
    def closed_loops(self) -> list[Arc]:
        return [a for a in self.arcs if a.closed]

    @property
    def open_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if not a.closed]

    def end_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.inner_germs()]

    def summary(self) -> dict:
        tags = {}
        for a in self.arcs:
            key = f"{a.start_tag.value}-{a.end_tag.value}"
            tags[key] = tags.get(key, 0) + 1
        return {
            "level": self.level,
            "arcs": len(self.arcs),
            "closed_loops": len(self.closed_loops),
            "crossing_nodes": len(self.nodes),
            "node_degrees": [n.degree for n in self.nodes],
            "arc_kinds": dict(sorted(tags.items())),
            "components": len(self.components),
        }


@dataclass(frozen=True)
class EndDescriptor:
    arc_id: int
    verdict: str  # "PunctureLimit" | "InnerPointLimit" | "NonConvergent"
    limit_point: complex | None
    radii_visited: tuple[float, ...]
    angles: tuple[float, ...]

    def to_dict(self) -> dict:
        xi = self.limit_point
        return {
            "arc_id": self.arc_id,
            "verdict": self.verdict,
            "limit_point": None if xi is None else [xi.real, xi.imag],
            "radii_visited": list(self.radii_visited),
            "angles": list(self.angles),
        }


@dataclass(frozen=True)
class AngularSector:
    """Sector at ``center`` on the inner circle, opening outward along the radius."""

    center: complex
    half_angle: float
    radius: float

    def __post_init__(self):
        if not 0 < self.half_angle < np.pi / 2:
            raise DomainError("half angle must lie in (0, pi/2)")
        if self.radius <= 0:
            raise DomainError("sector radius must be positive")

    def points(self, rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
        u = self.center / abs(self.center)
        return self.center + rho * u * np.exp(1j * phi)


@dataclass(frozen=True)
class AngularLimit:
    value: float | None
    oscillations: tuple[float, ...]
    means: tuple[float, ...]

    @property
    def divergent(self) -> bool:
        return self.value is None


def default_schedule(grid: PolarGrid, domain: AnnulusDomain, size: int = SCHEDULE_SIZE) -> np.ndarray:
    """Geometric radii decreasing toward the inner edge of the grid.

    For a punctured domain: ``r_min^{1/4}`` down to ``r_min``; otherwise the
    same law applied to the gap ``r - R``.
    """
    R = domain.inner_radius
    d_min = grid.r_min - R
    d_max = min(d_min**0.25, 0.5 * (grid.r_max - R)) if R > 0 else d_min**0.25
    d_max = max(d_max, d_min)
    return R + np.geomspace(d_max, d_min, size)


def _critical_points(field: HarmonicField, grid: PolarGrid) -> np.ndarray:
    if isinstance(field, ClosedFormField):
        p = field.critical_points()
        r = np.abs(p)
        return p[(r >= grid.r_min) & (r <= grid.r_max)]
    return np.zeros(0, complex)


def _cell_of(grid: PolarGrid, z: complex) -> tuple[int, int]:
    i = int(np.clip(np.floor((np.log(abs(z)) - np.log(grid.r_min)) / grid.h_s), 0, grid.n_radial - 2))
    j = int(np.floor(np.mod(np.angle(z), 2 * np.pi) / grid.h_theta)) % grid.n_angular
    return i, j


def trace_level(
    field: HarmonicField,
    t: float,
    grid: PolarGrid,
    *,
    f_tol: float | None = None,
    g_tol: float | None = None,
    values: np.ndarray | None = None,
) -> LevelSetComplex:
    """Extract the 1-complex ``{f = t}`` on ``grid``.

    Saddle cells are disambiguated by the sign of ``f - t`` at the cell
    centre.  Critical points of ``f`` lying on the level are collapsed into
    crossing nodes; a ``CriticalLevel`` warning is attached in that case.

    Raises
    ------
    ResolutionError
        If two arcs share a cell away from any critical point.
    """
    if not np.isfinite(t):
        raise ValueError("level must be finite")
    scale = value_scale(field)
    f_tol = F_TOL * scale if f_tol is None else f_tol
    g_tol = G_TOL * scale if g_tol is None else g_tol
    NR, NA = grid.n_radial, grid.n_angular
    V = (field.grid_values(grid) if values is None else np.asarray(values, float)) - t
    if not np.all(np.isfinite(V)):
        raise DomainError("field is not finite on the grid")
    s_nodes = grid.log_radii
    hs, ht = grid.h_s, grid.h_theta
    P = V >= 0
    notes: list[str] = []

    crit = _critical_points(field, grid)
    node_points: list[complex] = []
    blocked = np.zeros((NR - 1, NA), bool)
    near_crit = np.zeros((NR - 1, NA), bool)
    for p in crit:
        i, j = _cell_of(grid, p)
        rows = slice(max(i - 2, 0), min(i + 3, NR - 1))
        cols = [(j + dj) % NA for dj in range(-2, 3)]
        near_crit[rows, cols] = True
        fp = float(field(p))
        if abs(fp - t) < f_tol:
            rows = slice(max(i - 1, 0), min(i + 2, NR - 1))
            cols = [(j + dj) % NA for dj in (-1, 0, 1)]
            blocked[rows, cols] = True
            node_points.append(complex(p))
            msg = f"level {t} within f_tol of critical value {fp} at z={complex(p):.6g}"
            notes.append(msg)
            warnings.warn(msg, CriticalLevel, stacklevel=2)
        elif abs(fp - t) < 1e3 * f_tol:
            notes.append(f"level {t} near critical value {fp}")

    # vertex ids: angular edge (i,j)-(i,j+1) -> i*NA+j ; radial edge (i,j)-(i+1,j) -> NR*NA + i*NA+j
    def vert_ang(i, j):
        return i * NA + j

    def vert_rad(i, j):
        return NR * NA + i * NA + j

    Vn = np.roll(V, -1, axis=1)
    ang_cross = P != np.roll(P, -1, axis=1)
    rad_cross = P[:-1] != P[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ang_frac = np.where(ang_cross, V / (V - Vn), 0.0)
        rad_frac = np.where(rad_cross, V[:-1] / (V[:-1] - V[1:]), 0.0)

    pa, pb = P[:-1], np.roll(P, -1, axis=1)[:-1]
    pc, pd = np.roll(P, -1, axis=1)[1:], P[1:]
    code = pa.astype(np.int8) + 2 * pb + 4 * pc + 8 * pd
    active = (code != 0) & (code != 15) & ~blocked
    ci, cj = np.nonzero(active)
    saddle = (code[ci, cj] == 5) | (code[ci, cj] == 10)
    if np.any(saddle):
        si, sj = ci[saddle], cj[saddle]
        unexplained = ~near_crit[si, sj]
        if isinstance(field, ClosedFormField) and np.any(unexplained):
            k = int(np.flatnonzero(unexplained)[0])
            z = np.exp(s_nodes[si[k]] + 1j * sj[k] * ht)
            raise ResolutionError(f"two level arcs share cell ({si[k]}, {sj[k]}) near z={z:.6g}; refine the grid")
        centers = np.exp(s_nodes[si] + 0.5 * hs + 1j * (sj + 0.5) * ht)
        center_pos = np.asarray(field(centers), float) - t >= 0
        if not isinstance(field, ClosedFormField):
            notes.append(f"{int(saddle.sum())} saddle cells disambiguated")
    else:
        center_pos = np.zeros(0, bool)
    center_lookup = {}
    if saddle.any():
        for (i, j), cp in zip(zip(ci[saddle].tolist(), cj[saddle].tolist()), center_pos.tolist()):
            center_lookup[(i, j)] = cp

    adjacency: dict[int, list[int]] = {}

    def link(u, v):
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)

    for i, j in zip(ci.tolist(), cj.tolist()):
        j1 = (j + 1) % NA
        bottom, top = vert_ang(i, j), vert_ang(i + 1, j)
        left, right = vert_rad(i, j), vert_rad(i, j1)
        edges = []
        if pa[i, j] != pb[i, j]:
            edges.append(bottom)
        if pb[i, j] != pc[i, j]:
            edges.append(right)
        if pd[i, j] != pc[i, j]:
            edges.append(top)
        if pa[i, j] != pd[i, j]:
            edges.append(left)
        if len(edges) == 2:
            link(*edges)
        else:
            if center_lookup[(i, j)] == bool(pa[i, j]):
                link(bottom, right)
                link(top, left)
            else:
                link(left, bottom)
                link(right, top)

    # vertex positions in (s, theta) with theta in [0, 2 pi)
    def position(v):
        if v < NR * NA:
            i, j = divmod(v, NA)
            return s_nodes[i], (j + ang_frac[i, j]) * ht
        i, j = divmod(v - NR * NA, NA)
        return s_nodes[i] + rad_frac[i, j] * hs, j * ht

    def boundary_tag(v):
        if v < NR * NA:
            i = v // NA
            if i == 0:
                return EndpointTag.INNER_LIMIT
            if i == NR - 1:
                return EndpointTag.OUTER_BOUNDARY
        return EndpointTag.CROSSING_NODE

    node_objs = [CrossingNode(k, p) for k, p in enumerate(node_points)]

    def nearest_node(s, th):
        z = np.exp(s + 1j * th)
        d = [abs(z - n.z) for n in node_objs]
        return int(np.argmin(d))

    arcs: list[Arc] = []
    visited: set[int] = set()

    def walk(start):
        seq = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [w for w in adjacency[cur] if w != prev]
            if not nxt or (len(adjacency[cur]) == 1 and prev is not None):
                break
            w = nxt[0]
            if w == start:
                return seq, True
            if w in visited:
                break
            seq.append(w)
            visited.add(w)
            prev, cur = cur, w
        return seq, False

    def build_arc(seq, closed):
        pos = np.array([position(v) for v in seq], float)
        s = pos[:, 0]
        th = np.unwrap(pos[:, 1])
        if closed:
            return Arc(len(arcs), s, th, EndpointTag.CLOSED_LOOP, EndpointTag.CLOSED_LOOP)
        tags = [boundary_tag(seq[0]), boundary_tag(seq[-1])]
        nodes = [None, None]
        for k in (0, 1):
            if tags[k] is EndpointTag.CROSSING_NODE:
                if not node_objs:
                    raise ResolutionError("arc terminates inside the grid without a detected critical point")
                nodes[k] = nearest_node(s[-k], th[-k])
        if nodes[0] is not None:
            zn = node_objs[nodes[0]].z
            th0 = th[0] + np.angle(zn / np.exp(s[0] + 1j * th[0]))
            s = np.concatenate([[np.log(abs(zn))], s])
            th = np.concatenate([[th0], th])
        if nodes[1] is not None:
            zn = node_objs[nodes[1]].z
            th1 = th[-1] + np.angle(zn / np.exp(s[-1] + 1j * th[-1]))
            s = np.concatenate([s, [np.log(abs(zn))]])
            th = np.concatenate([th, [th1]])
        if tags[0] is EndpointTag.INNER_LIMIT and tags[1] is not EndpointTag.INNER_LIMIT:
            s, th = s[::-1], th[::-1]
            tags, nodes = tags[::-1], nodes[::-1]
        th = th - 2 * np.pi * np.floor(th[0] / (2 * np.pi))
        return Arc(len(arcs), s.copy(), th.copy(), tags[0], tags[1], nodes[0], nodes[1])

    ends = sorted(v for v, nb in adjacency.items() if len(nb) == 1)
    for v in ends:
        if v in visited:
            continue
        seq, _ = walk(v)
        arcs.append(build_arc(seq, False))
    for v in sorted(adjacency):
        if v in visited:
            continue
        seq, closed = walk(v)
        arcs.append(build_arc(seq, closed))

    for a in arcs:
        for nid in (a.start_node, a.end_node):
            if nid is not None:
                node_objs[nid].incident.append(a.id)
    for n in node_objs:
        if n.degree < 4 or n.degree % 2:
            notes.append(f"crossing node {n.id} has odd or low degree {n.degree}")

    return LevelSetComplex(float(t), arcs, node_objs, grid, _components(arcs, node_objs), notes)


def _components(arcs: list[Arc], nodes: list[CrossingNode]) -> list[list[int]]:
    parent = list(range(len(arcs)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for n in nodes:
        for a, b in zip(n.incident, n.incident[1:]):
            parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for a in arcs:
        groups.setdefault(find(a.id), []).append(a.id)
    return sorted(groups.values())


def count_ends(complex_: LevelSetComplex, domain: AnnulusDomain, schedule=None) -> int:
    """Number of end germs of the complex escaping toward the inner boundary.

    A germ starts at an inner-limit endpoint.  It is counted when its arc
    crosses every circle of ``schedule``; an arc that returns to the inner
    limit at both ends is two germs whether or not it reaches the
    outermost circle, as long as it crosses the second-innermost one.

    Raises
    ------
    UndeterminedEnd
        For a germ that stalls inside the schedule at a crossing node or
        never leaves the innermost band.
    """
    sched = np.sort(np.asarray(default_schedule(complex_.grid, domain) if schedule is None else schedule))[::-1]
    if sched.size < 4:
        raise PreconditionError("end-count schedule needs at least 4 radii")
    outer, second = sched[0], sched[-2]
    count = 0
    for arc in complex_.arcs:
        for germ in arc.inner_germs():
            reach = float(np.max(arc.radii[germ]))
            if reach >= outer:
                count += 1
                continue
            both_inner = arc.start_tag is EndpointTag.INNER_LIMIT and arc.end_tag is EndpointTag.INNER_LIMIT
            if both_inner and reach >= second:
                count += 1
                continue
            crossed = int(np.sum(sched <= reach))
            raise UndeterminedEnd(arc.id, f"crosses {crossed} of {sched.size} schedule circles "
                                          f"then ends at {arc.start_tag.value}/{arc.end_tag.value}")
    return count


def circle_crossings(field: HarmonicField, t: float, r: float, n: int = 4096) -> int:
    """Sign changes of ``f - t`` around ``|z| = r``."""
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    p = np.asarray(field(z), float) - t >= 0
    return int(np.count_nonzero(p != np.roll(p, 1)))


def _arc_angle_at_radius(arc: Arc, germ: np.ndarray, r: float) -> float | None:
    """Unrolled angle where the germ (walked from its inner end) last leaves radius ``r``."""
    rad = arc.radii[germ]
    th = arc.theta[germ]
    above = rad >= r
    if not above.any():
        return None
    k = int(np.argmax(above))
    if k == 0:
        return float(th[0])
    r0, r1 = rad[k - 1], rad[k]
    w = (np.log(r) - np.log(r0)) / (np.log(r1) - np.log(r0))
    return float(th[k - 1] + w * (th[k] - th[k - 1]))


def _refine_root(field: HarmonicField, t: float, r: float, guess: float, width: float) -> float | None:
    phi = guess + np.linspace(-width, width, 257)
    v = np.asarray(field(r * np.exp(1j * phi)), float) - t
    sgn = np.sign(v)
    idx = np.flatnonzero(sgn[:-1] * sgn[1:] <= 0)
    if idx.size == 0:
        return None
    k = idx[np.argmin(np.abs(phi[idx] - guess))]
    a, b = phi[k], phi[k + 1]
    fa = v[k]
    for _ in range(60):
        m = 0.5 * (a + b)
        fm = float(field(r * np.exp(1j * m))) - t
        if fm == 0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def limit_schedule(r_min: float, domain: AnnulusDomain, depth: float = 1e-10, size: int = 16) -> np.ndarray:
    """Schedule for limit-point tracking; continues below the grid down to ``R + depth``."""
    R = domain.inner_radius
    gap = r_min - R
    top = max(min(gap**0.25, 0.5 * (1 - R)), gap)
    return R + np.geomspace(top, min(depth, gap), size)


def end_limit_point(field: HarmonicField, arc: Arc, schedule=None, t: float | None = None,
                    *, angle_tol: float = ANGLE_TOL, tail: int = 4) -> EndDescriptor:
    """Follow an end germ through the schedule and decide whether it converges.

    The angle of the level arc is located on every schedule circle (grid
    polyline first, then bracketed root refinement of ``f = t`` on the
    circle, continuing below the grid where needed).
    """
    domain = field.domain
    if schedule is None:
        schedule = limit_schedule(float(arc.radii.min()), domain)
    sched = np.sort(np.asarray(schedule, float))[::-1]
    germs = arc.inner_germs()
    if not germs:
        raise PreconditionError(f"arc {arc.id} has no inner-limit end")
    if domain.punctured:
        return EndDescriptor(arc.id, "PunctureLimit", None, tuple(sched.tolist()), ())
    if t is None:
        t = float(np.median(field(arc.points)))
    germ = germs[0]
    angles: list[float] = []
    for r in sched:
        guess = _arc_angle_at_radius(arc, germ, r) if r >= arc.radii[germ].min() else None
        if guess is None:
            if len(angles) >= 2:
                guess = angles[-1] + (angles[-1] - angles[-2])
                width = max(4 * abs(angles[-1] - angles[-2]), 1e-6)
            elif angles:
                guess, width = angles[-1], 0.1
            else:
                break
        else:
            width = 0.1
        root = _refine_root(field, t, r, guess, min(width, np.pi / 2))
        if root is None:
            break
        angles.append(root)
    visited = tuple(sched[: len(angles)].tolist())
    if len(angles) < max(tail, 4):
        return EndDescriptor(arc.id, "NonConvergent", None, visited, tuple(angles))
    last = np.array(angles[-tail:])
    if np.ptp(last) < angle_tol:
        xi = domain.inner_radius * np.exp(1j * last[-1])
        return EndDescriptor(arc.id, "InnerPointLimit", complex(xi), visited, tuple(angles))
    return EndDescriptor(arc.id, "NonConvergent", None, visited, tuple(angles))


def angular_limit(field: HarmonicField, sector: AngularSector, depth: int = 40,
                  *, limit_tol: float | None = None) -> AngularLimit:
    """Estimate the limit of ``f`` at ``sector.center`` from inside the sector.

    Generation ``g`` samples a small triangular patch of the sector at
    distances ``[rho/2^{g+1}, rho/2^g]`` from the vertex.  The limit exists
    when the last generation's oscillation is below ``limit_tol`` and the
    last two generation means agree to the same tolerance.
    """
    R = field.domain.inner_radius
    if R <= 0:
        raise PreconditionError("angular limits are defined on A(R,1) with R > 0")
    if abs(abs(sector.center) - R) > 1e-12 * max(R, 1):
        raise DomainError("sector centre must lie on the inner boundary circle")
    if sector.radius >= 1 - R:
        raise DomainError("sector radius must be below 1 - R")
    if depth < 3:
        raise PreconditionError("need at least 3 generations")
    limit_tol = LIMIT_TOL * value_scale(field) if limit_tol is None else limit_tol
    oscillations, means = [], []
    for g in range(depth):
        hi = sector.radius * 2.0**-g
        rows = np.linspace(hi, hi / 2, 4)
        pts = []
        for k, rho in enumerate(rows):
            phi = np.linspace(-sector.half_angle, sector.half_angle, 2 * k + 3)[1:-1] if k else np.zeros(1)
            pts.append(sector.points(rho, phi))
        z = np.concatenate(pts)
        with np.errstate(all="ignore"):
            v = np.asarray(field(z), float)
        if not np.all(np.isfinite(v)):
            return AngularLimit(None, tuple(oscillations), tuple(means))
        oscillations.append(float(np.ptp(v)))
        means.append(float(np.mean(v)))
    if oscillations[-1] < limit_tol and abs(means[-1] - means[-2]) < limit_tol:
        return AngularLimit(means[-1], tuple(oscillations), tuple(means))
    return AngularLimit(None, tuple(oscillations), tuple(means))


def check_no_compact_bounding(complex_: LevelSetComplex) -> bool:
    """True when every closed loop winds around the hole."""
    return not null_homotopic_loops(complex_)


def null_homotopic_loops(complex_: LevelSetComplex) -> list[int]:
    """Ids of closed loops with zero winding number (numerical artifacts)."""
    return [a.id for a in complex_.closed_loops if a.winding_number() == 0]


def arcs_to_csv(complex_: LevelSetComplex) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["arc_id", "vertex_index", "re", "im", "r", "theta"])
    for a in complex_.arcs:
        z = a.points
        for k in range(a.n_vertices):
            w.writerow([a.id, k, repr(float(z[k].real)), repr(float(z[k].imag)),
                        repr(float(np.exp(a.s[k]))), repr(float(a.theta[k]))])
    return buf.getvalue()


def trace_regular_level(field: HarmonicField, t: float, grid: PolarGrid, eps: float | None = None, **kw):
    """Trace ``t``; if it is critical, retrace at ``t +- eps`` and return all three.

    Returns ``(complex_at_t, [complex_minus, complex_plus])``; the list is
    empty when ``t`` is regular.
    """
    eps = 1e-6 * value_scale(field) if eps is None else eps
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CriticalLevel)
        base = trace_level(field, t, grid, **kw)
    if not base.nodes:
        return base, []
    return base, [trace_level(field, t - eps, grid, **kw), trace_level(field, t + eps, grid, **kw)]
