"""Run a scenario's analyses in order and collect a deterministic report."""

from __future__ import annotations

import datetime as _dt
import json
import math
import platform
import time
import warnings
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from . import conformal as ct
from .annulus import AnnulusDomain, PolarGrid
from .errors import AnnularEndsError, CriticalLevel, PreconditionError
from .harmonic import flux
from .levelset import (
    AngularSector,
    angular_limit,
    check_no_compact_bounding,
    count_ends,
    end_limit_point,
    null_homotopic_loops,
    trace_level,
    trace_regular_level,
)
from .meromorphic import arc_df_integral, check_end_pole_relation, classify_boundedness, empirical_bounded, pole_report
from .scenario import FORMAT_VERSION, Scenario, resolve_field
from .weierstrass import Plane, check_corollary_equivalence, immerse, plane_slice, total_curvature, vertical_flux


class InvariantViolation(AnnularEndsError):
    """An internal consistency check failed; maps to exit code 4."""


@dataclass
class RunReport:
    scenario: dict
    results: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    timestamp: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict, repr=False)  # complex, immersion: not serialized

    @property
    def nonconvergent(self) -> bool:
        return "NumericalNonconvergence" in _error_types(self.results)

    @property
    def invariant_violated(self) -> bool:
        return bool({"InvariantViolation", "InternalError"} & _error_types(self.results))

    @property
    def exit_code(self) -> int:
        if self.invariant_violated:
            return 4
        if self.nonconvergent:
            return 3
        return 0

    def to_dict(self, *, with_timestamp: bool = True) -> dict:
        doc = {
            "format_version": FORMAT_VERSION,
            "scenario": self.scenario,
            "results": self.results,
            "warnings": self.warnings,
            "versions": _versions(),
        }
        if with_timestamp:
            doc["timestamp"] = self.timestamp
        return _jsonable(doc)

    def to_json(self, *, with_timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(with_timestamp=with_timestamp), indent=2, sort_keys=True,
                          allow_nan=False) + "\n"


def _error_types(node) -> set[str]:
    """Types of every structured ``{"error": {"type": ...}}`` record, at any depth."""
    found = set()
    if isinstance(node, dict):
        err = node.get("error")
        if isinstance(err, dict) and "type" in err:
            found.add(err["type"])
        for v in node.values():
            found |= _error_types(v)
    elif isinstance(node, (list, tuple)):
        for v in node:
            found |= _error_types(v)
    return found


def _versions() -> dict:
    def ver(pkg):
        try:
            return metadata.version(pkg)
        except metadata.PackageNotFoundError:
            return None

    import numba

    return {"annularends": ver("artifact"), "numpy": np.__version__, "numba": numba.__version__,
            "python": platform.python_version()}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# ------------------------------------------------------------ analyses


class _Context:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.field, self.data = resolve_field(sc)
        self.domain: AnnulusDomain = self.field.domain
        self.complex = None
        self.mesh = None
        self._neighbours = None
        self.warnings: list[str] = []

    def params(self, name: str) -> dict:
        return dict(self.sc.params.get(name, {}))

    @property
    def tau(self) -> float:
        return float(self.sc.tolerances.get("zero_threshold", 1e-8))

    def traced(self):
        if self.complex is None:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", CriticalLevel)
                self.complex = trace_level(self.field, self.sc.level, self.sc.grid)
            for w in caught:
                if issubclass(w.category, CriticalLevel):
                    self.warnings.append(f"CriticalLevel: {w.message}")
        return self.complex

    def neighbours(self):
        """Complexes at ``t -+ eps`` when the scenario level is critical."""
        if self._neighbours is None:
            _, self._neighbours = trace_regular_level(self.field, self.sc.level, self.sc.grid)
        return self._neighbours


def _trace(ctx: _Context) -> dict:
    cx = ctx.traced()
    out = cx.summary()
    out["no_compact_bounding"] = check_no_compact_bounding(cx)
    out["null_homotopic_loops"] = null_homotopic_loops(cx)
    if cx.nodes:
        out["regular_neighbours"] = [{"level": c.level, **c.summary()} for c in ctx.neighbours()]
    return out


def _ends(ctx: _Context) -> dict:
    cx = ctx.traced()
    n = count_ends(cx, ctx.domain)
    out = {"level": ctx.sc.level, "end_count": n}
    if cx.nodes:
        out["regular_neighbours"] = [[c.level, count_ends(c, ctx.domain)] for c in ctx.neighbours()]
    if any(c % 2 for c in [n] + [m for _, m in out.get("regular_neighbours", [])]):
        raise InvariantViolation(f"odd end count {n}")
    levels = ctx.params("ends").get("levels")
    if levels and ctx.domain.punctured:
        rel = check_end_pole_relation(ctx.field, levels, ctx.sc.grid)
        if any(c % 2 for _, c in rel["counts"]):
            raise InvariantViolation("odd end count in level sweep")
        out["pole_relation"] = rel
    return out


def _pole(ctx: _Context) -> dict:
    rep = ctx.data.height_pole() if ctx.data is not None else pole_report(ctx.field, ctx.tau)
    if rep.essential_suspected:
        ctx.warnings.append(f"EssentialSuspected: agreement score {rep.agreement_score:.3e}")
    out = {"pole_report": rep.to_dict()}
    if ctx.data is not None:
        out["form"] = "dh"
    return out


def _flux(ctx: _Context) -> dict:
    R, top = ctx.domain.inner_radius, ctx.sc.grid.r_max
    radii = ctx.params("flux").get("radii") or [R + 0.3 * (top - R), R + 0.9 * (top - R)]
    values = [flux(ctx.field, float(r)).value for r in radii]
    out = {"radii": radii, "flux": values, "log_coefficient": [v / (2 * np.pi) for v in values]}
    if ctx.data is not None:
        cx = ctx.traced()
        arcs = cx.end_arcs()
        out["vertical_flux"] = [{"arc_id": a.id, **vertical_flux(ctx.data, a, grid=ctx.sc.grid).to_dict()} for a in arcs[:4]]
        if not arcs:
            out["vertical_flux_note"] = "no end arcs on the horizontal slice"
    return out


def _boundedness(ctx: _Context) -> dict:
    verdict = classify_boundedness(ctx.field, ctx.tau)
    if verdict.kind == "EssentialSuspected":
        ctx.warnings.append(f"EssentialSuspected: agreement score {verdict.score:.3e}")
    out = {"verdict": verdict.to_dict()}
    if ctx.domain.punctured:
        out["empirical_bounded"] = empirical_bounded(ctx.field)
    if verdict.kind != "EssentialSuspected":
        cx = ctx.traced()
        arcs = cx.end_arcs()
        if arcs:
            out["arc_integral"] = {"arc_id": arcs[0].id,
                                   **arc_df_integral(ctx.field, arcs[0], grid=ctx.sc.grid).to_dict()}
    return out


def _angular(ctx: _Context) -> dict:
    R = ctx.domain.inner_radius
    if R <= 0:
        raise PreconditionError("angular limits need an inner boundary circle (R > 0)")
    p = ctx.params("angular-limits")
    npts = int(p.get("points", 8))
    apertures = p.get("apertures", [np.pi / 12, np.pi / 6, np.pi / 4])
    depth = float(p.get("sector_radius", 0.5 * (ctx.sc.grid.r_max - R)))
    rows = []
    for k in range(npts):
        phi = 2 * np.pi * (k + 0.5) / npts
        xi = R * np.exp(1j * phi)
        for a in apertures:
            lim = angular_limit(ctx.field, AngularSector(xi, float(a), depth))
            rows.append({"angle": phi, "aperture": a, "value": lim.value, "divergent": lim.divergent})
    out = {"angular": rows}
    if "trace" in ctx.sc.analyses or p.get("end_limits", True):
        cx = ctx.traced()
        out["end_limits"] = [end_limit_point(ctx.field, a, t=ctx.sc.level).to_dict() for a in cx.end_arcs()]
    return out


def _planes(spec_list) -> list[Plane]:
    return [Plane(tuple(p["normal"]), float(p.get("offset", 0.0))) for p in spec_list]


def _need_data(ctx: _Context):
    if ctx.data is None:
        raise PreconditionError("analysis needs Weierstrass data")
    return ctx.data


def _immersion(ctx: _Context):
    if ctx.mesh is None:
        ctx.mesh = immerse(_need_data(ctx), ctx.sc.grid)
    return ctx.mesh


def _slice(ctx: _Context) -> dict:
    data = _need_data(ctx)
    planes = _planes(ctx.params("slice").get("planes", [{"normal": [0, 0, 1], "offset": ctx.sc.level}]))
    out = []
    for pl in planes:
        mesh = None if pl.horizontal else _immersion(ctx)
        out.append(plane_slice(data, pl, ctx.sc.grid, immersion=mesh).to_dict())
    return {"slices": out}


def _schedule(spec) -> np.ndarray | None:
    if spec is None:
        return None
    if isinstance(spec, dict):
        return np.geomspace(float(spec["outer"]), float(spec["inner"]), int(spec.get("size", 13)))
    return np.asarray(spec, float)


def _curvature(ctx: _Context) -> dict:
    data = _need_data(ctx)
    rep = total_curvature(data, _schedule(ctx.params("curvature").get("schedule")))
    out = rep.to_dict()
    if np.any(np.diff(np.abs(rep.partials)) < 0):
        raise InvariantViolation("curvature partial integrals decrease")
    R = data.working_radius
    if data.gauss_winding != 0 and data.H.is_empty and rep.finite:
        # g = z^n covers a spherical cap of chordal radius R'^|n| exactly |n| times
        k = abs(data.gauss_winding)
        out["reference_cap_area"] = k * 4 * np.pi * R ** (2 * k) / (1 + R ** (2 * k))
    return out


def _equivalence(ctx: _Context) -> dict:
    data = _need_data(ctx)
    p = ctx.params("equivalence")
    p1, p2 = _planes(p.get("planes", [{"normal": [0, 0, 1], "offset": ctx.sc.level},
                                      {"normal": [1, 0, 0], "offset": 0.0}]))
    sched = _schedule(p.get("curvature_schedule", ctx.params("curvature").get("schedule")))
    return check_corollary_equivalence(data, p1, p2, ctx.sc.grid, curvature_schedule=sched)


def _conformal(ctx: _Context) -> dict:
    p = ctx.params("conformal-type")
    mode = p.get("mode", "classify")
    bp = complex(*p["basepoint"]) if "basepoint" in p else None
    if mode == "halfspace":
        return {"mode": mode, "conformal_type": ct.halfspace_cross_check(_need_data(ctx),
                                                                          float(p.get("t", ctx.sc.level)))}
    if mode == "punctured":
        trend = ct.punctured_disk_trend(bp if bp is not None else 0.5, p.get("eps", (1e-2, 1e-3, 1e-4)),
                                        ctx.sc.grid.n_radial, ctx.sc.grid.n_angular)
        return {"mode": mode, "conformal_type": trend.to_dict()}
    grid = ctx.sc.grid
    if p.get("mask") == "full":
        mask = ct.full_annulus_mask(grid, bp if bp is not None else 0.5)
    else:
        seed = complex(*p.get("seed", [0.5, 0.0]))
        mask = ct.mask_from_level(ctx.field, ctx.sc.level, p.get("side", ">="), seed, grid, basepoint=bp)
    mc_grid = PolarGrid(grid.r_min, *p["mc_grid"], grid.r_max) if "mc_grid" in p else None
    rep = ct.classify_type(mask, p.get("delta"), mc_walks=p.get("mc_walks"), mc_grid=mc_grid, seed=ctx.sc.seed)
    if rep.censored and rep.notes:
        ctx.warnings.append("Censored: " + "; ".join(rep.notes))
    u_all = rep.u_values
    if any(not 0 <= u <= 1 for u in u_all):
        raise InvariantViolation("harmonic measure outside [0, 1]")
    return {"mode": mode, "mask": mask.summary(), "conformal_type": rep.to_dict()}


ANALYSIS_FUNCS = {
    "trace": _trace,
    "ends": _ends,
    "pole": _pole,
    "flux": _flux,
    "boundedness": _boundedness,
    "angular-limits": _angular,
    "slice": _slice,
    "curvature": _curvature,
    "equivalence": _equivalence,
    "conformal-type": _conformal,
}


def run_scenario(sc: Scenario, *, keep_artifacts: bool = False) -> RunReport:
    """Execute analyses in declaration order; failures are recorded and the run continues."""
    started = time.perf_counter()
    wall = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    report = RunReport(scenario=_jsonable(sc.to_json()))
    ctx = _Context(sc)
    for name in sc.analyses:
        try:
            with np.errstate(all="ignore"):
                report.results[name] = ANALYSIS_FUNCS[name](ctx)
        except InvariantViolation as exc:
            report.results[name] = {"error": {"type": "InvariantViolation", "message": str(exc)}}
        except AnnularEndsError as exc:
            report.results[name] = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        except Exception as exc:  # noqa: BLE001 - surfaced as exit code 4
            report.results[name] = {"error": {"type": "InternalError",
                                              "message": f"{type(exc).__name__}: {exc}"}}
    report.warnings = list(dict.fromkeys(ctx.warnings))
    report.timestamp = {"started": wall, "elapsed_s": round(time.perf_counter() - started, 3)}
    if keep_artifacts:
        report.artifacts = {"complex": ctx.complex, "domain": ctx.domain, "mesh": ctx.mesh, "data": ctx.data}
    return report
