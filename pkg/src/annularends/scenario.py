"""Scenario JSON: parsing, validation and field construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .annulus import LaurentSeries, PolarGrid
from .catalog import FIELDS, SCENARIOS
from .errors import AnnularEndsError, ScenarioError
from .harmonic import ClosedFormField, HarmonicField
from .weierstrass import WeierstrassData

FORMAT_VERSION = 1

ANALYSES = ("trace", "ends", "pole", "flux", "boundedness", "angular-limits", "slice", "curvature",
            "equivalence", "conformal-type")
WEIERSTRASS_ONLY = ("slice", "curvature", "equivalence")


@dataclass
class Scenario:
    name: str
    field_spec: dict
    analyses: list[str]
    grid: PolarGrid
    level: float = 0.0
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    provenance: str = ""

    def to_json(self) -> dict:
        g = self.grid
        return {
            "format_version": FORMAT_VERSION,
            "name": self.name,
            "field": self.field_spec,
            "analyses": list(self.analyses),
            "grid": {"r_min": g.r_min, "n_radial": g.n_radial, "n_angular": g.n_angular, "r_max": g.r_max},
            "level": self.level,
            "params": self.params,
            "tolerances": self.tolerances,
            "seed": self.seed,
        }

    @property
    def is_weierstrass(self) -> bool:
        return _field_kind(self.field_spec) == "weierstrass"


def _field_kind(spec: dict) -> str:
    if "weierstrass" in spec and "type" not in spec:
        return "weierstrass"
    return spec.get("type", "")


def _weierstrass_body(spec: dict) -> dict:
    return spec["weierstrass"] if "weierstrass" in spec and "type" not in spec else spec


def _inner_radius(spec: dict) -> float:
    kind = _field_kind(spec)
    if kind == "builtin":
        return FIELDS[spec["name"]].inner_radius
    if kind == "closed_form":
        return float(spec.get("inner_radius", 0.0))
    return 0.0


def _outer_radius(spec: dict) -> float:
    if _field_kind(spec) == "weierstrass":
        return float(_weierstrass_body(spec).get("R_prime", 1.0))
    return 1.0


def parse_grid_override(text: str) -> tuple[int, int]:
    try:
        nr, na = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise ScenarioError(f"grid override {text!r} is not of the form NRxNA") from None
    return nr, na


def build_scenario(doc: dict, *, grid_override: tuple[int, int] | None = None, seed: int | None = None,
                   level: float | None = None) -> Scenario:
    """Validate a scenario document (or builtin reference) and resolve defaults."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    if "builtin" in doc:
        name = doc["builtin"]
        if name not in SCENARIOS:
            raise ScenarioError(f"unknown builtin scenario {name!r}")
        base = dict(SCENARIOS[name])
        base.update({k: v for k, v in doc.items() if k != "builtin"})
        doc = base
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ScenarioError(f"unsupported format_version {version}")
    try:
        name = str(doc["name"])
        spec = doc["field"]
        analyses = list(doc["analyses"])
        gspec = doc["grid"]
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"missing scenario key: {exc}") from None
    if not isinstance(spec, dict):
        raise ScenarioError("field must be an object")
    kind = _field_kind(spec)
    if kind not in ("builtin", "closed_form", "weierstrass"):
        raise ScenarioError(f"unknown field type {kind!r}")
    if kind == "builtin" and spec.get("name") not in FIELDS:
        raise ScenarioError(f"unknown builtin field {spec.get('name')!r}")
    if not analyses:
        raise ScenarioError("analysis list is empty")
    unknown = [a for a in analyses if a not in ANALYSES]
    if unknown:
        raise ScenarioError(f"unknown analyses {unknown}")
    if kind != "weierstrass" and any(a in WEIERSTRASS_ONLY for a in analyses):
        raise ScenarioError(f"analyses {WEIERSTRASS_ONLY} need Weierstrass data")

    R = _inner_radius(spec)
    try:
        r_min = float(gspec["r_min"])
        nr, na = int(gspec["n_radial"]), int(gspec["n_angular"])
        r_max = float(gspec.get("r_max", _outer_radius(spec)))
        if grid_override:
            nr, na = grid_override
        if r_min == R:
            r_min = R * (1 + 1e-12)
        if not r_min > R:
            raise ScenarioError(f"grid r_min {r_min} must exceed the inner radius {R}")
        grid = PolarGrid(r_min, nr, na, r_max)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid grid: {exc}") from None
    seed_val = int(doc.get("seed", 0) if seed is None else seed)
    if not 0 <= seed_val < 2**64:
        raise ScenarioError("seed must be an unsigned 64-bit integer")
    sc = Scenario(name, spec, analyses, grid, float(doc.get("level", 0.0) if level is None else level),
                  dict(doc.get("params", {})), dict(doc.get("tolerances", {})), seed_val,
                  str(doc.get("provenance", "")))
    try:
        resolve_field(sc)
    except (AnnularEndsError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"invalid field: {type(exc).__name__}: {exc}") from None
    return sc


def load_scenario(text: str, **overrides) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON: {exc}") from None
    return build_scenario(doc, **overrides)


def resolve_field(sc: Scenario) -> tuple[HarmonicField, WeierstrassData | None]:
    """The harmonic function the level-set analyses act on (``x3`` for Weierstrass data)."""
    spec = sc.field_spec
    kind = _field_kind(spec)
    if kind == "builtin":
        return FIELDS[spec["name"]].build(sc.grid, spec["name"]), None
    if kind == "closed_form":
        coeffs = LaurentSeries.from_triples(spec.get("laurent", []))
        return ClosedFormField.from_coefficients(float(spec.get("log_coeff", 0.0)), dict(coeffs.items()),
                                                 float(spec.get("inner_radius", 0.0)), sc.name), None
    data = WeierstrassData.from_json(_weierstrass_body(spec), sc.name)
    return data.height_field(), data
