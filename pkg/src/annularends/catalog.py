"""Builtin fields and the example scenario catalog."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .annulus import PolarGrid
from .harmonic import ClosedFormField, HarmonicField, SampledField


@dataclass(frozen=True)
class BuiltinField:
    description: str
    inner_radius: float
    closed_form: tuple[float, dict] | None = None  # (log coefficient, {m: a_m})
    sampler: Callable | None = None

    def build(self, grid: PolarGrid, name: str) -> HarmonicField:
        if self.closed_form is not None:
            c, coeffs = self.closed_form
            return ClosedFormField.from_coefficients(c, coeffs, self.inner_radius, name)
        return SampledField.from_sampler(self.sampler, grid, inner_radius=self.inner_radius, name=name)


def _essential(z):
    return np.real(np.exp(1 / z))


def _boundary_pole(z):
    return np.real(1 / (z - 0.25))


def _spiral(z):
    gap = np.abs(z) - 0.25
    return np.sin(np.angle(z) - np.log(np.log(1 / gap)))


FIELDS: dict[str, BuiltinField] = {
    "log_end": BuiltinField("f = log|z| on the punctured disk", 0.0, (1.0, {})),
    "dipole_end": BuiltinField("f = Re(1/z)", 0.0, (0.0, {-1: 1.0})),
    "quadrupole_end": BuiltinField("f = Re(1/z^2)", 0.0, (0.0, {-2: 1.0})),
    "bounded_end": BuiltinField("f = Re z", 0.0, (0.0, {1: 1.0})),
    "essential_end": BuiltinField("f = Re exp(1/z), essential singularity", 0.0, sampler=_essential),
    "boundary_pole": BuiltinField("f = Re 1/(z - 1/4) on A(1/4, 1), pole on the inner circle", 0.25,
                                  sampler=_boundary_pole),
    "spiral_end": BuiltinField("synthetic spiral sin(theta - log log 1/(r - 1/4)) on A(1/4, 1)", 0.25,
                               sampler=_spiral),
    "bounded_annulus": BuiltinField("f = Re z on A(1/2, 1)", 0.5, (0.0, {1: 1.0})),
    "log_annulus": BuiltinField("f = log|z| on A(1/4, 1)", 0.25, (1.0, {})),
    "right_half": BuiltinField("f = Re z on A(1/4, 1)", 0.25, (0.0, {1: 1.0})),
    "dipole_annulus": BuiltinField("f = Re(1/z) on A(1/10, 1)", 0.1, (0.0, {-1: 1.0})),
}


def _grid(r_min, n_radial, n_angular, r_max=None):
    g = {"r_min": r_min, "n_radial": n_radial, "n_angular": n_angular}
    if r_max is not None:
        g["r_max"] = r_max
    return g


def _w(n, H, dh, R_prime):
    return {"type": "weierstrass", "n": n, "H": H, "dh": dh, "R_prime": R_prime}


_SCENARIOS: list[dict] = [
    {
        "name": "log_end",
        "provenance": "f = log|z|: level sets are circles, flux 2 pi, no ends",
        "field": {"type": "builtin", "name": "log_end"},
        "analyses": ["trace", "ends", "pole", "flux", "boundedness"],
        "grid": _grid(1e-3, 256, 512),
        "level": -0.6931471805599453,
    },
    {
        "name": "dipole_end",
        "provenance": "f = Re(1/z): simple pole of f, omega of order 2, two ends, infinite arc integral",
        "field": {"type": "builtin", "name": "dipole_end"},
        "analyses": ["trace", "ends", "pole", "flux", "boundedness"],
        "grid": _grid(1e-3, 256, 512),
        "level": 0.0,
        "params": {"ends": {"levels": [-1.0, 0.0, 0.7]}},
    },
    {
        "name": "quadrupole_end",
        "provenance": "f = Re(1/z^2): omega of order 3, four ends",
        "field": {"type": "builtin", "name": "quadrupole_end"},
        "analyses": ["trace", "ends", "pole", "boundedness"],
        "grid": _grid(1e-3, 256, 512),
        "level": 0.3,
        "params": {"ends": {"levels": [0.0, 0.3, -2.0]}},
    },
    {
        "name": "bounded_end",
        "provenance": "f = Re z: bounded, holomorphic omega, finite arc integral",
        "field": {"type": "builtin", "name": "bounded_end"},
        "analyses": ["trace", "ends", "pole", "flux", "boundedness"],
        "grid": _grid(1e-3, 256, 512),
        "level": 0.0,
    },
    {
        "name": "essential_end",
        "provenance": "f = Re exp(1/z): coefficient recovery flags an essential singularity",
        "field": {"type": "builtin", "name": "essential_end"},
        "analyses": ["pole", "boundedness"],
        "grid": _grid(0.02, 64, 64),
        "level": 0.0,
    },
    {
        "name": "boundary_pole",
        "provenance": "Re 1/(z - 1/4) on A(1/4, 1): end arcs converge to the inner-circle point 1/4",
        "field": {"type": "builtin", "name": "boundary_pole"},
        "analyses": ["trace", "angular-limits"],
        "grid": _grid(0.2501, 256, 512),
        "level": 0.0,
        "params": {"angular-limits": {"points": 4}},
    },
    {
        "name": "spiral_end",
        "provenance": "synthetic spiral on A(1/4, 1): end germ never settles, limit NonConvergent",
        "field": {"type": "builtin", "name": "spiral_end"},
        "analyses": ["trace", "angular-limits"],
        "grid": _grid(0.2501, 256, 512),
        "level": 0.0,
        "params": {"angular-limits": {"points": 0}},
    },
    {
        "name": "bounded_annulus",
        "provenance": "f = Re z on A(1/2, 1): angular limits equal Re xi",
        "field": {"type": "builtin", "name": "bounded_annulus"},
        "analyses": ["angular-limits"],
        "grid": _grid(0.5001, 64, 128),
        "level": 0.0,
        "params": {"angular-limits": {"points": 8, "apertures": [0.2617993877991494, 0.5235987755982988,
                                                                    0.7853981633974483]}},
    },
    {
        "name": "catenoid_end",
        "provenance": "g = z, dh = dz/z: catenoid end, finite total curvature, circles as horizontal slices",
        "field": _w(1, [], [[-1, 1.0, 0.0]], 0.8),
        "analyses": ["pole", "ends", "curvature", "slice", "equivalence", "conformal-type"],
        "grid": _grid(8e-4, 256, 512),
        "level": -1.0,
        "params": {
            "slice": {"planes": [{"normal": [0, 0, 1], "offset": -1.0}, {"normal": [1, 0, 0], "offset": 0.0}]},
            "conformal-type": {"mode": "halfspace", "t": -1.0},
        },
    },
    {
        "name": "planar_end",
        "provenance": "g = z, dh = dz: planar end, bounded height, finite vertical flux",
        "field": _w(1, [], [[0, 1.0, 0.0]], 0.8),
        "analyses": ["pole", "ends", "flux", "curvature", "equivalence", "conformal-type"],
        "grid": _grid(8e-4, 256, 512),
        "level": -0.8,
        "params": {"conformal-type": {"mode": "halfspace", "t": 2.0}},
    },
    {
        "name": "enneper_end",
        "provenance": "g = 1/z, dh = -dz/z^3: Enneper-type end, dh pole of order 3, four ends",
        "field": _w(-1, [], [[-3, -1.0, 0.0]], 0.8),
        "analyses": ["pole", "ends", "slice", "curvature", "equivalence"],
        "grid": _grid(8e-4, 256, 512),
        "level": 0.0,
    },
    {
        "name": "unbounded_H_end",
        "provenance": "g = z exp(1/z), dh = dz/z: unbounded H, infinite total curvature, infinite-type slices",
        "field": _w(1, [[-1, 1.0, 0.0]], [[-1, 1.0, 0.0]], 0.5),
        "analyses": ["pole", "curvature", "equivalence"],
        "grid": _grid(0.02, 256, 1024),
        "level": -1.0,
        "params": {"curvature": {"schedule": {"outer": 0.5, "inner": 0.02, "size": 13}}},
    },
    {
        "name": "halfspace_component",
        "provenance": "component {Re z >= 0} of A(1/4, 1): positive ideal-boundary harmonic measure, hyperbolic",
        "field": {"type": "builtin", "name": "right_half"},
        "analyses": ["conformal-type"],
        "grid": _grid(0.25, 128, 256),
        "level": 0.0,
        "params": {"conformal-type": {"mode": "classify", "side": ">=", "seed": [0.5, 0.0],
                                      "mc_walks": 20000, "mc_grid": [64, 128]}},
    },
    {
        "name": "dipole_component",
        "provenance": "component {Re(1/z) >= 0} of A(1/10, 1) through z = 1/2",
        "field": {"type": "builtin", "name": "dipole_annulus"},
        "analyses": ["conformal-type"],
        "grid": _grid(0.1, 128, 256),
        "level": 0.0,
        "params": {"conformal-type": {"mode": "classify", "side": ">=", "seed": [0.5, 0.0],
                                      "mc_walks": 20000, "mc_grid": [64, 128]}},
    },
    {
        "name": "sub_annulus",
        "provenance": "inner sub-annulus {log|z| <= log 1/2} of A(1/4, 1) at z = 0.35",
        "field": {"type": "builtin", "name": "log_annulus"},
        "analyses": ["conformal-type"],
        "grid": _grid(0.25, 128, 256),
        "level": -0.6931471805599453,
        "params": {"conformal-type": {"mode": "classify", "side": "<=", "seed": [0.3, 0.0],
                                      "basepoint": [0.35, 0.0], "mc_walks": 20000, "mc_grid": [64, 128]}},
    },
    {
        "name": "full_annulus",
        "provenance": "A(1/4, 1) with the inner circle as ideal boundary: u(1/2) = 1/2, hyperbolic",
        "field": {"type": "builtin", "name": "log_annulus"},
        "analyses": ["conformal-type"],
        "grid": _grid(0.25, 128, 256),
        "level": 0.0,
        "params": {"conformal-type": {"mode": "classify", "mask": "full", "basepoint": [0.5, 0.0],
                                      "mc_walks": 100000, "mc_grid": [64, 128]}},
    },
    {
        "name": "punctured_disk",
        "provenance": "A(eps, 1) as eps -> 0: u_eps(1/2) = log 2 / log(1/eps) -> 0, parabolic",
        "field": {"type": "builtin", "name": "log_end"},
        "analyses": ["conformal-type"],
        "grid": _grid(1e-4, 129, 16),
        "level": 0.0,
        "params": {"conformal-type": {"mode": "punctured", "eps": [1e-2, 1e-3, 1e-4], "basepoint": [0.5, 0.0]}},
    },
]

SCENARIOS: dict[str, dict] = {s["name"]: s for s in _SCENARIOS}


def scenario(name: str) -> dict:
    """Deep copy of a builtin scenario, ready to edit or run."""
    return copy.deepcopy(SCENARIOS[name])


def list_examples() -> list[tuple[str, str]]:
    return [(s["name"], s["provenance"]) for s in _SCENARIOS]
