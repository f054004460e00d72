"""Minimal-surface ends from Weierstrass data ``g = z^n e^H``, ``dh = h(z) dz``.

Surfaces enter as data, never as meshes: the immersion is

    X(z) = Re int_{R'}^{z} ( (1/g - g)/2, i (1/g + g)/2, 1 ) h(zeta) dzeta

on the working punctured disk ``A(0, R')``.  The height ``x3`` is an
honest closed-form harmonic function whenever the residue of ``dh`` at the
puncture is real, which is enforced at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annulus import (
    DEFAULT_M_RANGE,
    ZERO_THRESHOLD,
    AnnulusDomain,
    CircleSamples,
    LaurentSeries,
    PolarGrid,
    evaluate_laurent,
    laurent_from_samples,
)
from .errors import (
    AnnularEndsError,
    BranchError,
    DegenerateMetric,
    NonMeromorphicSuspected,
    NumericalNonconvergence,
    PreconditionError,
    SlicePeriodError,
    UndeterminedEnd,
    WindingUnresolved,
)
from .harmonic import ClosedFormField, OneForm, SampledField
from .levelset import LevelSetComplex, count_ends, default_schedule, trace_level
from .meromorphic import PoleReport, integrate_along_germ, pole_order

RESIDUE_TOL = 1e-12
METRIC_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class WeierstrassData:
    gauss_winding: int
    H: LaurentSeries
    height_form: LaurentSeries
    working_radius: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not 0 < self.working_radius <= 1:
            raise ValueError("working radius must lie in (0, 1]")
        res = self.height_form[-1]
        if abs(res.imag) > RESIDUE_TOL * max(1.0, abs(res)):
            raise SlicePeriodError(-2 * np.pi * res.imag,
                                   f"residue {res} of dh is not real; x3 would be multivalued")
        validity = (0.0, self.working_radius)
        object.__setattr__(self, "gauss_winding", int(self.gauss_winding))
        object.__setattr__(self, "H", self.H.with_validity(validity))
        object.__setattr__(self, "height_form", self.height_form.with_validity(validity))

    @classmethod
    def from_json(cls, spec: dict, name: str = "") -> "WeierstrassData":
        return cls(int(spec["n"]), LaurentSeries.from_triples(spec.get("H", [])),
                   LaurentSeries.from_triples(spec["dh"]), float(spec.get("R_prime", 1.0)), name)

    def to_json(self) -> dict:
        return {"n": self.gauss_winding, "H": self.H.to_triples(), "dh": self.height_form.to_triples(),
                "R_prime": self.working_radius}

    @property
    def domain(self) -> AnnulusDomain:
        return AnnulusDomain(0.0, self.working_radius)

    def log_abs_g(self, z):
        z = np.asarray(z, complex)
        return self.gauss_winding * np.log(np.abs(z)) + np.real(evaluate_laurent(self.H, z))

    def g(self, z):
        z = np.asarray(z, complex)
        return z**self.gauss_winding * np.exp(evaluate_laurent(self.H, z))

    def h(self, z):
        return evaluate_laurent(self.height_form, np.asarray(z, complex))

    def phi(self, z) -> np.ndarray:
        """The three components of ``dX = Re(phi dz)``, stacked on axis 0."""
        z = np.asarray(z, complex)
        g = self.g(z)
        h = self.h(z)
        return np.stack([0.5 * (1 / g - g) * h, 0.5j * (1 / g + g) * h, h])

    def metric_factor(self, z):
        L = self.log_abs_g(z)
        return np.cosh(L) * np.abs(self.h(z))

    def height_field(self) -> ClosedFormField:
        """``x3`` normalised to vanish at the basepoint ``z = R'``."""
        rho = self.height_form[-1].real
        prim = {m + 1: a / (m + 1) for m, a in self.height_form.items() if m != -1}
        P = LaurentSeries.from_dict(prim)
        R = self.working_radius
        const = np.real(evaluate_laurent(P, R)) + rho * np.log(R) if prim or rho else 0.0
        P = P + LaurentSeries.from_dict({0: -const})
        return ClosedFormField(rho, P, self.domain, f"x3[{self.name}]")

    def height_pole(self) -> PoleReport:
        return pole_order(OneForm(self.height_form))


@dataclass(frozen=True)
class Plane:
    normal: tuple[float, float, float]
    offset: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.normal, float)
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError("plane normal must be nonzero")
        object.__setattr__(self, "normal", tuple((v / nv).tolist()))

    @property
    def horizontal(self) -> bool:
        return abs(abs(self.normal[2]) - 1) < 1e-12

    def to_json(self) -> dict:
        return {"normal": list(self.normal), "offset": self.offset}


@dataclass(eq=False)
class MinimalImmersion:
    grid: PolarGrid
    X: np.ndarray = field(repr=False)  # (3, n_radial, n_angular)
    periods: np.ndarray = field(repr=False)  # real periods of X around the core circle
    conformality_residual: np.ndarray = field(repr=False)
    path_residual: float = 0.0

    @property
    def scale(self) -> float:
        return float(max(1.0, np.max(np.abs(self.X))))

    def to_mesh_text(self) -> str:
        """ASCII polygon mesh: ``v x y z`` lines then 1-based ``f i j k l`` quads."""
        NR, NA = self.grid.n_radial, self.grid.n_angular
        pts = self.X.reshape(3, -1).T
        lines = ["# format_version 1", f"# vertices {NR * NA} faces {(NR - 1) * NA}"]
        lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in pts.tolist()]
        for i in range(NR - 1):
            for j in range(NA):
                j1 = (j + 1) % NA
                a, b = i * NA + j + 1, i * NA + j1 + 1
                c, d = (i + 1) * NA + j1 + 1, (i + 1) * NA + j + 1
                lines.append(f"f {a} {b} {c} {d}")
        return "\n".join(lines) + "\n"


def _check_working_grid(data: WeierstrassData, grid: PolarGrid):
    if abs(grid.r_max - data.working_radius) > 1e-12:
        raise PreconditionError(f"grid outer radius {grid.r_max} must equal R' = {data.working_radius}")


def immerse(data: WeierstrassData, grid: PolarGrid, gl_order: int = 8) -> MinimalImmersion:
    """Integrate ``Re(phi dz)`` from ``z = R'`` over the grid.

    Radial spine along ``theta = 0`` by Gauss-Legendre per grid interval,
    then spectral integration around every circle.  The period of each
    coordinate around the core circle is recorded, not treated as an error.
    """
    _check_working_grid(data, grid)
    NR, NA = grid.n_radial, grid.n_angular
    Z = grid.points()
    lam = data.metric_factor(Z)
    bad = np.argwhere(~(lam >= METRIC_FLOOR))
    if bad.size:
        i, j = bad[0]
        raise DegenerateMetric((int(i), int(j)), float(lam[i, j]))

    xg, wg = np.polynomial.legendre.leggauss(gl_order)
    S = grid.log_radii
    half = 0.5 * np.diff(S)
    mid = 0.5 * (S[1:] + S[:-1])

    def radial_segments(unit: complex) -> np.ndarray:
        s = mid[:, None] + half[:, None] * xg[None, :]
        z = np.exp(s) * unit
        return np.einsum("kig,g->ki", data.phi(z) * z, wg) * half  # (3, NR-1)

    seg = radial_segments(1.0)
    spine = np.zeros((3, NR), complex)
    spine[:, :-1] = -np.cumsum(seg[:, ::-1], axis=1)[:, ::-1]

    M = 2 * NA
    phis = 2 * np.pi * np.arange(M) / M
    zc = grid.radii[:, None] * np.exp(1j * phis)[None, :]
    q = data.phi(zc) * 1j * zc
    c = np.fft.fft(q, axis=-1) / M
    ms = np.fft.fftfreq(M, 1.0 / M)
    d = np.zeros_like(c)
    nz = (ms != 0) & (np.abs(ms) < M // 2)
    d[..., nz] = c[..., nz] / (1j * ms[nz])
    oscill = np.fft.ifft(d, axis=-1) * M
    ang = oscill[..., ::2] - oscill[..., :1] + c[..., :1] * grid.thetas[None, None, :]
    Xc = spine[:, :, None] + ang
    X = np.real(Xc)
    periods = np.real(2 * np.pi * c[..., 0])  # (3, NR)
    period = periods[:, -1]

    # conformality from the exact tangent vectors in (s, theta)
    P = data.phi(Z)
    Xs = np.real(P * Z)
    Xt = np.real(P * 1j * Z)
    ns, nt = np.sum(Xs**2, axis=0), np.sum(Xt**2, axis=0)
    conf = np.maximum(np.abs(np.sum(Xs * Xt, axis=0)), np.abs(ns - nt)) / (0.5 * (ns + nt))

    # path independence: radial edges at every angle vs. mesh differences
    worst = 0.0
    for j in range(NA):
        rs = radial_segments(np.exp(1j * grid.thetas[j]))
        mismatch = np.abs(np.real(rs) - (X[:, 1:, j] - X[:, :-1, j]))
        worst = max(worst, float(np.max(mismatch)))
    scale = float(max(1.0, np.max(np.abs(X))))
    return MinimalImmersion(grid, X, period, conf, worst / scale)


def gauss_winding(g_sampler, r: float, n_samples: int = 1024) -> int:
    """Degree of ``g`` around ``|z| = r`` from its continuous argument."""
    z = r * np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    v = np.asarray(g_sampler(z), complex)
    if not np.all(np.isfinite(v)) or np.any(v == 0):
        raise PreconditionError("g must be finite and nonzero on the circle")
    inc = np.angle(np.roll(v, -1) / v)
    if np.max(np.abs(inc)) > np.pi / 2:
        raise WindingUnresolved(f"phase step {np.max(np.abs(inc)):.3f} rad too large; increase n_samples")
    turns = float(np.sum(inc) / (2 * np.pi))
    k = int(np.rint(turns))
    if abs(turns - k) >= 0.01:
        raise WindingUnresolved(f"winding residual {abs(turns - k):.3e}")
    return k


def _log_samples(g_sampler, n: int, r: float, anchor: float, n_samples: int) -> CircleSamples:
    z = r * np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    v = np.asarray(g_sampler(z), complex) * z ** (-n)
    arg = np.unwrap(np.angle(v))
    arg += anchor - arg[0]
    return CircleSamples(r, np.log(np.abs(v)) + 1j * arg)


def _radial_anchor(g_sampler, n: int, r0: float, r: float) -> float:
    """Argument of ``z^{-n} g`` at ``z = r``, continued along the real axis from ``r0``."""
    rr = np.geomspace(r0, r, 2049)
    v = np.asarray(g_sampler(rr.astype(complex)), complex) * rr.astype(complex) ** (-n)
    return float(np.unwrap(np.angle(v))[-1])


def extract_H(g_sampler, n: int, radii, n_samples: int = 1024, m_range=DEFAULT_M_RANGE) -> LaurentSeries:
    """Log-factor ``H`` with ``g = z^n e^H`` from samples of ``g``.

    Phases are unwrapped around each circle from ``theta = 0``, and the
    ``theta = 0`` anchors are continued radially so every circle uses the
    same branch.  The two extreme radii feed the two-circle Laurent fit.
    """
    radii = sorted(float(r) for r in radii)
    if len(radii) < 2:
        raise PreconditionError("need at least two radii")
    for r in radii:
        k = gauss_winding(g_sampler, r, n_samples)
        if k != n:
            raise PreconditionError(f"winding {k} at r={r} differs from n={n}")
    anchors = [float(np.angle(g_sampler(np.array([radii[0]], complex))[0] * radii[0] ** (-n)))]
    for r in radii[1:]:
        anchors.append(anchors[0] + _radial_anchor(g_sampler, n, radii[0], r)
                       - _radial_anchor(g_sampler, n, radii[0], radii[0]))
    samples = [_log_samples(g_sampler, n, r, a, n_samples) for r, a in zip(radii, anchors)]
    try:
        H, _ = laurent_from_samples(samples[0], samples[-1], m_range, validity=(radii[0], radii[-1]))
    except NonMeromorphicSuspected:
        jump = abs(samples[0].values.imag.mean() - samples[-1].values.imag.mean())
        if jump > np.pi:
            raise BranchError(f"logarithm branches differ between radii by {jump:.3f}") from None
        raise
    return H


def reconstruction_error(g_sampler, n: int, H: LaurentSeries, r_lo: float, r_hi: float,
                         probes: int = 64, seed: int = 0) -> float:
    """Max relative error of ``z^n e^H`` against ``g`` at random points of the annulus."""
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), probes))
    z = r * np.exp(2j * np.pi * rng.uniform(size=probes))
    g = np.asarray(g_sampler(z), complex)
    rec = z**n * np.exp(evaluate_laurent(H.with_validity((0, np.inf)), z))
    return float(np.max(np.abs(rec - g) / np.abs(g)))


def classify_H_bounded(H: LaurentSeries, tau: float = ZERO_THRESHOLD) -> bool:
    """``H`` bounded near 0 iff no significant negative-index coefficient."""
    scale = max(1.0, H.max_abs())
    return all(abs(a) <= tau * scale for m, a in H.items() if m < 0)


@dataclass(frozen=True)
class CurvatureReport:
    radii: tuple[float, ...]
    partials: tuple[float, ...]
    increments: tuple[float, ...]
    verdict: str  # "Finite" | "InfiniteSuspected"
    spherical_area: float | None

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    @property
    def total_curvature(self) -> float | None:
        return None if self.spherical_area is None else -self.spherical_area

    def to_dict(self) -> dict:
        area = self.spherical_area
        return {
            "verdict": self.verdict,
            "spherical_area": area,
            "total_curvature": self.total_curvature,
            "area_over_4pi": None if area is None else area / (4 * np.pi),
            "radii": list(self.radii),
            "partials": list(self.partials),
        }


def _sech2(L):
    e = np.exp(-2 * np.abs(L))
    return 4 * e / (1 + e) ** 2


def _annulus_area(data: WeierstrassData, s_lo: float, s_hi: float, n_theta: int, gl_order: int) -> float:
    xg, wg = np.polynomial.legendre.leggauss(gl_order)
    half = 0.5 * (s_hi - s_lo)
    s = 0.5 * (s_hi + s_lo) + half * xg
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = np.exp(s)[:, None] * np.exp(1j * theta)[None, :]
    dH = evaluate_laurent(data.H.derivative(), z)
    dens = np.abs(data.gauss_winding + z * dH) ** 2 * _sech2(data.log_abs_g(z))
    return float(np.sum(wg * half * np.mean(dens, axis=1)) * 2 * np.pi)


def total_curvature(data: WeierstrassData, schedule=None, *, n_theta: int = 2048, gl_order: int = 16,
                    tail: int = 6, ratio: float = 0.9, rtol: float = 1e-8) -> CurvatureReport:
    """Spherical area of the Gauss image over nested annuli ``[r_j, R']``.

    In conformal coordinates the pulled-back spherical area density is
    ``|n + z H'|^2 sech^2(log|g|)``, which stays finite where ``|g|``
    under- or overflows.
    """
    Rp = data.working_radius
    radii = np.geomspace(Rp, 1e-3 * Rp, 19) if schedule is None else np.sort(np.asarray(schedule, float))[::-1]
    if radii[0] != Rp:
        radii = np.concatenate([[Rp], radii[radii < Rp]])
    logs = np.log(radii)
    incs = []
    for s_hi, s_lo in zip(logs[:-1], logs[1:]):
        a = _annulus_area(data, s_lo, s_hi, n_theta, gl_order)
        b = _annulus_area(data, s_lo, s_hi, 2 * n_theta, 2 * gl_order)
        if abs(a - b) > rtol * max(1.0, abs(b)):
            raise NumericalNonconvergence(f"curvature quadrature unresolved on [{np.exp(s_lo):.3g}, "
                                          f"{np.exp(s_hi):.3g}]", abs(a - b))
        incs.append(b)
    incs_arr = np.array(incs)
    partials = np.cumsum(incs_arr)
    last = incs_arr[-tail:]
    if np.all(last <= 1e-300):
        verdict, area = "Finite", float(partials[-1])
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            q = last[1:] / last[:-1]
        if np.all(np.isfinite(q)) and np.all(q < ratio):
            verdict, area = "Finite", float(partials[-1] + last[-1] * q[-1] / (1 - q[-1]))
        else:
            verdict, area = "InfiniteSuspected", None
    return CurvatureReport(tuple(radii.tolist()), tuple(partials.tolist()), tuple(incs), verdict, area)


@dataclass(eq=False)
class SliceResult:
    plane: Plane
    complex: LevelSetComplex
    field: object
    end_count: int | None
    circle_counts: tuple[int, ...]
    finite: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "plane": self.plane.to_json(),
            "end_count": self.end_count,
            "finite": self.finite,
            "circle_counts": list(self.circle_counts),
            "complex": self.complex.summary(),
            "note": self.note,
        }


def slice_field(data: WeierstrassData, plane: Plane, grid: PolarGrid, immersion: MinimalImmersion | None = None):
    """The harmonic function ``X . normal - offset`` whose zero set is ``X^{-1}(plane)``."""
    if plane.horizontal:
        sign = np.sign(plane.normal[2])
        return data.height_field().scaled(sign).shifted(-plane.offset)
    mesh = immersion if immersion is not None else immerse(data, grid)
    nu = np.asarray(plane.normal)
    period = float(nu @ mesh.periods)
    if abs(period) > 1e-8 * mesh.scale:
        raise SlicePeriodError(period)
    values = np.tensordot(nu, mesh.X, axes=1) - plane.offset
    return SampledField(grid, values, None, data.domain, name="slice")


def plane_slice(data: WeierstrassData, plane: Plane, grid: PolarGrid, schedule=None,
                immersion: MinimalImmersion | None = None) -> SliceResult:
    """Trace ``X^{-1}(plane)`` and decide whether it has finitely many ends.

    Finiteness is read from the number of crossings on each schedule
    circle: constant over the inner half of the schedule means finitely
    many ends, growth means the slice does not have finite type.
    """
    _check_working_grid(data, grid)
    u = slice_field(data, plane, grid, immersion)
    values = u.grid_values(grid)
    cx = trace_level(u, 0.0, grid, values=values)
    sched = default_schedule(grid, data.domain) if schedule is None else np.sort(np.asarray(schedule))[::-1]
    rows = [int(np.argmin(np.abs(grid.radii - r))) for r in sched]
    counts = tuple(int(np.count_nonzero((values[i] >= 0) != np.roll(values[i] >= 0, 1))) for i in rows)
    inner = counts[len(counts) // 2:]
    finite = len(set(inner)) == 1
    ends, note = None, ""
    if finite:
        try:
            ends = count_ends(cx, data.domain, sched)
        except UndeterminedEnd as exc:
            note = str(exc)
    else:
        note = "crossing counts grow toward the puncture"
    return SliceResult(plane, cx, u, ends, counts, finite, note)


def vertical_flux(data: WeierstrassData, arc, schedule=None, grid: PolarGrid | None = None):
    """``int |d x3/d eta| ds`` along an end germ of a horizontal slice.

    Along a level arc of ``x3`` the conormal derivative has size
    ``|grad x3| = |h|``.
    """
    if schedule is None:
        if grid is None:
            raise PreconditionError("need a schedule or the tracing grid")
        schedule = default_schedule(grid, data.domain)
    return integrate_along_germ(lambda z: np.abs(data.h(z)), arc, schedule)


def check_corollary_equivalence(data: WeierstrassData, p1: Plane, p2: Plane, grid: PolarGrid,
                                curvature_schedule=None, h_radii=None) -> dict:
    """Evaluate the three finiteness legs and whether they agree.

    Legs: total curvature verdict; boundedness of the recovered ``H``;
    finite-type slices for both planes.  A failing leg is reported with its
    error and the report does not pass.
    """
    if np.linalg.norm(np.cross(p1.normal, p2.normal)) < 1e-9:
        raise PreconditionError("planes must be nonparallel")
    legs: dict[str, dict] = {}
    verdicts: dict[str, bool | None] = {}

    try:
        curv = total_curvature(data, curvature_schedule)
        legs["curvature"] = curv.to_dict()
        verdicts["curvature"] = curv.finite
    except AnnularEndsError as exc:
        legs["curvature"] = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        verdicts["curvature"] = None

    Rp = data.working_radius
    radii = h_radii or (0.25 * Rp, 0.5 * Rp, 0.75 * Rp, Rp)
    try:
        H = extract_H(data.g, data.gauss_winding, radii)
        bounded = classify_H_bounded(H)
        legs["H_bounded"] = {"bounded": bounded, "H": H.to_triples(),
                             "reconstruction_error": reconstruction_error(data.g, data.gauss_winding, H,
                                                                          radii[0], radii[-1])}
        verdicts["H_bounded"] = bounded
    except NonMeromorphicSuspected as exc:
        legs["H_bounded"] = {"bounded": False, "essential_suspected": True, "score": exc.score}
        verdicts["H_bounded"] = False
    except AnnularEndsError as exc:
        legs["H_bounded"] = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        verdicts["H_bounded"] = None

    try:
        mesh = immerse(data, grid)
        s1 = plane_slice(data, p1, grid, immersion=mesh)
        s2 = plane_slice(data, p2, grid, immersion=mesh)
        legs["slices"] = {"P1": s1.to_dict(), "P2": s2.to_dict(), "finite": s1.finite and s2.finite}
        verdicts["slices"] = s1.finite and s2.finite
    except AnnularEndsError as exc:
        legs["slices"] = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        verdicts["slices"] = None

    values = list(verdicts.values())
    passed = None not in values and len(set(values)) == 1
    return {"passed": passed, "all_finite": passed and values[0], "verdicts": verdicts, "legs": legs}
