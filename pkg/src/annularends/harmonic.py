"""Harmonic functions on annuli and their holomorphic one-form.

A harmonic ``f`` on ``A(R, 1)`` is carried, whenever possible, by its
holomorphic data ``f = c log|z| + Re F(z)``; the one-form
``omega = df + i df*`` is then ``w(z) dz`` with ``w = c/z + F'(z)``.
The multivalued conjugate ``f*`` itself is never built; only its
differential (inside ``omega``) and its period (the flux) are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .annulus import (
    DEFAULT_M_RANGE,
    NOISE_FLOOR,
    ZERO_THRESHOLD,
    AGREEMENT_TOL,
    AnnulusDomain,
    LaurentSeries,
    PolarGrid,
    circle_sample,
    evaluate_laurent,
    tail_fraction,
)
from .errors import DomainError, NonMeromorphicSuspected, PreconditionError

RealSampler = Callable[[np.ndarray], np.ndarray]


def _check_in_domain(domain: AnnulusDomain, z, slack: float = 1e-12):
    r = np.abs(np.asarray(z))
    if np.any(r <= domain.inner_radius) or np.any(r > domain.outer_radius * (1.0 + slack)):
        raise DomainError(f"point outside A({domain.inner_radius}, {domain.outer_radius})")


class HarmonicField:
    """Common interface: ``field(z)`` evaluates f on arrays of points."""

    domain: AnnulusDomain

    def __call__(self, z):
        raise NotImplementedError

    def gradient(self, z):
        """Complex gradient ``f_x + i f_y`` (the conjugate of ``w``)."""
        raise NotImplementedError

    def grid_values(self, grid: PolarGrid) -> np.ndarray:
        return np.asarray(self(grid.points()), dtype=float)


@dataclass(frozen=True, eq=False)
class ClosedFormField(HarmonicField):
    """``f(z) = log_coeff * log|z| + Re analytic_part(z)``."""

    log_coeff: float = 0.0
    analytic_part: LaurentSeries = field(default_factory=LaurentSeries.zero)
    domain: AnnulusDomain = field(default_factory=AnnulusDomain)
    name: str = ""

    def __post_init__(self):
        lo, hi = self.domain.inner_radius, self.domain.outer_radius
        object.__setattr__(self, "log_coeff", float(self.log_coeff))
        object.__setattr__(self, "analytic_part", self.analytic_part.with_validity((lo, hi)))

    @classmethod
    def from_coefficients(cls, log_coeff=0.0, coeffs=None, inner_radius=0.0, name=""):
        domain = AnnulusDomain(inner_radius)
        series = LaurentSeries.from_dict(coeffs or {}, (inner_radius, 1.0))
        return cls(log_coeff, series, domain, name)

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        _check_in_domain(self.domain, zz)
        out = self.log_coeff * np.log(np.abs(zz)) + np.real(evaluate_laurent(self.analytic_part, zz))
        return float(out) if np.ndim(out) == 0 else out

    def w(self, z):
        """Coefficient of ``omega = w(z) dz``."""
        zz = np.asarray(z, dtype=complex)
        _check_in_domain(self.domain, zz)
        return self.log_coeff / zz + evaluate_laurent(self.analytic_part.derivative(), zz)

    def gradient(self, z):
        return np.conj(self.w(z))

    def shifted(self, constant: float) -> "ClosedFormField":
        return ClosedFormField(self.log_coeff, self.analytic_part + LaurentSeries.from_dict({0: constant}),
                               self.domain, self.name)

    def scaled(self, factor: float) -> "ClosedFormField":
        return ClosedFormField(factor * self.log_coeff, self.analytic_part.scaled(factor), self.domain, self.name)

    def critical_points(self) -> np.ndarray:
        """Zeros of ``w`` inside the annulus (critical points of f)."""
        series = omega_of(self).coeff_series
        if series.is_empty:
            return np.zeros(0, complex)
        # z^{-m_min} w(z) is a polynomial; numpy wants highest degree first
        poly = series.coefficients[::-1]
        poly = np.trim_zeros(poly, "f")
        if poly.size <= 1:
            return np.zeros(0, complex)
        roots = np.roots(poly)
        r = np.abs(roots)
        keep = (r > self.domain.inner_radius) & (r <= self.domain.outer_radius) & (r > 0)
        return np.sort_complex(roots[keep])


@dataclass(frozen=True, eq=False)
class SampledField(HarmonicField):
    """Grid samples of a (nominally harmonic) function.

    ``sampler`` is an optional exact real-valued evaluator; operations
    that depend on meromorphy of ``omega`` require it.
    """

    grid: PolarGrid
    values: np.ndarray = field(repr=False)
    sampler: RealSampler | None = None
    domain: AnnulusDomain = field(default_factory=AnnulusDomain)
    probe_radii: tuple[float, float, float] | None = None
    name: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_radial, self.grid.n_angular):
            raise ValueError(f"values shape {v.shape} does not match grid")
        if self.grid.r_min <= self.domain.inner_radius:
            raise DomainError("grid must lie strictly inside the annulus")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_sampler(cls, sampler: RealSampler, grid: PolarGrid, inner_radius=0.0, name="", **kw):
        values = np.asarray(sampler(grid.points()), dtype=float)
        return cls(grid, values, sampler, AnnulusDomain(inner_radius, grid.r_max), name=name, **kw)

    def grid_values(self, grid: PolarGrid) -> np.ndarray:
        if grid == self.grid:
            return np.array(self.values)
        return np.asarray(self(grid.points()), dtype=float)

    def __call__(self, z):
        zz = np.asarray(z, dtype=complex)
        _check_in_domain(self.domain, zz)
        if self.sampler is not None:
            out = np.asarray(self.sampler(zz), dtype=float)
        else:
            out = self._interpolate(zz)
        return float(out) if out.ndim == 0 else out

    def _interpolate(self, zz):
        g = self.grid
        s = (np.log(np.abs(zz)) - np.log(g.r_min)) / g.h_s
        if np.any(s < -1e-9) or np.any(s > g.n_radial - 1 + 1e-9):
            raise DomainError("point outside sampled grid")
        s = np.clip(s, 0, g.n_radial - 1 - 1e-12)
        t = np.mod(np.angle(zz), 2 * np.pi) / g.h_theta
        i0 = np.floor(s).astype(int)
        j0 = np.floor(t).astype(int) % g.n_angular
        j1 = (j0 + 1) % g.n_angular
        fs = s - i0
        ft = t - np.floor(t)
        v = self.values
        return ((1 - fs) * (1 - ft) * v[i0, j0] + (1 - fs) * ft * v[i0, j1]
                + fs * (1 - ft) * v[i0 + 1, j0] + fs * ft * v[i0 + 1, j1])

    def gradient(self, z):
        zz = np.asarray(z, dtype=complex)
        _check_in_domain(self.domain, zz)
        if self.sampler is not None:
            h = 1e-6 * np.maximum(np.abs(zz), 1e-3)
            fx = (self.sampler(zz + h) - self.sampler(zz - h)) / (2 * h)
            fy = (self.sampler(zz + 1j * h) - self.sampler(zz - 1j * h)) / (2 * h)
            return fx + 1j * fy
        # chain rule through (s, theta) with grid-scale differences
        g = self.grid
        r = np.abs(zz)
        ds, dt = 0.5 * g.h_s, 0.5 * g.h_theta
        rot = np.exp(1j * np.angle(zz))
        up = np.minimum(np.log(r) + ds, np.log(g.r_max))
        down = np.maximum(np.log(r) - ds, np.log(g.r_min))
        fs = (self._interpolate(np.exp(up) * rot) - self._interpolate(np.exp(down) * rot)) / (up - down)
        ft = (self._interpolate(zz * np.exp(1j * dt)) - self._interpolate(zz * np.exp(-1j * dt))) / (2 * dt)
        return rot * (fs + 1j * ft) / r

    def harmonic_residual(self) -> float:
        """Discrete Laplacian relative to the second-difference scale, interior nodes."""
        v = self.values
        g = self.grid
        dss = (v[2:] - 2 * v[1:-1] + v[:-2]) / g.h_s**2
        dtt = (np.roll(v, -1, axis=1) - 2 * v + np.roll(v, 1, axis=1))[1:-1] / g.h_theta**2
        scale = max(np.max(np.abs(dss)), np.max(np.abs(dtt)), 1e-300)
        return float(np.max(np.abs(dss + dtt)) / scale)


@dataclass(frozen=True, eq=False)
class OneForm:
    """``omega = w(z) dz`` with ``w`` given by its Laurent series."""

    coeff_series: LaurentSeries
    agreement_score: float = 0.0

    def __call__(self, z):
        return evaluate_laurent(self.coeff_series, z)


@dataclass(frozen=True)
class FluxValue:
    value: float
    contour_radius: float


def value_scale(field: HarmonicField, n: int = 256) -> float:
    """``max(1, max |f|)`` on the outer circle; the unit for level tolerances."""
    z = field.domain.outer_radius * np.exp(2j * np.pi * np.arange(n) / n)
    return float(max(1.0, np.max(np.abs(field(z)))))


def eval_f(field: HarmonicField, z):
    return field(z)


def gradient_norm(field: HarmonicField, z):
    out = np.abs(field.gradient(z))
    return float(out) if np.ndim(out) == 0 else out


def omega_of(field: HarmonicField, *, m_range=DEFAULT_M_RANGE, n: int = 1024) -> OneForm:
    """The one-form ``df + i df*`` as a Laurent series in ``z``."""
    if isinstance(field, ClosedFormField):
        series = field.analytic_part.derivative() + LaurentSeries.from_dict({-1: field.log_coeff})
        return OneForm(series.with_validity(field.analytic_part.annulus_of_validity))
    if isinstance(field, SampledField):
        if field.sampler is None:
            raise PreconditionError("sampled field has no exact sampler; omega cannot be recovered")
        c, F, score = real_harmonic_laurent(field.sampler, _probe_radii(field), n, m_range)
        series = F.derivative() + LaurentSeries.from_dict({-1: c})
        return OneForm(series.with_validity((field.domain.inner_radius, field.domain.outer_radius)), score)
    raise TypeError(f"unsupported field type {type(field).__name__}")


def _probe_radii(field: SampledField) -> tuple[float, float, float]:
    if field.probe_radii is not None:
        return field.probe_radii
    R = field.domain.inner_radius
    top = field.domain.outer_radius
    lo = max(0.05 * top, R + 0.05 * (top - R), field.grid.r_min)
    return lo, float(np.sqrt(lo * top)), top


def real_harmonic_laurent(sampler: RealSampler, radii, n: int = 1024, m_range=DEFAULT_M_RANGE,
                          *, tol: float = AGREEMENT_TOL, threshold: float = ZERO_THRESHOLD):
    """Recover ``(c, F)`` with ``f = c log|z| + Re F`` from real samples on circles.

    Each Fourier mode of a harmonic function on an annulus is
    ``A_m r^m + B_m r^{-m}`` (plus ``c log r`` for ``m = 0``), so two circles
    determine ``F``; a third circle gives an independent second estimate
    whose disagreement is reported as the score.
    """
    r1, r2, r3 = sorted(float(r) for r in radii)
    lo, hi = m_range
    M = max(abs(lo), abs(hi))
    if M >= n / 2:
        raise ValueError("m_range violates anti-aliasing bound")
    samples = [circle_sample(lambda z: np.asarray(sampler(z), dtype=complex), r, n) for r in (r1, r2, r3)]
    tails = [tail_fraction(s, (-M, M)) for s in samples]
    modes = [np.fft.fft(s.values.real) / n for s in samples]

    def solve(ia, ib):
        ra, rb = (r1, r2, r3)[ia], (r1, r2, r3)[ib]
        fa, fb = modes[ia], modes[ib]
        c = (fa[0].real - fb[0].real) / (np.log(ra) - np.log(rb))
        a0 = fa[0].real - c * np.log(ra)
        coeffs = {0: a0}
        floors = {}
        top = max(np.max(np.abs(s.values)) for s in (samples[ia], samples[ib]))
        for m in range(1, M + 1):
            # (1/2)(A r^m + B r^-m) = f_m(r);  A = a_m,  B = conj(a_{-m})
            mat = 0.5 * np.array([[ra**m, ra**-m], [rb**m, rb**-m]])
            A, B = np.linalg.solve(mat, np.array([fa[m], fb[m]]))
            coeffs[m] = A
            coeffs[-m] = np.conj(B)
            inv = np.abs(np.linalg.inv(mat)).sum(axis=1)
            floors[m], floors[-m] = NOISE_FLOOR * top * inv[0], NOISE_FLOOR * top * inv[1]
        return c, coeffs, floors

    c1, k1, f1 = solve(0, 1)
    c2, k2, f2 = solve(1, 2)
    ms = range(-M, M + 1)
    scale = 1.0 + max(abs(k1[m]) for m in ms) + abs(c1)
    agree = abs(c1 - c2) / scale
    for m in ms:
        if m == 0:
            continue
        if max(f1[m], f2[m]) <= threshold * scale:
            agree = max(agree, abs(k1[m] - k2[m]) / scale)
    score = max(agree, *tails)
    if not np.isfinite(score) or score > tol:
        raise NonMeromorphicSuspected(score)
    cut = threshold * max(1.0, scale - 1.0)
    best = {m: (k1[m] if f1.get(m, 0) <= f2.get(m, 0) else k2[m]) for m in ms}
    kept = {m: a for m, a in best.items() if lo <= m <= hi and abs(a) > max(cut, min(f1.get(m, 0), f2.get(m, 0)))}
    c = c1 if abs(c1) > cut else 0.0
    return float(c), LaurentSeries.from_dict(kept, (r1, r3)), float(score)


def flux(field: HarmonicField, r: float, n_nodes: int | None = None) -> FluxValue:
    """Outward flux ``int_{|z|=r} df/dr ds`` by the trapezoid rule."""
    if not field.domain.inner_radius < r <= field.domain.outer_radius:
        raise DomainError(f"radius {r} outside the annulus")
    if n_nodes is None:
        base = field.grid.n_angular if isinstance(field, SampledField) else 0
        n_nodes = max(1024, 8 * base)
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    u = np.exp(1j * theta)
    grad = field.gradient(r * u)
    df_dr = np.real(np.conj(grad) * u)
    value = float(np.sum(df_dr) * r * 2 * np.pi / n_nodes)
    return FluxValue(value, float(r))


def omega_period(field: HarmonicField, r: float, n_nodes: int = 1024) -> complex:
    """``oint_{|z|=r} omega``; real part vanishes, imaginary part is the flux."""
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    z = r * np.exp(1j * theta)
    w = np.conj(field.gradient(z))
    return complex(np.sum(w * 1j * z) * 2 * np.pi / n_nodes)
