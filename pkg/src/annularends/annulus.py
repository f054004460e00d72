"""Annular domains, log-polar grids and Laurent series on circles.

Everything else in the package works in the conformal cylinder coordinate
``(s, theta) = (log r, arg z)``; this module owns the grid geometry and the
circle-sampling machinery used to recover Laurent coefficients of
holomorphic data from samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import DomainError, NonMeromorphicSuspected, RangeError

DEFAULT_M_RANGE = (-32, 32)
ZERO_THRESHOLD = 1e-8
AGREEMENT_TOL = 1e-8
NOISE_FLOOR = 1e-13

ComplexSampler = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AnnulusDomain:
    """The half-open annulus ``A(R, 1) = {R < |z| <= 1}``.

    ``outer_radius`` stays 1 except for working sub-disks ``A(0, R')`` of
    minimal-surface ends.
    """

    inner_radius: float = 0.0
    outer_radius: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.outer_radius <= 1.0:
            raise DomainError(f"outer radius must lie in (0, 1], got {self.outer_radius}")
        if not 0.0 <= self.inner_radius < self.outer_radius:
            raise DomainError(f"inner radius must lie in [0, {self.outer_radius}), got {self.inner_radius}")

    @property
    def punctured(self) -> bool:
        return self.inner_radius == 0.0

    def contains(self, z, slack: float = 1e-12) -> np.ndarray:
        r = np.abs(np.asarray(z))
        return (r > self.inner_radius) & (r <= self.outer_radius * (1.0 + slack))


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid, geometric in ``r`` and uniform in ``theta``.

    Radial nodes run from ``r_min`` to ``r_max`` (1 unless a working
    sub-disk is requested); ``n_angular`` must be a power of two so the
    discrete transform along circles has exact length.
    """

    r_min: float
    n_radial: int
    n_angular: int
    r_max: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max:
            raise DomainError(f"need 0 < r_min < r_max, got r_min={self.r_min}, r_max={self.r_max}")
        if self.n_radial < 2:
            raise ValueError("n_radial must be at least 2")
        n = self.n_angular
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_angular must be a power of two >= 8, got {n}")

    @property
    def log_radii(self) -> np.ndarray:
        return np.linspace(np.log(self.r_min), np.log(self.r_max), self.n_radial)

    @property
    def radii(self) -> np.ndarray:
        r = np.exp(self.log_radii)
        r[0], r[-1] = self.r_min, self.r_max
        return r

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angular) / self.n_angular

    @property
    def h_s(self) -> float:
        return (np.log(self.r_max) - np.log(self.r_min)) / (self.n_radial - 1)

    @property
    def h_theta(self) -> float:
        return 2.0 * np.pi / self.n_angular

    def points(self) -> np.ndarray:
        """Complex node coordinates, shape ``(n_radial, n_angular)``."""
        return self.radii[:, None] * np.exp(1j * self.thetas)[None, :]

    def refined(self, factor: int = 2) -> "PolarGrid":
        return PolarGrid(self.r_min, factor * (self.n_radial - 1) + 1, factor * self.n_angular, self.r_max)

    def nearest_node(self, z: complex) -> tuple[int, int]:
        i = int(np.clip(np.rint((np.log(abs(z)) - np.log(self.r_min)) / self.h_s), 0, self.n_radial - 1))
        j = int(np.rint(np.angle(z) / self.h_theta)) % self.n_angular
        return i, j


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Finite Laurent series ``sum a_m z^m`` for ``m_min <= m <= m_max``.

    Coefficients are stored densely starting at ``m_min``. An empty series
    (no coefficients) represents the zero function.
    """

    m_min: int
    coefficients: np.ndarray
    annulus_of_validity: tuple[float, float] = (0.0, np.inf)

    def __post_init__(self):
        a = np.array(self.coefficients, dtype=complex).ravel()
        if not np.all(np.isfinite(a)):
            raise ValueError("Laurent coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "m_min", int(self.m_min))
        lo, hi = self.annulus_of_validity
        object.__setattr__(self, "annulus_of_validity", (float(lo), float(hi)))

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex], validity=(0.0, np.inf)) -> "LaurentSeries":
        coeffs = {int(m): complex(a) for m, a in coeffs.items() if a != 0}
        if not coeffs:
            return cls(0, np.zeros(0, complex), validity)
        lo, hi = min(coeffs), max(coeffs)
        a = np.zeros(hi - lo + 1, complex)
        for m, c in coeffs.items():
            a[m - lo] = c
        return cls(lo, a, validity)

    @classmethod
    def from_triples(cls, triples: Iterable, validity=(0.0, np.inf)) -> "LaurentSeries":
        """Build from ``[[m, re, im], ...]`` rows (the scenario JSON form)."""
        acc: dict[int, complex] = {}
        for row in triples:
            m, re, im = (list(row) + [0.0])[:3]
            acc[int(m)] = acc.get(int(m), 0) + complex(re, im)
        return cls.from_dict(acc, validity)

    @classmethod
    def zero(cls, validity=(0.0, np.inf)) -> "LaurentSeries":
        return cls(0, np.zeros(0, complex), validity)

    @property
    def is_empty(self) -> bool:
        return self.coefficients.size == 0

    @property
    def m_max(self) -> int:
        return self.m_min + self.coefficients.size - 1

    def __getitem__(self, m: int) -> complex:
        k = int(m) - self.m_min
        if 0 <= k < self.coefficients.size:
            return complex(self.coefficients[k])
        return 0j

    def items(self):
        """Nonzero ``(m, a_m)`` pairs in increasing ``m``."""
        return [(self.m_min + k, complex(a)) for k, a in enumerate(self.coefficients) if a != 0]

    def to_dict(self) -> dict[int, complex]:
        return dict(self.items())

    def to_triples(self) -> list[list[float]]:
        return [[m, a.real, a.imag] for m, a in self.items()]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0

    def with_validity(self, validity) -> "LaurentSeries":
        return LaurentSeries(self.m_min, self.coefficients, validity)

    def trimmed(self, threshold: float = 0.0) -> "LaurentSeries":
        """Zero coefficients with ``|a_m| <= threshold`` and drop empty ends."""
        a = np.where(np.abs(self.coefficients) > threshold, self.coefficients, 0)
        nz = np.flatnonzero(a)
        if nz.size == 0:
            return LaurentSeries.zero(self.annulus_of_validity)
        return LaurentSeries(self.m_min + nz[0], a[nz[0] : nz[-1] + 1], self.annulus_of_validity)

    def derivative(self) -> "LaurentSeries":
        ms = self.m_min + np.arange(self.coefficients.size)
        d = {int(m - 1): complex(m * a) for m, a in zip(ms, self.coefficients) if m != 0 and a != 0}
        return LaurentSeries.from_dict(d, self.annulus_of_validity)

    def scaled(self, factor: complex) -> "LaurentSeries":
        return LaurentSeries(self.m_min, factor * self.coefficients, self.annulus_of_validity)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        acc = self.to_dict()
        for m, a in other.items():
            acc[m] = acc.get(m, 0) + a
        lo = max(self.annulus_of_validity[0], other.annulus_of_validity[0])
        hi = min(self.annulus_of_validity[1], other.annulus_of_validity[1])
        return LaurentSeries.from_dict(acc, (lo, hi))

    def __call__(self, z):
        return evaluate_laurent(self, z)

    def __repr__(self):
        terms = ", ".join(f"{m}: {a:.6g}" for m, a in self.items())
        return f"LaurentSeries({{{terms}}})"


@dataclass(frozen=True, eq=False)
class CircleSamples:
    radius: float
    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n


def _check_validity(series: LaurentSeries, z: np.ndarray, slack: float = 1e-12):
    lo, hi = series.annulus_of_validity
    r = np.abs(z)
    if np.any(r < lo * (1 - slack)) or np.any(r > hi * (1 + slack)) or (lo == 0 and np.any(r == 0) and series.m_min < 0):
        raise DomainError(f"|z| outside validity annulus [{lo}, {hi}]")


def evaluate_laurent(series: LaurentSeries, z):
    """Evaluate ``sum a_m z^m`` at scalar or array ``z``.

    Positive and negative parts are summed by separate Horner recurrences
    (the negative part in ``1/z``) so that neither overflows needlessly.
    """
    zz = np.asarray(z, dtype=complex)
    _check_validity(series, zz)
    out = np.zeros_like(zz)
    if series.is_empty:
        return out if out.ndim else complex(out)
    a = series.coefficients
    ms = series.m_min + np.arange(a.size)
    pos = a[ms >= 0]
    if pos.size:
        # pos holds a_{max(m_min,0)} .. a_{m_max}
        acc = np.zeros_like(zz)
        for c in pos[::-1]:
            acc = acc * zz + c
        if series.m_min > 0:
            acc = acc * zz**series.m_min
        out = out + acc
    neg = a[ms < 0]
    if neg.size:
        # neg holds a_{m_min} .. a_{min(m_max,-1)}; Horner in w = 1/z
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1.0 / zz
        acc = np.zeros_like(zz)
        for c in neg:
            acc = acc * w + c
        top = min(series.m_max, -1)
        acc = acc * w ** (-top)
        out = out + acc
    return out if out.ndim else complex(out)


def circle_sample(field: ComplexSampler, r: float, n: int) -> CircleSamples:
    """Sample ``field`` at ``r * exp(2 pi i j / n)``, ``j = 0..n-1``."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"sample count must be a power of two, got {n}")
    theta = 2.0 * np.pi * np.arange(n) / n
    z = r * np.exp(1j * theta)
    # exact nodes on the axes avoid spurious rounding in e.g. z -> z
    quarter = n // 4
    if quarter and n % 4 == 0:
        z[0], z[quarter], z[2 * quarter], z[3 * quarter] = r, 1j * r, -r, -1j * r
    values = np.asarray(field(z), dtype=complex)
    if values.shape != z.shape:
        values = np.broadcast_to(values, z.shape).copy()
    return CircleSamples(float(r), values)


def _all_coefficients(samples: CircleSamples) -> np.ndarray:
    return np.fft.fft(samples.values) / samples.n


def fourier_coefficients(samples: CircleSamples, m_range) -> np.ndarray:
    """Discrete Fourier coefficients ``c_m`` for ``m`` in ``m_range`` (inclusive pair).

    ``c_m = (1/n) sum_j v_j exp(-i m theta_j)``; indices must satisfy
    ``|m| < n/2``.
    """
    lo, hi = _normalize_range(m_range)
    n = samples.n
    if max(abs(lo), abs(hi)) >= n / 2:
        raise RangeError(f"indices [{lo}, {hi}] violate |m| < n/2 = {n / 2}")
    c = _all_coefficients(samples)
    return c[np.arange(lo, hi + 1) % n]


def _normalize_range(m_range) -> tuple[int, int]:
    if isinstance(m_range, int):
        return m_range, m_range
    lo, hi = m_range
    if lo > hi:
        raise RangeError(f"empty index range [{lo}, {hi}]")
    return int(lo), int(hi)


def tail_fraction(samples: CircleSamples, m_range) -> float:
    """Largest out-of-window Fourier coefficient relative to ``max(1, largest overall)``."""
    lo, hi = _normalize_range(m_range)
    c = np.abs(_all_coefficients(samples))
    n = samples.n
    ms = np.fft.fftfreq(n, 1.0 / n).astype(int)
    inside = (ms >= lo) & (ms <= hi)
    if inside.all():
        return 0.0
    return float(c[~inside].max() / max(1.0, c.max()))


def coefficients_at_radius(samples: CircleSamples, m_range) -> np.ndarray:
    """Laurent coefficient estimates ``a_m = c_m r^{-m}`` from one circle."""
    lo, hi = _normalize_range(m_range)
    ms = np.arange(lo, hi + 1)
    return fourier_coefficients(samples, (lo, hi)) * samples.radius ** (-ms.astype(float))


def laurent_from_circles(
    field: ComplexSampler,
    r1: float,
    r2: float,
    n: int = 1024,
    m_range=DEFAULT_M_RANGE,
    *,
    tol: float = AGREEMENT_TOL,
    threshold: float = ZERO_THRESHOLD,
    validity: tuple[float, float] | None = None,
) -> tuple[LaurentSeries, float]:
    """Recover a Laurent series from samples on two concentric circles.

    Returns ``(series, score)``. Each coefficient is taken from whichever
    circle resolves it with the smaller rounding floor. The score combines the relative two-radius
    coefficient mismatch with the out-of-window Fourier content on each
    circle, so a field whose expansion does not terminate inside
    ``m_range`` fails loudly instead of being truncated.

    Raises
    ------
    NonMeromorphicSuspected
        If ``score > tol``.
    """
    if not 0 < r1 < r2:
        raise DomainError(f"need 0 < r1 < r2, got {r1}, {r2}")
    lo, hi = _normalize_range(m_range)
    if max(abs(lo), abs(hi)) >= n / 2:
        raise RangeError(f"indices [{lo}, {hi}] violate |m| < n/2 = {n / 2}")
    s1 = circle_sample(field, r1, n)
    s2 = circle_sample(field, r2, n)
    return laurent_from_samples(s1, s2, (lo, hi), tol=tol, threshold=threshold, validity=validity)


def laurent_from_samples(
    s1: CircleSamples,
    s2: CircleSamples,
    m_range=DEFAULT_M_RANGE,
    *,
    tol: float = AGREEMENT_TOL,
    threshold: float = ZERO_THRESHOLD,
    validity: tuple[float, float] | None = None,
) -> tuple[LaurentSeries, float]:
    """Two-circle Laurent fit from precomputed samples; see ``laurent_from_circles``."""
    lo, hi = _normalize_range(m_range)
    r1, r2 = s1.radius, s2.radius
    ms = np.arange(lo, hi + 1).astype(float)
    a1 = coefficients_at_radius(s1, (lo, hi))
    a2 = coefficients_at_radius(s2, (lo, hi))
    # rounding in c_m is amplified by r^{-m}; compare only resolvable indices
    nu1 = NOISE_FLOOR * max(1.0, np.max(np.abs(s1.values))) * r1 ** (-ms)
    nu2 = NOISE_FLOOR * max(1.0, np.max(np.abs(s2.values))) * r2 ** (-ms)
    best = np.where(nu1 <= nu2, a1, a2)
    scale = 1.0 + float(np.max(np.abs(best)))
    both = np.maximum(nu1, nu2) <= threshold * scale
    agreement = float(np.max(np.abs(a1 - a2)[both]) / scale) if both.any() else 0.0
    score = max(agreement, tail_fraction(s1, (lo, hi)), tail_fraction(s2, (lo, hi)))
    if not np.isfinite(score) or score > tol:
        raise NonMeromorphicSuspected(score)
    cut = np.maximum(threshold * max(1.0, scale - 1.0), np.minimum(nu1, nu2))
    kept = np.where(np.abs(best) > cut, best, 0)
    series = LaurentSeries(lo, kept, validity or (min(r1, r2), max(r1, r2))).trimmed()
    return series, score
