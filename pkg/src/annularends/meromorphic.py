"""Pole order of the extended one-form and boundedness of ``f``.

The pole order of ``omega`` at the puncture predicts the number of ends
of every level set: a pole of order ``k + 1`` gives ``2k`` ends.
Boundedness of ``f`` is equivalent to ``omega`` extending holomorphically,
and a finite integral of ``|df|`` along an end arc forces boundedness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .annulus import ZERO_THRESHOLD, PolarGrid
from .errors import CriticalLevel, InsufficientResolution, NonMeromorphicSuspected, PreconditionError
from .harmonic import HarmonicField, OneForm, gradient_norm, omega_of, value_scale
from .levelset import Arc, count_ends, default_schedule, trace_level

TAIL_ANNULI = 6
SUMMABLE_RATIO = 0.9


@dataclass(frozen=True)
class PoleReport:
    """Pole order ``p`` of ``omega`` at ``z = 0`` (``p = 0``: holomorphic).

    ``pole_order`` is ``None`` when coefficient recovery failed and an
    essential singularity is suspected.
    """

    pole_order: int | None
    principal_coefficients: dict[int, complex]
    agreement_score: float
    essential_suspected: bool = False

    @property
    def predicted_end_count(self) -> int | None:
        if self.pole_order is None:
            return None
        return 2 * (self.pole_order - 1) if self.pole_order >= 2 else 0

    def to_dict(self) -> dict:
        return {
            "pole_order": self.pole_order,
            "predicted_end_count": self.predicted_end_count,
            "principal_coefficients": [[m, a.real, a.imag] for m, a in sorted(self.principal_coefficients.items())],
            "agreement_score": self.agreement_score,
            "essential_suspected": self.essential_suspected,
        }


@dataclass(frozen=True)
class BoundednessVerdict:
    kind: str  # "Bounded" | "UnboundedPole" | "EssentialSuspected"
    order: int | None = None
    score: float | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "order": self.order, "score": self.score}


@dataclass(frozen=True)
class ArcIntegral:
    """Truncated ``int |df|`` along an end germ plus its tail classification."""

    verdict: str  # "Finite" | "Infinite"
    value: float | None
    truncated_value: float
    contributions: tuple[float, ...]
    radii: tuple[float, ...]

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "value": self.value, "truncated_value": self.truncated_value,
                "contributions": list(self.contributions)}


def pole_order(form: OneForm, tau: float = ZERO_THRESHOLD) -> PoleReport:
    """Order of the pole of ``w(z) dz`` at 0 from its leading significant index.

    With ``w ~ a_m z^m`` and ``m < 0`` the pole order is ``-m``.
    """
    series = form.coeff_series
    scale = max(1.0, series.max_abs())
    significant = [(m, a) for m, a in series.items() if abs(a) > tau * scale]
    principal = {m: a for m, a in significant if m < 0}
    p = -min(principal) if principal else 0
    return PoleReport(p, principal, form.agreement_score)


def pole_report(field: HarmonicField, tau: float = ZERO_THRESHOLD) -> PoleReport:
    """``pole_order(omega_of(field))`` with recovery failures folded into the report."""
    try:
        form = omega_of(field)
    except NonMeromorphicSuspected as exc:
        return PoleReport(None, {}, exc.score, essential_suspected=True)
    return pole_order(form, tau)


def classify_boundedness(field: HarmonicField, tau: float = ZERO_THRESHOLD) -> BoundednessVerdict:
    report = pole_report(field, tau)
    if report.essential_suspected:
        return BoundednessVerdict("EssentialSuspected", score=report.agreement_score)
    if report.pole_order == 0:
        return BoundednessVerdict("Bounded", 0, report.agreement_score)
    return BoundednessVerdict("UnboundedPole", report.pole_order, report.agreement_score)


def empirical_bounded(field: HarmonicField, radii=None, n: int = 2048) -> bool:
    """Sup of ``|f|`` over shrinking circles is non-increasing past the first circle.

    For bounded ``f`` the singularity is removable and ``|f|`` is
    subharmonic on the disk, so circle maxima can only shrink inward.
    """
    radii = np.geomspace(0.5, 1e-8, 24) if radii is None else np.sort(np.asarray(radii))[::-1]
    theta = 2 * np.pi * np.arange(n) / n
    sups = np.array([np.max(np.abs(field(r * np.exp(1j * theta)))) for r in radii])
    return bool(np.all(sups[2:] <= sups[1:-1] * (1 + 1e-12) + 1e-300))


def check_end_pole_relation(field: HarmonicField, t_values, grid: PolarGrid, schedule=None,
                            eps: float | None = None) -> dict:
    """Compare traced end counts with the count predicted by the pole order.

    ``passed`` is ``None`` when the relation is not asserted (pole order 0,
    or an essential singularity is suspected).
    """
    if not field.domain.punctured:
        raise PreconditionError("the end/pole relation is stated on the punctured disk")
    report = pole_report(field)
    p = report.pole_order
    eps = 1e-6 * value_scale(field) if eps is None else eps
    counts, notes = {}, []
    for t in t_values:
        used = float(t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CriticalLevel)
            cx = trace_level(field, used, grid)
        if cx.nodes:
            used = float(t) + eps
            notes.append(f"t={t} is a critical level; traced t={used} instead")
            cx = trace_level(field, used, grid)
        counts[used] = count_ends(cx, field.domain, schedule)
    if p is None or p == 0:
        passed = None
        if p == 0:
            notes.append("omega holomorphic at 0: counts recorded without judgment")
    elif p == 1:
        passed = all(c == 0 for c in counts.values())
    else:
        passed = all(c == 2 * (p - 1) for c in counts.values())
    return {
        "passed": passed,
        "pole_order": p,
        "predicted_end_count": report.predicted_end_count,
        "counts": [[t, c] for t, c in counts.items()],
        "notes": notes,
    }


def _germ_vertices(arc: Arc) -> np.ndarray:
    germs = arc.inner_germs()
    if not germs:
        raise PreconditionError(f"arc {arc.id} is not an end representative")
    germ = germs[0]
    far = int(np.argmax(arc.radii[germ]))
    return germ[: far + 1]


def integrate_along_germ(density, arc: Arc, schedule, *, tail: int = TAIL_ANNULI,
                         ratio: float = SUMMABLE_RATIO) -> ArcIntegral:
    """Polyline quadrature of ``density(z) ds`` on an end germ, binned by schedule annuli."""
    germ = _germ_vertices(arc)
    if germ.size < 4:
        raise InsufficientResolution(f"arc {arc.id} has only {germ.size} vertices on its end germ")
    sched = np.sort(np.asarray(schedule, float))[::-1]
    z = arc.points[germ]
    mid = 0.5 * (z[1:] + z[:-1])
    ds = np.abs(np.diff(z))
    vals = np.asarray(density(mid), float) * ds
    rm = np.abs(mid)
    keep = rm >= sched[-1]
    truncated = float(np.sum(vals[keep]))
    contrib = []
    for hi, lo in zip(sched[:-1], sched[1:]):
        contrib.append(float(np.sum(vals[(rm < hi) & (rm >= lo)])))
    contrib_arr = np.array(contrib)
    last = contrib_arr[-tail:]
    if np.all(last == 0):
        return ArcIntegral("Finite", truncated, truncated, tuple(contrib), tuple(sched.tolist()))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = last[1:] / last[:-1]
    if np.all(np.isfinite(ratios)) and np.all(ratios < ratio):
        q = float(ratios[-1])
        value = truncated + last[-1] * q / (1 - q)
        return ArcIntegral("Finite", float(value), truncated, tuple(contrib), tuple(sched.tolist()))
    return ArcIntegral("Infinite", None, truncated, tuple(contrib), tuple(sched.tolist()))


def arc_df_integral(field: HarmonicField, arc: Arc, schedule=None, grid: PolarGrid | None = None) -> ArcIntegral:
    """``int_alpha |df|`` along an end representative, with a summability verdict.

    Along a level arc the tangential derivative vanishes, so ``|df| ds``
    is ``|grad f| ds``.
    """
    if schedule is None:
        if grid is None:
            raise PreconditionError("need a schedule or the tracing grid")
        schedule = default_schedule(grid, field.domain)
    return integrate_along_germ(lambda z: gradient_norm(field, z), arc, schedule)
