import warnings

import numpy as np
import pytest

from annularends import PolarGrid
from annularends.annulus import AnnulusDomain
from annularends.catalog import FIELDS, SCENARIOS
from annularends.errors import CriticalLevel, DomainError, ResolutionError, UndeterminedEnd
from annularends.harmonic import ClosedFormField, SampledField
from annularends.levelset import (
    Arc,
    AngularSector,
    EndpointTag,
    LevelSetComplex,
    angular_limit,
    arcs_to_csv,
    check_no_compact_bounding,
    circle_crossings,
    count_ends,
    end_limit_point,
    null_homotopic_loops,
    trace_level,
    trace_regular_level,
)
from annularends.scenario import build_scenario, resolve_field

PUNCT = AnnulusDomain(0.0)


def cf(c=0.0, coeffs=None, R=0.0):
    return ClosedFormField.from_coefficients(c, coeffs or {}, R)


def test_dipole_level_is_two_rays():
    cx = trace_level(cf(0, {-1: 1}), 0.0, PolarGrid(1e-3, 512, 1024))
    assert len(cx.arcs) == 2 and not cx.nodes
    for a in cx.arcs:
        assert {a.start_tag, a.end_tag} == {EndpointTag.OUTER_BOUNDARY, EndpointTag.INNER_LIMIT}
        assert np.max(np.abs(a.points.real)) < 1e-12  # the imaginary axis
    assert count_ends(cx, PUNCT) == 2


def test_log_level_is_one_circle():
    cx = trace_level(cf(1.0), np.log(0.5), PolarGrid(1e-3, 256, 512))
    assert len(cx.arcs) == 1 and cx.arcs[0].closed
    assert np.allclose(np.abs(cx.arcs[0].points), 0.5, atol=1e-4)
    assert cx.arcs[0].winding_number() == 1
    assert count_ends(cx, PUNCT) == 0
    assert check_no_compact_bounding(cx)


def test_re_z_squared_diagonals():
    cx = trace_level(cf(0, {2: 1}), 0.0, PolarGrid(1e-3, 128, 256))
    assert len(cx.arcs) == 4 and not cx.nodes
    angles = sorted(float(np.mod(np.angle(a.points[-1]), 2 * np.pi)) for a in cx.arcs)
    assert np.allclose(angles, np.pi / 4 * np.array([1, 3, 5, 7]), atol=1e-9)


def test_quadrupole_four_ends():
    cx = trace_level(cf(0, {-2: 1}), 0.0, PolarGrid(1e-3, 256, 512))
    assert count_ends(cx, PUNCT) == 4
    assert check_no_compact_bounding(cx)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_level_independence(k):
    f = cf(0.2, {-k: 1.0, 1: 0.3 - 0.1j})
    grid = PolarGrid(1e-3, 256, 512)
    counts = set()
    for t in np.linspace(-2, 2, 7):
        base, near = trace_regular_level(f, float(t), grid)
        counts.update(count_ends(c, PUNCT) for c in (near or [base]))
    assert counts == {2 * k}


def test_critical_level_warns_and_neighbours_are_regular():
    # f = Re(z^2 - z) has a saddle at z = 1/2 with value -1/4
    f = cf(0, {2: 1, 1: -1})
    grid = PolarGrid(1e-3, 256, 512)
    with pytest.warns(CriticalLevel):
        cx = trace_level(f, -0.25, grid)
    assert [n.degree for n in cx.nodes] == [4]
    _, near = trace_regular_level(f, -0.25, grid)
    assert len(near) == 2 and all(not c.nodes for c in near)


def test_coarse_grid_resolution_error():
    f = cf(0, {-5: 1, 2: 1 + 1j})
    with pytest.raises(ResolutionError):
        trace_level(f, -0.5, PolarGrid(0.3, 4, 8))
    trace_level(f, -0.5, PolarGrid(0.3, 64, 256))  # resolves once refined


def test_undetermined_end_for_essential_singularity():
    grid = PolarGrid(0.02, 64, 64)
    f = FIELDS["essential_end"].build(grid, "essential_end")
    with pytest.raises(UndeterminedEnd):
        count_ends(trace_level(f, 0.0, grid), f.domain)


def test_injected_null_homotopic_loop_is_flagged():
    grid = PolarGrid(1e-3, 64, 128)
    cx = trace_level(cf(1.0), np.log(0.5), grid)
    th = np.linspace(0, 2 * np.pi, 33)
    z = 0.7 + 0.01 * np.exp(1j * th)  # tiny loop not enclosing 0
    spurious = Arc(len(cx.arcs), np.log(np.abs(z)), np.unwrap(np.angle(z)), EndpointTag.CLOSED_LOOP,
                   EndpointTag.CLOSED_LOOP)
    bad = LevelSetComplex(cx.level, cx.arcs + [spurious], [], grid)
    assert check_no_compact_bounding(cx)
    assert not check_no_compact_bounding(bad)
    assert null_homotopic_loops(bad) == [spurious.id]


def test_closed_form_catalog_obeys_maximum_principle():
    for name, sc in SCENARIOS.items():
        if sc["field"].get("type") != "builtin" or FIELDS[sc["field"]["name"]].closed_form is None:
            continue
        s = build_scenario({"builtin": name})
        f, _ = resolve_field(s)
        base, _ = trace_regular_level(f, s.level, s.grid)
        assert check_no_compact_bounding(base), name


@pytest.mark.parametrize("name", ["dipole_end", "quadrupole_end", "bounded_end", "log_end", "boundary_pole"])
def test_refinement_stability(name):
    s = build_scenario({"builtin": name})
    f, _ = resolve_field(s)
    counts = [count_ends(trace_regular_level(f, s.level, g)[0], f.domain) for g in (s.grid, s.grid.refined())]
    assert counts[0] == counts[1]


def test_alternation_around_circles():
    f = cf(0.1, {-3: 1.0, -1: 0.5j, 2: 1.0})
    t = 0.4
    cx = trace_level(f, t, PolarGrid(1e-3, 256, 512))
    for r in (0.01, 0.05):
        angles = []
        for a in cx.arcs:
            rr = a.radii
            for k in np.flatnonzero((rr[:-1] - r) * (rr[1:] - r) < 0):
                w = (r - rr[k]) / (rr[k + 1] - rr[k])
                angles.append(np.mod(a.theta[k] + w * (a.theta[k + 1] - a.theta[k]), 2 * np.pi))
        angles = np.sort(angles)
        assert len(angles) == circle_crossings(f, t, r)
        mids = 0.5 * (angles + np.roll(angles, -1) + np.r_[np.zeros(len(angles) - 1), 2 * np.pi])
        signs = np.sign(f(r * np.exp(1j * mids)) - t)
        assert np.all(signs * np.roll(signs, 1) < 0)


def test_end_limit_punctured():
    grid = PolarGrid(1e-3, 128, 256)
    f = cf(0, {-1: 1})
    for a in trace_level(f, 0.0, grid).end_arcs():
        assert end_limit_point(f, a).verdict == "PunctureLimit"


def test_end_limit_boundary_pole_and_spiral():
    grid = PolarGrid(0.2501, 256, 512)
    f = FIELDS["boundary_pole"].build(grid, "boundary_pole")
    ends = [end_limit_point(f, a, t=0.0) for a in trace_level(f, 0.0, grid).end_arcs()]
    assert ends and all(e.verdict == "InnerPointLimit" and abs(e.limit_point - 0.25) < 1e-3 for e in ends)
    s = FIELDS["spiral_end"].build(grid, "spiral_end")
    assert all(end_limit_point(s, a, t=0.0).verdict == "NonConvergent"
               for a in trace_level(s, 0.0, grid).end_arcs())


def test_angular_limit_examples():
    xi = 0.5 * np.exp(1j * np.pi / 3)
    lim = angular_limit(cf(0, {1: 1}, R=0.5), AngularSector(xi, np.pi / 6, 0.25))
    assert abs(lim.value - 0.25) < 1e-6
    lim = angular_limit(cf(1.0, R=0.5), AngularSector(0.5j, np.pi / 4, 0.25))
    assert abs(lim.value - np.log(0.5)) < 1e-6
    pole = SampledField.from_sampler(lambda z: np.real(1 / (z - 0.5)), PolarGrid(0.5001, 16, 32), inner_radius=0.5)
    assert angular_limit(pole, AngularSector(0.5, np.pi / 6, 0.25)).divergent


def test_sector_validation():
    with pytest.raises(DomainError):
        AngularSector(0.5, np.pi / 2, 0.1)
    with pytest.raises(DomainError):
        angular_limit(cf(0, {1: 1}, R=0.5), AngularSector(0.5, np.pi / 6, 0.6))


def test_csv_export():
    cx = trace_level(cf(0, {-1: 1}), 0.0, PolarGrid(1e-2, 32, 64))
    lines = arcs_to_csv(cx).splitlines()
    assert lines[0] == "arc_id,vertex_index,re,im,r,theta"
    assert len(lines) - 1 == sum(a.n_vertices for a in cx.arcs)
    row = lines[1].split(",")
    assert abs(complex(float(row[2]), float(row[3])) - float(row[4]) * np.exp(1j * float(row[5]))) < 1e-12


def test_trace_is_deterministic():
    f = cf(0.3, {-2: 1 + 1j, 1: 0.5})
    g = PolarGrid(1e-3, 128, 256)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert arcs_to_csv(trace_level(f, 0.1, g)) == arcs_to_csv(trace_level(f, 0.1, g))
