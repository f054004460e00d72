import numpy as np
import pytest

from annularends import PolarGrid
from annularends.catalog import SCENARIOS
from annularends.conformal import (
    IDEAL,
    INTERIOR,
    annulus_grid,
    classify_type,
    dirichlet_solve,
    full_annulus_mask,
    half_annulus_mask,
    halfspace_cross_check,
    mask_from_level,
    mask_from_predicate,
    mc_harmonic_measure,
    punctured_disk_trend,
    value_at,
    wilson_half_width,
)
from annularends.errors import NumericalNonconvergence, PreconditionError, SeedError
from annularends.harmonic import ClosedFormField
from annularends.runner import run_scenario
from annularends.scenario import build_scenario
from annularends.weierstrass import WeierstrassData

G = annulus_grid(0.25, 64, 128)


def solve_at(mask, z=None):
    return value_at(mask, dirichlet_solve(mask), z)


def test_mask_from_level_examples():
    re_z = ClosedFormField.from_coefficients(0, {1: 1}, 0.25)
    m = mask_from_level(re_z, 0.0, ">=", 0.5, G)
    pts = G.points()[m.interior]
    assert np.all(pts.real >= 0) and m.ideal.any()
    log = ClosedFormField.from_coefficients(1.0, {}, 0.25)
    m = mask_from_level(log, np.log(0.5), "<=", 0.3, G)
    assert np.all(np.abs(G.points()[m.interior]) <= 0.5 + 1e-12)
    assert m.ideal.sum() == G.n_angular  # the whole inner circle is ideal
    dip = ClosedFormField.from_coefficients(0, {-1: 1}, 0.1)
    g = annulus_grid(0.1, 64, 128)
    m = mask_from_level(dip, 0.0, ">=", 0.5, g)
    assert np.all(g.points()[m.interior].real >= 0)


def test_seed_errors():
    re_z = ClosedFormField.from_coefficients(0, {1: 1}, 0.25)
    with pytest.raises(SeedError):
        mask_from_level(re_z, 0.0, ">=", -0.5, G)
    with pytest.raises(SeedError):
        mask_from_level(re_z, 0.0, ">=", 0.5, G, basepoint=-0.5)


def test_full_annulus_solver_accuracy():
    exact = 0.5  # log(1/0.5) / log(1/0.25)
    assert abs(solve_at(full_annulus_mask(annulus_grid(0.25, 128, 256), 0.5)) - exact) < 2e-2
    assert abs(solve_at(full_annulus_mask(annulus_grid(0.25, 256, 512), 0.5)) - exact) < 5e-3
    u = dirichlet_solve(full_annulus_mask(G, 0.5))
    s = np.log(G.radii)
    assert np.allclose(u[1:-1], (s[-1] - s[1:-1, None]) / (s[-1] - s[0]), atol=1e-8)


def test_empty_ideal_boundary():
    m = mask_from_predicate(lambda z: np.abs(z) >= 0.5, 0.7, G)
    assert not m.ideal.any()
    assert np.all(dirichlet_solve(m) == 0)
    assert mc_harmonic_measure(m, walks=10_000).value == 0.0


def test_half_annulus_between_zero_and_full():
    for g in (G, G.refined()):
        u = solve_at(half_annulus_mask(g))
        assert 0 < u < solve_at(full_annulus_mask(g, 0.5))


def test_maximum_principle():
    for m in (full_annulus_mask(G, 0.5), half_annulus_mask(G),
              mask_from_predicate(lambda z: np.abs(np.angle(z)) <= np.pi / 5, 0.5, G)):
        u = dirichlet_solve(m)
        assert u.min() >= 0 and u.max() <= 1


def test_domain_monotonicity():
    sector = mask_from_predicate(lambda z: np.abs(np.angle(z)) <= np.pi / 4, 0.5, G)
    half = half_annulus_mask(G)
    full = full_annulus_mask(G, 0.5)
    assert np.all(sector.interior <= half.interior) and np.all(half.interior <= full.interior)
    us = [solve_at(m) for m in (sector, half, full)]
    assert us[0] <= us[1] <= us[2]


def test_nonconvergence_reported():
    with pytest.raises(NumericalNonconvergence):
        dirichlet_solve(half_annulus_mask(G), max_iters=3)


def test_classify_examples():
    assert classify_type(full_annulus_mask(G, 0.5)).verdict == "Hyperbolic"
    rep = classify_type(half_annulus_mask(G))
    assert rep.verdict == "Hyperbolic" and rep.resolutions == ((64, 128), (127, 256))
    assert all(0 <= u <= 1 for u in rep.u_values)


def test_punctured_trend():
    tr = punctured_disk_trend(0.5, (1e-2, 1e-3, 1e-4))
    exact = [np.log(0.5) / np.log(e) for e in tr.eps]
    assert np.allclose(tr.u_values, exact, rtol=0.05)
    assert np.all(np.diff(tr.u_values) < 0)
    assert abs(tr.fitted_c - np.log(2)) < 0.2 * np.log(2)
    assert all(u < 1.2 * tr.fitted_c / np.log(1 / e) for u, e in zip(tr.u_values, tr.eps))
    assert tr.verdict == "Parabolic"


def test_mc_full_annulus_and_determinism():
    m = full_annulus_mask(G, 0.5)
    a = mc_harmonic_measure(m, walks=100_000, seed=7)
    b = mc_harmonic_measure(m, walks=100_000, seed=7)
    c = mc_harmonic_measure(m, walks=100_000, seed=8)
    assert abs(a.value - 0.5) < 0.02
    assert a == b and a.value != c.value
    assert a.half_width == pytest.approx(wilson_half_width(a.value, a.walks))
    assert a.censored == 0 and not a.flagged


def test_mc_sub_annulus():
    log = ClosedFormField.from_coefficients(1.0, {}, 0.25)
    m = mask_from_level(log, np.log(0.5), "<=", 0.3, annulus_grid(0.25, 128, 64), basepoint=0.35)
    exact = np.log(0.5 / 0.35) / np.log(0.5 / 0.25)
    assert abs(mc_harmonic_measure(m, walks=20_000, seed=1).value - exact) < 0.02


def test_mc_preconditions():
    with pytest.raises(PreconditionError):
        mc_harmonic_measure(full_annulus_mask(G, 0.5), walks=100)


def test_solver_and_mc_agree_on_catalog_masks():
    names = [n for n, s in SCENARIOS.items()
             if "conformal-type" in s["analyses"] and s["params"]["conformal-type"].get("mode") == "classify"]
    assert len(names) >= 4
    for name in names:
        sc = build_scenario({"builtin": name})
        p = sc.params["conformal-type"]
        res = run_scenario(sc).results["conformal-type"]["conformal_type"]
        mc_grid = PolarGrid(sc.grid.r_min, *p["mc_grid"], sc.grid.r_max)
        if p.get("mask") == "full":
            mask = full_annulus_mask(mc_grid, complex(*p["basepoint"]))
        else:
            mask = build_mask(sc, mc_grid)
        u_same_grid = solve_at(mask)
        assert abs(u_same_grid - res["u_mc"]) < max(0.03, 2 * res["half_width"]), name
        assert abs(res["u_solver"] - res["u_mc"]) < max(0.03, 2 * res["half_width"]) + 0.02, name


def build_mask(sc, grid):
    from annularends.scenario import resolve_field

    p = sc.params["conformal-type"]
    f, _ = resolve_field(sc)
    bp = complex(*p["basepoint"]) if "basepoint" in p else None
    return mask_from_level(f, sc.level, p["side"], complex(*p["seed"]), grid, basepoint=bp)


def test_halfspace_examples():
    cat = WeierstrassData.from_json(SCENARIOS["catenoid_end"]["field"])
    rep = halfspace_cross_check(cat, -1.0)
    assert not rep["contradiction"]
    inner = rep["sides"]["<="][0]
    assert inner["halfspace_confined"] and inner["reaches_puncture"] and inner["verdict"] == "Parabolic"
    planar = WeierstrassData.from_json(SCENARIOS["planar_end"]["field"])
    rep = halfspace_cross_check(planar, 2.0)
    assert rep["sides"][">="] == [] and any("vacuous" in n for n in rep["notes"])
    # non-minimal control: a half-annulus with a genuine inner circle is hyperbolic
    assert classify_type(half_annulus_mask(annulus_grid(0.25, 64, 128))).verdict == "Hyperbolic"


def test_roles_partition():
    m = half_annulus_mask(G)
    i, j = np.nonzero(m.roles == INTERIOR)
    NA = G.n_angular
    for a, b in ((i + 1, j), (i - 1, j), (i, (j + 1) % NA), (i, (j - 1) % NA)):
        assert np.all(m.roles[a, b] != 0)  # neighbours are interior or boundary
    assert np.all(np.nonzero(m.roles == IDEAL)[0] == 0)
