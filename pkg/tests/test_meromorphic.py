import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from annularends import PolarGrid, trace_level
from annularends.catalog import FIELDS
from annularends.errors import InsufficientResolution, PreconditionError
from annularends.harmonic import ClosedFormField, SampledField, omega_of
from annularends.levelset import Arc, EndpointTag
from annularends.meromorphic import (
    arc_df_integral,
    check_end_pole_relation,
    classify_boundedness,
    empirical_bounded,
    pole_order,
    pole_report,
)


def cf(c=0.0, coeffs=None):
    return ClosedFormField.from_coefficients(c, coeffs or {})


@pytest.mark.parametrize("field, p, ends", [
    (cf(0, {1: 1}), 0, 0),
    (cf(1.0), 1, 0),
    (cf(0, {-3: 1}), 4, 6),
])
def test_pole_order_examples(field, p, ends):
    rep = pole_order(omega_of(field))
    assert rep.pole_order == p and rep.predicted_end_count == ends


def test_principal_part_reported():
    rep = pole_report(cf(0.5, {-2: 1j, 3: 1}))
    assert set(rep.principal_coefficients) == {-3, -1}
    assert rep.principal_coefficients[-3] == pytest.approx(-2j)
    assert rep.to_dict()["principal_coefficients"][0] == [-3, 0.0, -2.0]


def test_end_pole_relation_examples():
    g = PolarGrid(1e-3, 256, 512)
    rel = check_end_pole_relation(cf(0, {-1: 1}), [-1.0, 0.0, 0.7], g)
    assert rel["passed"] and rel["pole_order"] == 2 and [c for _, c in rel["counts"]] == [2, 2, 2]
    rel = check_end_pole_relation(cf(0.3, {-2: 1}), [0.0, 1.0], PolarGrid(1e-3, 1024, 2048))
    assert rel["passed"] and rel["pole_order"] == 3 and {c for _, c in rel["counts"]} == {4}
    rel = check_end_pole_relation(cf(1.0), [-0.5, -2.0], g)
    assert rel["passed"] and rel["pole_order"] == 1
    rel = check_end_pole_relation(cf(0, {1: 1}), [0.0], g)
    assert rel["passed"] is None and rel["counts"][0][1] == 2  # recorded, not judged


def test_end_pole_relation_needs_puncture():
    f = ClosedFormField.from_coefficients(0, {1: 1}, inner_radius=0.5)
    with pytest.raises(PreconditionError):
        check_end_pole_relation(f, [0.0], PolarGrid(0.51, 16, 32))


def test_boundedness_examples():
    assert classify_boundedness(cf(0, {1: 1})).kind == "Bounded"
    v = classify_boundedness(cf(0, {-1: 1}))
    assert (v.kind, v.order) == ("UnboundedPole", 2)
    ess = FIELDS["essential_end"].build(PolarGrid(0.02, 64, 64), "e")
    assert classify_boundedness(ess).kind == "EssentialSuspected"


def test_sampled_dipole_via_quadrature():
    f = SampledField.from_sampler(lambda z: np.real(1 / z), PolarGrid(0.05, 32, 64))
    assert pole_report(f).pole_order == 2


def test_empirical_boundedness():
    assert empirical_bounded(cf(0, {1: 1, 3: 2j}))
    assert not empirical_bounded(cf(0, {-1: 1}))
    assert not empirical_bounded(cf(0.1))


def test_arc_integral_examples():
    g = PolarGrid(1e-3, 256, 512)
    b = cf(0, {1: 1})
    res = arc_df_integral(b, trace_level(b, 0.0, g).end_arcs()[0], grid=g)
    assert res.finite and abs(res.value - 1) < 1e-2
    assert classify_boundedness(b).kind == "Bounded"  # 1(c) direction
    d = cf(0, {-1: 1})
    res = arc_df_integral(d, trace_level(d, 0.0, g).end_arcs()[0], grid=g)
    assert not res.finite and res.value is None
    tail = np.array(res.contributions[-6:])
    assert np.all(tail[1:] > tail[:-1])  # grows like 1/r
    assert trace_level(cf(1.0), -1.0, g).end_arcs() == []  # log|z|: nothing to integrate


def test_arc_integral_short_arc():
    arc = Arc(0, np.log(np.array([0.5, 0.4])), np.zeros(2), EndpointTag.OUTER_BOUNDARY, EndpointTag.INNER_LIMIT)
    with pytest.raises(InsufficientResolution):
        arc_df_integral(cf(0, {1: 1}), arc, schedule=np.geomspace(0.5, 0.01, 8))


coeff = st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(-6, -1), coeff, st.dictionaries(st.integers(0, 6), coeff, max_size=4),
       st.floats(-3, 3), st.floats(0.01, 100).map(lambda x: x if x else 1.0), st.booleans())
def test_pole_order_invariances(m, a, bounded, const, lam, neg):
    f = cf(0, {m: a})
    p = pole_report(f).pole_order
    perturbed = ClosedFormField(0, f.analytic_part + cf(0, bounded).analytic_part)
    scale = -lam if neg else lam
    assert p == 1 - m
    assert pole_report(perturbed).pole_order == p
    assert pole_report(f.shifted(const)).pole_order == p
    assert pole_report(f.scaled(scale)).pole_order == p
