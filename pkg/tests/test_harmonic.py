import numpy as np
import pytest

from annularends import PolarGrid
from annularends.errors import DomainError, PreconditionError
from annularends.harmonic import (
    ClosedFormField,
    SampledField,
    eval_f,
    flux,
    gradient_norm,
    omega_of,
    omega_period,
)


def cf(c=0.0, **coeffs):
    return ClosedFormField.from_coefficients(c, {int(k[1:].replace("m", "-")): v for k, v in coeffs.items()})


LOG = cf(1.0)
RE_Z = cf(a1=1.0)


def test_eval_examples():
    assert eval_f(LOG, 0.5) == pytest.approx(np.log(0.5))
    assert eval_f(RE_Z, 0.3 + 0.4j) == pytest.approx(0.3)
    assert eval_f(cf(2.0, am1=1.0), 0.5j) == pytest.approx(2 * np.log(0.5), abs=1e-14)


def test_eval_out_of_domain():
    f = ClosedFormField.from_coefficients(1.0, {}, inner_radius=0.25)
    with pytest.raises(DomainError):
        eval_f(f, 0.1)
    with pytest.raises(DomainError):
        eval_f(LOG, 1.5)


def test_omega_examples():
    assert omega_of(RE_Z).coeff_series.to_dict() == {0: 1}
    assert omega_of(LOG).coeff_series.to_dict() == {-1: 1}
    assert omega_of(cf(am2=1.0)).coeff_series.to_dict() == {-3: -2}


def test_omega_constant_shift():
    f = cf(0.3, am2=1 - 1j, a2=0.5)
    assert omega_of(f.shifted(4.2)).coeff_series.to_dict() == omega_of(f).coeff_series.to_dict()


def test_omega_reproduces_df():
    f = cf(0.7, am2=1 - 1j, a1=0.4j, a3=0.5)
    w = omega_of(f)
    z = 0.6 * np.exp(1j * np.linspace(0, 6, 7))
    for d in (1, 1j, np.exp(0.3j)):
        h = 1e-6
        fd = (f(z + h * d) - f(z - h * d)) / (2 * h)
        assert np.allclose(np.real(w(z) * d), fd, atol=1e-8)


def test_sampled_omega():
    g = PolarGrid(0.05, 64, 256)
    exact = cf(0.5, am1=2.0, a2=1j)
    s = SampledField.from_sampler(exact, g)
    got = omega_of(s).coeff_series.to_dict()
    want = omega_of(exact).coeff_series.to_dict()
    assert set(got) == set(want)
    assert all(abs(got[m] - want[m]) < 1e-8 for m in want)


def test_sampled_without_sampler_refuses_omega():
    g = PolarGrid(0.05, 16, 64)
    s = SampledField(g, RE_Z.grid_values(g))
    with pytest.raises(PreconditionError):
        omega_of(s)


@pytest.mark.parametrize("f, r, expected", [(LOG, 0.7, 2 * np.pi), (RE_Z, 0.5, 0.0)])
def test_flux_examples(f, r, expected):
    assert flux(f, r).value == pytest.approx(expected, abs=1e-12)


def test_flux_mixed_matches_high_order_quadrature():
    f = cf(3.0, am1=1.0)
    for r in (0.3, 0.9):
        assert abs(flux(f, r).value - 6 * np.pi) < 1e-9
        assert abs(flux(f, r, n_nodes=4096).value - flux(f, r).value) < 1e-9


def test_flux_contour_independent_and_conjugate_period():
    f = cf(-1.3, am3=0.2, am1=1j, a2=2.0)
    vals = [flux(f, r).value for r in (0.2, 0.5, 1.0)]
    assert np.ptp(vals) < 1e-8
    per = omega_period(f, 0.4)
    assert abs(per.real) < 1e-8 and abs(per.imag - vals[0]) < 1e-8


def test_flux_domain_error():
    with pytest.raises(DomainError):
        flux(ClosedFormField.from_coefficients(1.0, {}, inner_radius=0.5), 0.4)


def test_gradient_norm_examples():
    assert gradient_norm(RE_Z, 0.2 - 0.7j) == pytest.approx(1)
    assert gradient_norm(LOG, 0.5j) == pytest.approx(2)
    assert gradient_norm(cf(a2=1.0), 0.5) == pytest.approx(1)


def test_discrete_laplacian_of_closed_forms():
    f = cf(0.4, am2=1.0, a3=1 - 1j)
    res = [SampledField.from_sampler(f, PolarGrid(0.2, n, 2 * n)).harmonic_residual() for n in (64, 128)]
    assert res[0] < 1e-2
    assert res[1] < res[0] / 3  # second-order consistency
