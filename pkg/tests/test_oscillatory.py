import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rslab.errors import AccuracyError, DomainError, NoStationaryPointError
from rslab.oscillatory import (TWO_PI, InertWeight, PhaseSpec, absolute_mass, adaptive_integral,
                               compare_stationary, composite_gauss_rule, dual_spectrum,
                               find_stationary_point, fourier_transform, linear_phase,
                               model_stationary_case, nonstationary_decay_check,
                               oscillatory_integral, poisson_sum, predict_dual_range,
                               quadratic_phase, quartic_root_phase, stationary_phase_leading)
from rslab.weights import make_weight

S = 0.3


def gaussian(centre=1.0, s=S):
    return InertWeight(lambda x: np.exp(-0.5 * ((x - centre) / s) ** 2),
                       centre - 12 * s, centre + 12 * s)


def test_no_oscillation():
    w = gaussian()
    I = oscillatory_integral(w, linear_phase(0.0))
    assert I.real == pytest.approx(S * math.sqrt(TWO_PI), rel=1e-12)
    assert abs(I.imag) < 1e-15


@pytest.mark.parametrize("c", [0.5, 7.0, -40.0, 300.0])
def test_gaussian_fourier_closed_form(c):
    I = oscillatory_integral(gaussian(), linear_phase(c))
    exact = S * math.sqrt(TWO_PI) * cmath.exp(1j * c - 0.5 * (c * S) ** 2)
    assert abs(I - exact) <= 1e-8


@pytest.mark.parametrize("Y", [1e2, 1e3, 1e4])
def test_fresnel_closed_form(Y):
    w, h = model_stationary_case("quadratic", Y)
    I = oscillatory_integral(w, h)
    exact = cmath.sqrt(math.pi / (1 / (2 * S * S) - 1j * Y))
    assert abs(I - exact) <= 1e-10 * abs(exact)
    lead = stationary_phase_leading(w, h)
    assert abs(lead - math.sqrt(math.pi / Y) * cmath.exp(1j * math.pi / 4)) <= 1e-13


@pytest.mark.parametrize("kind", ["quadratic", "quartic"])
@pytest.mark.parametrize("Y", [1e2, 1e3, 1e4])
def test_stationary_relative_error(kind, Y):
    r = compare_stationary(kind, Y)
    assert r.rel_error <= 5 / Y


def test_stationary_error_first_order():
    errs = [compare_stationary("quadratic", Y).rel_error * Y for Y in (1e2, 3e2, 1e3, 3e3, 1e4)]
    assert max(errs) / min(errs) < 1.01


def test_quartic_second_derivative_is_Y():
    w, h = model_stationary_case("quartic", 1234.0)
    assert find_stationary_point(h, w.a, w.b) == pytest.approx(1.0, abs=1e-12)
    assert float(h.d2(np.array([1.0]))[0]) == pytest.approx(1234.0, rel=1e-14)


def test_symmetric_imaginary_part():
    # After removing e^{iπ/4} the imaginary part is only the O(1/Y) correction.
    rel = []
    for Y in (1e3, 1e4):
        w, h = model_stationary_case("quadratic", Y)
        rot = oscillatory_integral(w, h) * cmath.exp(-1j * math.pi / 4)
        rel.append(abs(rot.imag) / abs(rot))
        assert rel[-1] <= 5 / Y
    assert rel[1] == pytest.approx(rel[0] / 10, rel=0.01)


def test_no_stationary_point():
    with pytest.raises(NoStationaryPointError):
        stationary_phase_leading(gaussian(), quadratic_phase(100.0, 10.0))


def test_second_derivative_sign_change():
    h = PhaseSpec(h=lambda x: 100 * (x - 1) ** 3, dh=lambda x: 300 * (x - 1) ** 2,
                  d2h=lambda x: 600 * (x - 1), Y=100)
    with pytest.raises(DomainError):
        stationary_phase_leading(gaussian(), h)


@pytest.mark.parametrize("A", [1, 2, 3])
def test_decay_linear_gaussian(A):
    w = gaussian(s=0.1)
    r = nonstationary_decay_check(w, linear_phase(20.0), A)
    assert r.ok


def test_decay_requires_nonvanishing_derivative():
    with pytest.raises(DomainError):
        nonstationary_decay_check(gaussian(), quadratic_phase(50.0, 1.0), 1)


def test_far_dual_frequency_negligible():
    # ℓ-integral of the large-L analysis with ℓ far outside the T/L window.
    L, T = 16, 256
    U = make_weight("DYADIC_W")
    w = InertWeight(U, 0.5, 2.0)
    A = -4 * T
    lo, hi = predict_dual_range(L, T)
    for ell in (4 * int(hi), 1):
        assert not lo <= ell <= hi
        h = quartic_root_phase(A, -ell * L)
        I = oscillatory_integral(w, h, abs_tol=1e-11)
        assert abs(I) <= 1e-8  # Z = 1 after rescaling y = Lξ


def test_linearity_and_triangle():
    w1, w2 = gaussian(1.0, 0.2), gaussian(1.3, 0.1)
    both = InertWeight(lambda x: w1(x) + w2(x), min(w1.a, w2.a), max(w1.b, w2.b))
    h = quadratic_phase(300.0, 1.1)
    lhs = oscillatory_integral(both, h)
    rhs = oscillatory_integral(InertWeight(w1.w, both.a, both.b), h) + \
        oscillatory_integral(InertWeight(w2.w, both.a, both.b), h)
    assert abs(lhs - rhs) <= 1e-12
    assert abs(lhs) <= absolute_mass(both)


@settings(max_examples=25, deadline=None)
@given(st.floats(-500, 500), st.floats(0.05, 0.5))
def test_triangle_property(c, s):
    w = gaussian(1.0, s)
    assert abs(oscillatory_integral(w, linear_phase(c))) <= absolute_mass(w) * (1 + 1e-12)


def test_budget_exhaustion():
    with pytest.raises(AccuracyError) as exc:
        adaptive_integral(lambda x: np.exp(1e5j * x), [0.0, 1.0], rel_tol=1e-12,
                          abs_tol=1e-300, max_panels=50)
    assert exc.value.estimate is not None


def test_composite_rule_against_adaptive():
    W = make_weight("DYADIC_W")
    w = InertWeight(lambda x: W(x) ** 2, 0.5, 2.0)
    for B, k, M in [(30.0, 1, 64), (100.0, 1, 64), (5.0, 0, 64)]:
        ref = oscillatory_integral(w, quartic_root_phase(4 * B, -k * M))
        nodes, qw = composite_gauss_rule(0.5, 2.0, TWO_PI * (B * 0.5**-0.75 + k * M))
        val = (W(nodes) ** 2 * qw) @ np.exp(TWO_PI * 1j * (4 * B * nodes**0.25 - k * M * nodes))
        assert abs(val - ref) <= 1e-13


def test_inert_violations():
    W = make_weight("DYADIC_W")
    # x^3 W''' reaches about 290, so the dyadic weight is inert only at scale 4.
    assert InertWeight(W, 0.5, 2.0, 4.0).inert_violations() == []
    assert 3 in InertWeight(W, 0.5, 2.0, 1.0).inert_violations()
    spiky = InertWeight(lambda x: np.exp(-((x - 1) / 0.01) ** 2), 0.5, 2.0)
    assert spiky.inert_violations() != []


def test_poisson_gaussian_self_dual():
    s = 2.0
    f = lambda x: np.exp(-math.pi * np.asarray(x) ** 2 / s) + 0j
    fhat = lambda m: math.sqrt(s) * math.exp(-math.pi * s * m * m)
    r = poisson_sum(f, fhat)
    theta = math.fsum(math.exp(-math.pi * n * n / s) for n in range(-30, 31))
    assert abs(r.lhs - theta) <= 1e-10 * theta
    assert abs(r.lhs - r.rhs) <= 1e-10 * abs(r.lhs)


def test_poisson_numeric_transform():
    U = make_weight("BUMP_U", support=(0.5, 12.5), P=1.0)
    f = lambda x: U(np.asarray(x, dtype=float)) + 0j
    r = poisson_sum(f, support=(0.5, 12.5), m_range=range(-40, 41))
    assert abs(r.lhs - r.rhs) <= 1e-10 * abs(r.lhs)
    assert r.fhat[40].real == pytest.approx(
        sum(np.asarray([fourier_transform(f, (0.5, 12.5), 0)]).real), rel=1e-12)
    mags = np.abs(r.fhat)
    m = np.abs(r.frequencies)
    # Rising and falling ramps of unit length sum to one under integer shifts,
    # so the transform vanishes at every nonzero integer.
    assert mags[m > 0].max() <= 1e-13 * mags.max()


def test_bump_transform_zero_and_decay():
    U = make_weight("BUMP_U")
    f = lambda x: U(np.asarray(x, dtype=float)) + 0j
    from rslab.weights import mellin_at_1
    assert fourier_transform(f, U.support, 0).real == pytest.approx(mellin_at_1(U), rel=1e-10)
    vals = [abs(fourier_transform(f, U.support, m)) for m in (1.5, 3.5, 7.5, 15.5)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= 1e-5 * vals[0]


def test_fft_spectrum_matches_quadrature():
    L, T = 16, 2048
    U = make_weight("DYADIC_W")
    f = lambda y: U(y / L) * np.exp(-2j * math.pi * 4 * T * (y / L) ** 0.25)
    sup = (8.0, 32.0)
    for m in (-128, -300, -20, 40):
        assert abs(fourier_transform(f, sup, m) - dual_spectrum(f, sup, [m])[0]) <= 5e-11


def test_predict_dual_range():
    assert predict_dual_range(10, 1000) == (12.5, 800)
    lo, hi = predict_dual_range(20, 1000)
    assert (lo, hi) == (12.5 / 2, 400)
    with pytest.raises(Exception):
        predict_dual_range(0, 1)


def test_dual_mass_concentration():
    L, T = 16, 2048
    U = make_weight("DYADIC_W")
    f = lambda y: U(y / L) * np.exp(-2j * math.pi * 4 * T * (y / L) ** 0.25)
    ms = np.arange(-4096, 4097)
    spec = np.abs(dual_spectrum(f, (8.0, 32.0), ms))
    lo, hi = predict_dual_range(L, T)
    inside = (np.abs(ms) >= lo) & (np.abs(ms) <= hi)
    assert spec[~inside].sum() <= 1e-6 * spec.sum()
    assert spec[~inside].max() <= 1e-8 * spec.max()
