import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rslab.errors import InvalidArgumentError
from rslab.weights import (BUMP_MASS, WeightKind, make_weight, mellin_at_1, step,
                           step_derivative, step_derivative_max)


def test_bump_mass_quad():
    from scipy import integrate
    val, _ = integrate.quad(lambda t: math.exp(-1 / (t * (1 - t))), 0, 1, epsabs=1e-15)
    assert BUMP_MASS == pytest.approx(val, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 1.5))
def test_step_symmetry_and_range(t):
    s = float(step(t))
    assert 0.0 <= s <= 1.0
    assert s + float(step(1 - t)) == pytest.approx(1.0, abs=1e-15)


def test_step_monotone():
    v = step(np.linspace(0, 1, 5001))
    assert np.all(np.diff(v) >= 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_step_derivatives_finite_difference(k):
    t = np.linspace(0.05, 0.95, 37)
    h = 1e-4
    num = (step_derivative(t + h, k - 1) - step_derivative(t - h, k - 1)) / (2 * h)
    ana = step_derivative(t, k)
    assert np.max(np.abs(num - ana)) <= 1e-5 * step_derivative_max(k)


def test_w1_examples():
    W = make_weight("W1", X=1.0, Y=0.1)
    assert W(0.75) == 1.0
    assert W(0.3) == 0.0
    assert W(0.5) == 1.0 and W(1.0) == 1.0
    assert W(1.1) == 0.0 and W(0.4) == 0.0


def test_w2_support():
    W = make_weight("W2", X=1.0, Y=0.1)
    assert W(0.5) == 0.0 and W(1.0) == 0.0
    assert W(0.6) == 1.0 and W(0.9) == 1.0
    assert W.support == (0.5, 1.0)


@pytest.mark.parametrize("kind", ["W1", "W2"])
@pytest.mark.parametrize("ratio", [0.2, 0.05, 0.01])
def test_derivative_bounds(kind, ratio):
    W = make_weight(kind, X=1000.0, Y=1000.0 * ratio)
    assert W.derivative_scale == pytest.approx(1 / ratio)
    assert W.derivative_violations(n_grid=10_000) == []


def test_w1_slope_constant():
    W = make_weight("W1", X=1.0, Y=0.05)
    u = np.linspace(0.4, 1.1, 10_000)
    assert np.max(np.abs(W.derivative(u, 1))) <= step_derivative_max(1) * 20 * (1 + 1e-9)


def test_sandwich():
    u = np.linspace(0.3, 1.3, 10_001)
    ind = ((u >= 0.5) & (u <= 1.0)).astype(float)
    for r in (0.2, 0.03):
        assert np.all(make_weight("W2", 1.0, r)(u) <= ind)
        assert np.all(ind <= make_weight("W1", 1.0, r)(u))


@pytest.mark.parametrize("Y", [0.0, -1.0, 0.21, None])
def test_bad_y(Y):
    with pytest.raises(InvalidArgumentError):
        make_weight("W1", X=1.0, Y=Y)


def test_dyadic_partition_of_unity():
    W = make_weight(WeightKind.DYADIC_W)
    n = np.arange(1, 5000)
    total = sum(W(n / 2.0**j) for j in range(0, 14))
    assert np.max(np.abs(total - 1)) <= 1e-14
    assert W.support == (0.5, 2.0)


def test_dyadic_derivatives():
    W = make_weight("DYADIC_W")
    assert W.derivative_violations() == []
    u = np.linspace(0.55, 1.9, 29)
    h = 1e-5
    for k in (1, 2, 3):
        num = (W.derivative(u + h, k - 1) - W.derivative(u - h, k - 1)) / (2 * h)
        assert np.max(np.abs(num - W.derivative(u, k))) <= 1e-4 * (1 + np.max(np.abs(num)))


def test_bump_scale():
    V = make_weight("BUMP_V", P=4.0)
    assert V.support == (0.5, 1.0)
    assert V.derivative_scale == pytest.approx(8 / 0.5 * 0.5 * 2)  # ramp (1/2)/(2P)
    assert V.derivative_violations() == []
    with pytest.raises(InvalidArgumentError):
        make_weight("BUMP_V", P=0.5)


def test_mellin_w1():
    W = make_weight("W1", X=1.0, Y=0.05)
    m = mellin_at_1(W)
    assert abs(m - 0.5) <= 0.05 + 1e-12
    assert m == pytest.approx(0.55, abs=1e-12)  # symmetric ramps: 1/2 + Y/X exactly


def test_mellin_w2_below_half():
    for r in (0.2, 0.05, 0.001):
        assert mellin_at_1(make_weight("W2", 1.0, r)) <= 0.5


def test_mellin_riemann_oracle():
    W = make_weight("W1", X=1.0, Y=0.2)
    a, b = W.support
    n = 10**6
    x = a + (np.arange(n) + 0.5) * (b - a) / n
    riemann = math.fsum(W(x)) * (b - a) / n
    assert abs(mellin_at_1(W) - riemann) <= 1e-8
