import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rslab.errors import InvalidArgumentError, RangeError
from rslab.sums import (ExperimentRecord, a_sum, a_window_sup, delta2_records, delta2_window_sup,
                        fit_exponent, partial_sums_at, records_to_csv, s2_sum, smoothed_sum)
from rslab.weights import SmoothWeight, WeightKind, make_weight


def test_s2_small(small_table):
    assert s2_sum(small_table, 1) == 1.0
    assert s2_sum(small_table, 2) == pytest.approx(1 + (24 / 2**5.5) ** 2, rel=1e-15)
    assert s2_sum(small_table, 2.9) == s2_sum(small_table, 2)


def test_s2_range(small_table):
    with pytest.raises(RangeError):
        s2_sum(small_table, small_table.n_max + 1)
    with pytest.raises(InvalidArgumentError):
        s2_sum(small_table, -1)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 19_999), st.floats(0, 1))
def test_s2_monotone(small_table, x, t):
    y = x + t * (20_000 - x)
    assert 1.0 <= s2_sum(small_table, x) <= s2_sum(small_table, y)


def test_a_sum_brute_force(small_table, small_derived):
    lam = small_table.lam
    brute = sum(lam[n // (d * d)] ** 2 for n in range(1, 1001)
                for d in range(1, math.isqrt(n) + 1) if n % (d * d) == 0)
    assert a_sum(small_derived, 1000) == pytest.approx(brute, rel=1e-12)
    assert a_sum(small_derived, 1) == 1.0


def test_partial_sums_at_matches_direct(small_table):
    lam2 = small_table.lam ** 2
    xs = [17.5, 3.0, 19_000, 1000, 1000]
    got = partial_sums_at(lam2, np.array(xs))
    for x, g in zip(xs, got):
        assert g == pytest.approx(s2_sum(small_table, x), rel=1e-14)


def test_smoothed_degenerate(small_derived):
    W = SmoothWeight(WeightKind.BUMP_V, 1.0, None, 1.0, 5e-7, 9e-7, 1e-7, 1e-7)
    assert smoothed_sum(small_derived, W, 1000) == 0.0


def test_smoothed_sharp_indicator(small_derived):
    # With the indicator of [1/2, 1] in place of W the sum is a difference of sharp sums.
    class Box:
        support = (0.5, 1.0)

        def __call__(self, u):
            return ((u >= 0.5) & (u <= 1.0)).astype(float)

    X = 5001.0
    ref = a_sum(small_derived, X) - a_sum(small_derived, math.ceil(X / 2) - 1)
    assert smoothed_sum(small_derived, Box(), X) == pytest.approx(ref, rel=1e-12)


def test_smoothed_range(small_derived):
    W = make_weight("W1", X=20_000, Y=2000)
    with pytest.raises(RangeError):
        smoothed_sum(small_derived, W, 20_000)


def test_record_identity():
    r = ExperimentRecord.make(10, 4.25, 4.0)
    assert r.delta2 == 4.25 - 4.0


def test_delta2_records(small_table):
    rec = delta2_records(small_table, [100, 1000], 0.38)
    assert rec[1].s2 == pytest.approx(s2_sum(small_table, 1000), rel=1e-14)
    assert rec[1].delta2 == rec[1].s2 - rec[1].main


def test_window_sup_brute(small_table, small_derived):
    c = 0.3841
    lam2 = small_table.lam ** 2
    X = 3000
    best = 0.0
    s = math.fsum(lam2[1:1500])
    best = abs(s - c * 1500)
    for n in range(1500, X + 1):
        best = max(best, abs(s - c * n))
        s += lam2[n]
        best = max(best, abs(s - c * n))
    assert delta2_window_sup(small_table, c, X) == pytest.approx(best, rel=1e-10)
    assert a_window_sup(small_derived, 0.63, X) > 0


def test_fit_exact_powers():
    xs = [1e4, 3e4, 1e5, 3e5, 1e6]
    f = fit_exponent([(x, x**0.5) for x in xs])
    assert abs(f.slope - 0.5) <= 1e-9 and f.r2 == pytest.approx(1.0)
    f = fit_exponent([(x, -3 * x**0.6) for x in xs])
    assert abs(f.slope - 0.6) <= 1e-9
    assert abs(f.intercept - math.log(3)) <= 1e-9


def test_fit_errors():
    with pytest.raises(InvalidArgumentError):
        fit_exponent([(1, 1)] * 4)
    with pytest.raises(InvalidArgumentError):
        fit_exponent([(1, 1), (2, 2), (3, 0), (4, 4), (5, 5)])


def test_records_csv():
    text = records_to_csv([(1.0, 2.0)], ["X", "v"])
    assert text == "X,v\n1.000000000000e+00,2.000000000000e+00\n"
