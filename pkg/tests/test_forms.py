import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import naive_tau
from rslab.errors import FormatError, InvalidArgumentError
from rslab.forms import (FourierTable, build_fourier_table, divisor_counts,
                         euler_product, load_table, mobius, normalizer, save_table, series_mul)


def primes_upto(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def test_tau_one():
    t = build_fourier_table(1)
    assert t.tau[1:] == [1]
    assert t.lam[1] == 1.0


def test_tau_two_matches_naive():
    assert build_fourier_table(2).tau[2] == -24 == naive_tau(2)[2]


def test_tau_six_multiplicative():
    t = build_fourier_table(6)
    assert t.tau[6] == t.tau[2] * t.tau[3]
    assert t.tau[1:] == naive_tau(6)[1:]


def test_known_values():
    t = build_fourier_table(12)
    assert t.tau[1:] == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643,
                         -115920, 534612, -370944]


def test_naive_oracle_200():
    assert build_fourier_table(200).tau == naive_tau(200)


def test_zero_rejected():
    with pytest.raises(InvalidArgumentError):
        build_fourier_table(0)


def test_euler_product_pentagonal():
    # (1-q)(1-q^2)(1-q^3)... = 1 - q - q^2 + q^5 + q^7 - ...
    e = euler_product(16)
    assert e == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0, -1]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=30),
       st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=30))
def test_series_mul_schoolbook(a, b):
    length = max(len(a), len(b))
    ref = [sum(a[i] * b[k - i] for i in range(k + 1) if i < len(a) and k - i < len(b))
           for k in range(length)]
    assert series_mul(a, b, length) == ref


def test_hecke_relations(small_table):
    t = small_table.tau
    n = small_table.n_max
    for m in range(2, int(n**0.5) + 1):
        for k in range(m + 1, n // m + 1):
            if math.gcd(m, k) == 1:
                assert t[m * k] == t[m] * t[k]
    for p in primes_upto(n):
        p = int(p)
        pk = p
        prev, cur = 1, t[p]
        while pk * p <= n:
            nxt = t[pk * p]
            assert nxt == t[p] * cur - p**11 * prev
            prev, cur, pk = cur, nxt, pk * p


def test_deligne_bound(small_table):
    d = divisor_counts(small_table.n_max)
    assert np.all(np.abs(small_table.lam[1:]) <= d[1:] * (1 + 1e-12))


def test_normalizer_accuracy():
    for n in (2, 3, 997, 10**6 + 3, 2**20):
        exact = math.isqrt(n**11 * 10**40)  # sqrt(n^11) * 1e20
        assert abs(normalizer(n) * 1e20 - exact) <= 2e-16 * exact * 2


def test_mobius_small():
    assert list(mobius(12)[1:]) == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]


def test_derived_examples(small_table, small_derived):
    lam = small_table.lam
    assert small_derived.a1n[1] == 1.0
    assert small_derived.a1n[2] == pytest.approx(lam[2] ** 2 - 1, abs=1e-14)
    lhs = sum(small_derived.a1n[d] for d in (1, 2, 3, 4, 6, 12))
    rhs = lam[12] ** 2 + lam[3] ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_derived_brute_force(small_table, small_derived):
    lam = small_table.lam
    for n in range(1, 600):
        rs = sum(lam[n // (d * d)] ** 2 for d in range(1, math.isqrt(n) + 1) if n % (d * d) == 0)
        a1n = sum(mobius(n)[d] * rs_of(lam, n // d) for d in range(1, n + 1) if n % d == 0)
        iso = sum(small_derived.a1n[m] for m in range(1, n + 1) if n % m == 0)
        assert small_derived.rs[n] == pytest.approx(rs, rel=1e-12, abs=1e-12)
        assert small_derived.a1n[n] == pytest.approx(a1n, rel=1e-9, abs=1e-11)
        assert small_derived.iso[n] == pytest.approx(iso, rel=1e-12, abs=1e-12)


def rs_of(lam, n):
    return sum(lam[n // (d * d)] ** 2 for d in range(1, math.isqrt(n) + 1) if n % (d * d) == 0)


def test_iso_equals_rs(small_derived):
    rs, iso = small_derived.rs, small_derived.iso
    assert np.all(np.abs(iso[1:] - rs[1:]) <= 1e-9 * np.maximum(1.0, np.abs(rs[1:])))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 140), st.integers(1, 140))
def test_a1n_multiplicative(small_derived, m, n):
    if math.gcd(m, n) != 1:
        return
    a = small_derived.a1n
    assert a[m * n] == pytest.approx(a[m] * a[n], rel=1e-9, abs=1e-9)


def test_rs3_partial_sums(small_derived):
    from rslab import constants
    s = np.cumsum(small_derived.a1n[1:] ** 2)
    n = np.arange(1, len(s) + 1, dtype=float)
    assert np.all(s <= constants.RS3_CONSTANT * n**constants.RS3_EXPONENT * (1 + 1e-12))


def test_round_trip(tmp_path):
    t = build_fourier_table(10)
    save_table(t, tmp_path / "t.txt")
    back = load_table(tmp_path / "t.txt")
    assert back == t and back.tau == t.tau
    text = (tmp_path / "t.txt").read_text()
    assert text.startswith("RSLAB-TAU v1\nn_max=10\n1,1\n2,-24\n")
    assert text.endswith("10,-115920\n") and not text.endswith("\n\n")


def test_load_single_row(tmp_path):
    p = tmp_path / "one.txt"
    p.write_text("RSLAB-TAU v1\nn_max=1\n1,1\n")
    t = load_table(p)
    assert t.n_max == 1 and t.tau[1] == 1


@pytest.mark.parametrize("body, line", [
    ("RSLAB-TAU v2\nn_max=1\n1,1\n", 1),
    ("RSLAB-TAU v1\nn=1\n1,1\n", 2),
    ("RSLAB-TAU v1\nn_max=3\n1,1\n2,-24\n", 4),
    ("RSLAB-TAU v1\nn_max=2\n1,1\n2,x\n", 4),
])
def test_load_errors(tmp_path, body, line):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(FormatError, match=f"line {line}"):
        load_table(p)


def test_load_truncated(tmp_path):
    t = build_fourier_table(10)
    p = tmp_path / "t.txt"
    save_table(t, p)
    p.write_text(p.read_text()[:-4])
    with pytest.raises(FormatError):
        load_table(p)


def test_table_immutable(small_table):
    with pytest.raises(ValueError):
        small_table.lam[1] = 2.0


def test_from_tau_equality():
    a = FourierTable.from_tau([1, -24, 252])
    assert a == build_fourier_table(3)
    assert a != build_fourier_table(4)
