"""Fourier coefficients of the discriminant form and derived GL(3) sequences.

The exact layer is the Ramanujan tau function, obtained from

    Δ(q) = q ∏_{n≥1} (1 - q^n)^24

by exact big-integer series arithmetic.  Products of truncated series are done
by Kronecker substitution: a series is packed into one huge integer with a
fixed number of bits per coefficient, the integers are multiplied with GMP and
the product is unpacked again.  The slot width is chosen from the
Cauchy–Schwarz bound |c_n| <= ||a||_2 ||b||_2, so the packing is always exact.

Normalized values λ(n) = τ(n) / n^{11/2} are stored in binary64.  Arrays are
indexed by n directly; slot 0 is padding and always holds 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import gmpy2
import numpy as np

from .errors import FormatError, InvalidArgumentError

WEIGHT = 12
CACHE_HEADER = "RSLAB-TAU v1"


# -- exact series arithmetic --------------------------------------------------

def euler_product(length):
    """Coefficients of ∏(1 - q^n) mod q^length via the pentagonal number theorem."""
    c = [0] * length
    c[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 >= length:
            break
        sign = -1 if k % 2 else 1
        c[g1] += sign
        g2 = k * (3 * k + 1) // 2
        if g2 < length:
            c[g2] += sign
        k += 1
    return c


def _pack(c, lo, hi, bits):
    if hi - lo <= 32:
        r = gmpy2.mpz(0)
        for i in range(hi - 1, lo - 1, -1):
            r = (r << bits) + c[i]
        return r
    mid = (lo + hi) // 2
    return (_pack(c, mid, hi, bits) << (bits * (mid - lo))) + _pack(c, lo, mid, bits)


def _unpack(v, length, bits):
    # Balanced digits: slot values >= 2^(bits-1) are negative and borrow one
    # from the next slot.
    nbytes = bits // 8
    v = gmpy2.f_mod_2exp(v, bits * length)
    raw = int(v).to_bytes(nbytes * length, "little")
    full = 1 << bits
    half = 1 << (bits - 1)
    from_bytes = int.from_bytes
    out = [0] * length
    carry = 0
    for i in range(length):
        d = from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") + carry
        if d >= half:
            d -= full
            carry = 1
        else:
            carry = 0
        out[i] = d
    return out


def _l2_ceiling(c):
    s = gmpy2.mpz(0)
    for x in c:
        if x:
            s += gmpy2.mpz(x) * x
    return gmpy2.isqrt(s) + 1


def series_mul(a, b, length):
    """Exact product of two integer series truncated mod q^length."""
    a = list(a[:length]) + [0] * max(0, length - len(a))
    square = b is a
    b = a if square else list(b[:length]) + [0] * max(0, length - len(b))
    na = _l2_ceiling(a)
    nb = na if square else _l2_ceiling(b)
    bits = int(na * nb).bit_length() + 2
    bits = (bits + 7) // 8 * 8
    pa = _pack(a, 0, length, bits)
    prod = pa * pa if square else pa * _pack(b, 0, length, bits)
    return _unpack(prod, length, bits)


def tau_coefficients(n_max):
    """Exact τ(1), ..., τ(n_max) as a Python list (0-based: entry i is τ(i+1))."""
    length = n_max
    e1 = euler_product(length)
    e2 = series_mul(e1, e1, length)
    e3 = series_mul(e2, e1, length)
    e6 = series_mul(e3, e3, length)
    e12 = series_mul(e6, e6, length)
    return series_mul(e12, e12, length)


# -- tables -------------------------------------------------------------------

def normalizer(n):
    """n^{(k-1)/2} for k = 12, in binary64 (within one ulp of the true value)."""
    return math.sqrt(n ** (WEIGHT - 1))


@dataclass(frozen=True, eq=False)
class FourierTable:
    """τ(n) and λ(n) = τ(n)/n^{11/2} for 1 <= n <= n_max.

    ``tau[n]`` and ``lam[n]`` are indexed by n; index 0 is a zero pad.
    """

    n_max: int
    tau: list
    lam: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, FourierTable):
            return NotImplemented
        return self.n_max == other.n_max and self.tau == other.tau

    def __repr__(self):
        return f"FourierTable(n_max={self.n_max})"

    @classmethod
    def from_tau(cls, tau_1based):
        tau = [0] + [int(t) for t in tau_1based]
        n_max = len(tau) - 1
        lam = np.zeros(n_max + 1)
        lam[1:] = [float(tau[n]) / normalizer(n) for n in range(1, n_max + 1)]
        lam.setflags(write=False)
        return cls(n_max, tau, lam)


def build_fourier_table(n_max):
    if not isinstance(n_max, (int, np.integer)) or isinstance(n_max, bool) or n_max < 1:
        raise InvalidArgumentError(f"n_max must be a positive integer, got {n_max!r}")
    return FourierTable.from_tau(tau_coefficients(int(n_max)))


def mobius(n_max):
    """μ(0..n_max) as an int8 array (μ(0) = 0)."""
    mu = np.ones(n_max + 1, dtype=np.int8)
    mu[0] = 0
    is_prime = np.ones(n_max + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n_max) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    for p in np.flatnonzero(is_prime):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def divisor_counts(n_max):
    """d(0..n_max), with d(0) = 0."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    for k in range(1, n_max + 1):
        d[k::k] += 1
    return d


@dataclass(frozen=True, eq=False)
class DerivedCoeffTable:
    """Coefficients of L(s, Sym²φ), L(s, φ×φ) and ζ(s)L(s, Sym²φ).

    ``a1n[n]`` is A(1,n) = λ_{Sym²φ}(n), ``rs[n]`` is λ_{φ×φ}(n) and ``iso[n]``
    is λ_{1⊞Sym²φ}(n) computed independently as the divisor sum of ``a1n``.
    """

    base: FourierTable | None
    a1n: np.ndarray = field(repr=False)
    rs: np.ndarray = field(repr=False)
    iso: np.ndarray = field(repr=False)

    @property
    def n_max(self):
        return len(self.a1n) - 1

    def __repr__(self):
        return f"DerivedCoeffTable(n_max={self.n_max})"


def divisor_sum(values):
    """(1 * f)(n) = Σ_{d|n} f(d) for an n-indexed array f."""
    n_max = len(values) - 1
    out = np.zeros(n_max + 1)
    for d in range(1, n_max + 1):
        v = values[d]
        if v != 0.0:
            out[d::d] += v
    return out


def _mpz_zeros(n):
    out = np.empty(n + 1, dtype=object)
    out[:] = gmpy2.mpz(0)
    return out


def _scaled_to_float(values, powers):
    """values[n] / n^11, correctly rounded (0 at index 0)."""
    out = np.zeros(len(values))
    out[1:] = [float(v / p) for v, p in zip(values[1:], powers[1:])]
    return out


def build_derived_table(base):
    """Derived sequences by two independent convolution routes.

    With λ(n)² = τ(n)²/n^11 every sequence below is an integer after scaling
    by n^11, so the sieves run in exact integer arithmetic and each value is
    rounded once at the end.  In binary64 the Möbius/divisor round trip would
    lose all relative accuracy where λ_{φ×φ}(n) is tiny.
    """
    n = base.n_max
    tau = np.array([gmpy2.mpz(t) for t in base.tau], dtype=object)
    tau2 = tau * tau
    powers = np.array([gmpy2.mpz(k) ** (WEIGHT - 1) for k in range(n + 1)], dtype=object)

    # n^11 λ_{φ×φ}(n) = Σ_{d²|n} d^22 τ(n/d²)²
    rs = _mpz_zeros(n)
    d = 1
    while d * d <= n:
        sq = d * d
        rs[sq::sq] += tau2[1:n // sq + 1] * powers[d] ** 2
        d += 1

    # n^11 A(1,n) = Σ_{d|n} μ(d) d^11 (n/d)^11 λ_{φ×φ}(n/d)
    mu = mobius(n)
    a1n = _mpz_zeros(n)
    for d in np.flatnonzero(mu):
        d = int(d)
        if mu[d] > 0:
            a1n[d::d] += rs[1:n // d + 1] * powers[d]
        else:
            a1n[d::d] -= rs[1:n // d + 1] * powers[d]

    # n^11 λ_{1⊞Φ}(n) = Σ_{d|n} d^11 (n/d)^11 A(1,n/d)
    iso = _mpz_zeros(n)
    for d in range(1, n + 1):
        iso[d::d] += a1n[1:n // d + 1] * powers[d]

    arrays = [_scaled_to_float(v, powers) for v in (a1n, rs, iso)]
    for arr in arrays:
        arr.setflags(write=False)
    return DerivedCoeffTable(base, *arrays)


# -- cache file ---------------------------------------------------------------

def save_table(table, path):
    path = Path(path)
    lines = [CACHE_HEADER, f"n_max={table.n_max}"]
    lines.extend(f"{n},{table.tau[n]}" for n in range(1, table.n_max + 1))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    tmp.replace(path)


def load_table(path):
    with open(path, encoding="ascii", newline="") as fh:
        text = fh.read()
    if not text.endswith("\n"):
        raise FormatError("file does not end with a newline (truncated?)")
    lines = text[:-1].split("\n")
    if lines[0] != CACHE_HEADER:
        raise FormatError(f"bad header {lines[0]!r}, expected {CACHE_HEADER!r}", line=1)
    if len(lines) < 2 or not lines[1].startswith("n_max="):
        raise FormatError("missing n_max line", line=2)
    try:
        n_max = int(lines[1][len("n_max="):])
    except ValueError:
        raise FormatError(f"bad n_max value {lines[1]!r}", line=2) from None
    if n_max < 1:
        raise FormatError("n_max must be positive", line=2)
    rows = lines[2:]
    if len(rows) != n_max:
        raise FormatError(f"expected {n_max} rows, found {len(rows)}", line=len(lines))
    tau = []
    for i, row in enumerate(rows, start=1):
        lineno = i + 2
        idx, sep, value = row.partition(",")
        try:
            if not sep or int(idx) != i:
                raise ValueError
            tau.append(int(value))
        except ValueError:
            raise FormatError(f"malformed row {row!r}", line=lineno) from None
    return FourierTable.from_tau(tau)
