"""Partial sums of λ(n)², of λ_{1⊞Φ}(n), smoothed sums and exponent regression."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError, RangeError
from .weights import SmoothWeight, WeightKind, make_weight, mellin_at_1  # noqa: F401


def _cutoff(X, n_max):
    if X < 0:
        raise InvalidArgumentError(f"X must be non-negative, got {X}")
    n = int(math.floor(X))
    if n > n_max:
        raise RangeError(f"X={X} exceeds table range n_max={n_max}")
    return n


def s2_sum(table, X):
    """𝒮₂(X) = Σ_{n<=X} λ(n)², correctly rounded (math.fsum)."""
    n = _cutoff(X, table.n_max)
    lam = table.lam[1:n + 1]
    return math.fsum(lam * lam)


def a_sum(derived, X):
    """𝒜(X, 1⊞Φ) = Σ_{n<=X} λ_{1⊞Φ}(n)."""
    n = _cutoff(X, derived.n_max)
    return math.fsum(derived.iso[1:n + 1])


def partial_sums_at(values, cutoffs):
    """Σ_{1<=n<=x} values[n] for each x in ``cutoffs`` (n-indexed array).

    Each block between consecutive cutoffs is summed with fsum, so the cost is
    one pass over the array regardless of the number of cutoffs.
    """
    order = np.argsort(cutoffs, kind="stable")
    out = np.empty(len(cutoffs))
    blocks = []
    prev = 0
    for i in order:
        n = int(math.floor(cutoffs[i]))
        if n >= len(values):
            raise RangeError(f"cutoff {cutoffs[i]} exceeds table range {len(values) - 1}")
        if n > prev:
            blocks.append(math.fsum(values[prev + 1:n + 1]))
            prev = n
        out[i] = math.fsum(blocks)
    return out


def smoothed_sum(derived, weight, X):
    """Σ_n λ_{1⊞Φ}(n) W(n/X)."""
    lo, hi = weight.support
    n_lo = max(1, int(math.ceil(lo * X)))
    n_hi = int(math.floor(hi * X))
    if n_hi > derived.n_max:
        raise RangeError(f"weight support reaches n={n_hi} > n_max={derived.n_max}")
    if n_hi < n_lo:
        return 0.0
    n = np.arange(n_lo, n_hi + 1)
    return math.fsum(derived.iso[n_lo:n_hi + 1] * weight(n / X))


@dataclass(frozen=True)
class ExperimentRecord:
    X: float
    s2: float
    main: float
    delta2: float

    @classmethod
    def make(cls, X, s2, main):
        return cls(float(X), float(s2), float(main), float(s2) - float(main))


def delta2_records(table, xs, c):
    s2 = partial_sums_at(table.lam * table.lam, np.asarray(xs, dtype=float))
    return [ExperimentRecord.make(x, s, c * x) for x, s in zip(xs, s2)]


def delta2_window_sup(table, c, X, ratio=0.5):
    """sup |Δ₂(x)| over x in [ratio*X, X].

    Δ₂(x) = 𝒮₂(x) - c x is piecewise linear with upward jumps λ(n)² at the
    integers, so the supremum is attained at an integer n (value 𝒮₂(n) - cn)
    or at a left limit (𝒮₂(n-1) - cn).
    """
    hi = _cutoff(X, table.n_max)
    lo = max(1, int(math.ceil(ratio * X)))
    if hi < lo:
        raise InvalidArgumentError(f"empty window [{ratio * X}, {X}]")
    lam2 = table.lam * table.lam
    base = math.fsum(lam2[1:lo])
    s = base + np.cumsum(lam2[lo:hi + 1])
    n = np.arange(lo, hi + 1, dtype=float)
    right = s - c * n
    left = (s - lam2[lo:hi + 1]) - c * n
    cands = [np.max(np.abs(right)), np.max(np.abs(left))]
    # Left end of the window may fall strictly between integers.
    x0 = ratio * X
    cands.append(abs(base - c * x0))
    return float(max(cands))


def a_window_sup(derived, L1, X, ratio=0.5):
    """sup |𝒜(x, 1⊞Φ) - L(1,Φ) x| over x in [ratio*X, X] (same scheme as Δ₂)."""
    hi = _cutoff(X, derived.n_max)
    lo = max(1, int(math.ceil(ratio * X)))
    vals = derived.iso
    base = math.fsum(vals[1:lo])
    s = base + np.cumsum(vals[lo:hi + 1])
    n = np.arange(lo, hi + 1, dtype=float)
    right = np.abs(s - L1 * n)
    left = np.abs((s - vals[lo:hi + 1]) - L1 * n)
    return float(max(right.max(), left.max(), abs(base - L1 * ratio * X)))


class PowerFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def fit_exponent(records):
    """Least squares of log|value| against log X.

    ``records`` is a sequence of (X, value) pairs.
    """
    records = list(records)
    if len(records) < 5:
        raise InvalidArgumentError(f"need at least 5 records, got {len(records)}")
    xs = np.array([r[0] for r in records], dtype=float)
    vs = np.array([r[1] for r in records], dtype=float)
    if np.any(vs == 0.0) or np.any(xs <= 0.0):
        raise InvalidArgumentError("values must be nonzero and X positive")
    lx, ly = np.log(xs), np.log(np.abs(vs))
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return PowerFit(float(slope), float(intercept), r2)


def linear_slope(xs, ys):
    """Ordinary least-squares slope of ys against xs (with intercept)."""
    slope, _ = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope)


def records_to_csv(rows, header):
    """Render rows (tuples) as CSV text with %.12e floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["%.12e" % v for v in row])
    return buf.getvalue()
