"""Constants in the main terms: ζ(s) for real s > 1, L(1, Sym²φ) and c_φ."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .errors import DomainError, InvalidArgumentError

_EM_TERMS = 20
_EM_ORDER = 12
_B2K = bernoulli(2 * _EM_ORDER)[2::2]

MIN_TABLE_FOR_L1 = 10_000


@dataclass(frozen=True)
class LValueEstimate:
    """A numerically estimated L-value.

    ``tail_bound`` is heuristic: the largest deviation of the partial sums from
    their mean over the averaging window.  It is not a rigorous error bound.
    """

    value: float
    truncation_n: int
    tail_bound: float


def zeta_real(s):
    """ζ(s) for real s > 1 by Euler–Maclaurin summation (absolute error ~1e-15)."""
    s = float(s)
    if not s > 1.0:
        raise DomainError(f"zeta_real needs s > 1, got {s}")
    n = _EM_TERMS
    terms = [k ** -s for k in range(1, n)]
    terms.append(n ** (1.0 - s) / (s - 1.0))
    terms.append(0.5 * n ** -s)
    # B_{2k}/(2k)! * s(s+1)...(s+2k-2) * n^{-s-2k+1}
    rising = s
    fact = 2.0
    for k in range(1, _EM_ORDER + 1):
        term = _B2K[k - 1] / fact * rising * n ** (-s - 2 * k + 1)
        terms.append(term)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
    return math.fsum(terms)


def l_sym2_at_1(coeffs, start_fraction=0.1):
    """Estimate L(1, Sym²φ) = Σ A(1,n)/n.

    The partial sums P(x) = Σ_{n<=x} A(1,n)/n oscillate around the limit; we
    return their arithmetic mean over x in [start_fraction * n_max, n_max].
    """
    n_max = coeffs.n_max
    if n_max < MIN_TABLE_FOR_L1:
        raise InvalidArgumentError(
            f"coefficient table too short for L(1) estimate: n_max={n_max} < {MIN_TABLE_FOR_L1}")
    if not 0.0 < start_fraction < 1.0:
        raise InvalidArgumentError("start_fraction must lie in (0, 1)")
    n = np.arange(1, n_max + 1, dtype=float)
    partial = np.cumsum(coeffs.a1n[1:] / n)
    lo = max(1, int(math.ceil(start_fraction * n_max)))
    window = partial[lo - 1:]
    value = math.fsum(window) / len(window)
    tail = float(np.max(np.abs(window - value)))
    return LValueEstimate(value=value, truncation_n=n_max, tail_bound=tail)


def c_phi(coeffs, l_value=None):
    """c_φ = L(1, Sym²φ) / ζ(2).

    ``l_value`` overrides the Dirichlet-series estimate (a float or an
    :class:`LValueEstimate`).
    """
    if l_value is None:
        l_value = l_sym2_at_1(coeffs)
    if isinstance(l_value, LValueEstimate):
        l_value = l_value.value
    return float(l_value) / zeta_real(2.0)
