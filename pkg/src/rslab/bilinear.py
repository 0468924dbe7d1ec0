"""Direct evaluation of the dual sums 𝒮(N), ℬ(N), ℬ(L,M) and their regime bounds.

Notation: e(x) = exp(2πi x).  All phases are reduced mod 1 in extended
precision before the complex exponential is taken, and every sum is
accumulated with math.fsum on real and imaginary parts separately, in
ascending index order.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import constants
from .errors import InvalidArgumentError, RangeError, WindowError
from .oscillatory import (TWO_PI, InertWeight, composite_gauss_rule, oscillatory_integral,
                          quartic_root_phase)
from .weights import make_weight

QUARTER = Fraction(1, 4)


def e(x):
    """e(x) = exp(2πi x), with x reduced mod 1 in long double first."""
    x = np.asarray(x, dtype=np.longdouble)
    frac = (x - np.floor(x)).astype(float)
    return np.exp(2j * math.pi * frac)


def csum(values):
    values = np.asarray(values)
    return complex(math.fsum(values.real.ravel()), math.fsum(values.imag.ravel()))


def _index_range(weight, scale, n_max=None, what="table"):
    lo, hi = weight.support
    n_lo = max(1, int(math.ceil(lo * scale)))
    n_hi = int(math.floor(hi * scale))
    if n_max is not None and n_hi > n_max:
        raise RangeError(f"{what} too short: need n <= {n_hi}, have {n_max}")
    return n_lo, n_hi


def script_s(derived, N, T, beta, V):
    """𝒮(N) = Σ_n A(1,n) e(T (n/N)^β) V(n/N).

    T may be negative (the inner sums of ℬ(L,M) carry the phase
    -4(ℓ m X)^{1/4}, i.e. T = -4(ℓ M X)^{1/4} with β = 1/4).
    """
    n_lo, n_hi = _index_range(V, N, derived.n_max)
    if n_hi < n_lo:
        return 0j
    n = np.arange(n_lo, n_hi + 1)
    u = n / N
    v = V(u)
    phase = np.longdouble(T) * np.power(n.astype(np.longdouble) / np.longdouble(N),
                                        np.longdouble(float(beta)))
    return csum(derived.a1n[n_lo:n_hi + 1] * v * e(phase))


def dual_phase(n, X):
    """-4 (n X)^{1/4}, in long double."""
    return -4.0 * np.power(np.asarray(n, dtype=np.longdouble) * np.longdouble(X),
                           np.longdouble(0.25))


def b_n(derived, N, X, V):
    """ℬ(N) = Σ_n λ_{1⊞Φ}(n) V(n/N) e(-4(nX)^{1/4})."""
    n_lo, n_hi = _index_range(V, N, derived.n_max)
    if n_hi < n_lo:
        return 0j
    n = np.arange(n_lo, n_hi + 1)
    return csum(derived.iso[n_lo:n_hi + 1] * V(n / N) * e(dual_phase(n, X)))


def b_lm(derived, L, M, X, U, W, outer=None, N=None, conjugate=False):
    """ℬ(L,M) = Σ_ℓ Σ_m A(1,m) e(-4(ℓmX)^{1/4}) U(ℓ/L) W(m/M).

    With ``outer`` and ``N`` the extra factor V(ℓm/N) of the undecomposed sum
    is kept, so that Σ over dyadic (L, M) reassembles ℬ(N) exactly.
    ``conjugate`` flips the sign of the phase.
    """
    l_lo, l_hi = _index_range(U, L)
    m_lo, m_hi = _index_range(W, M, derived.n_max)
    if l_hi < l_lo or m_hi < m_lo:
        return 0j
    sign = -1.0 if conjugate else 1.0
    re_parts, im_parts = [], []
    for ell in range(l_lo, l_hi + 1):
        lo, hi = m_lo, m_hi
        if outer is not None:
            lo = max(lo, int(math.ceil(outer.support[0] * N / ell)))
            hi = min(hi, int(math.floor(outer.support[1] * N / ell)))
        if hi < lo:
            continue
        m = np.arange(lo, hi + 1)
        weights = derived.a1n[lo:hi + 1] * W(m / M) * U(ell / L)
        if outer is not None:
            weights = weights * outer(ell * m / N)
        terms = weights * e(sign * dual_phase(ell * m, X))
        re_parts.append(terms.real)
        im_parts.append(terms.imag)
    if not re_parts:
        return 0j
    return complex(math.fsum(np.concatenate(re_parts)), math.fsum(np.concatenate(im_parts)))


def inner_m_sums(derived, L, M, X, U, W):
    """For each ℓ in supp U(·/L): Σ_m A(1,m) W(m/M) e(-4(ℓmX)^{1/4})."""
    l_lo, l_hi = _index_range(U, L)
    m_lo, m_hi = _index_range(W, M, derived.n_max)
    ell = np.arange(l_lo, l_hi + 1)
    m = np.arange(m_lo, m_hi + 1)
    coeff = derived.a1n[m_lo:m_hi + 1] * W(m / M)
    rows = e(dual_phase(np.outer(ell, m), X)) * coeff[None, :]
    return ell, np.array([csum(r) for r in rows])


# -- regimes ------------------------------------------------------------------

class Regime(enum.Enum):
    LARGE_L = "LARGE_L"
    MEDIUM_L = "MEDIUM_L"
    SMALL_L = "SMALL_L"


ETA = Fraction(1, 15)
ETA_PRIME = Fraction(1, 5)


def regime_bound(regime, L, M, T, X):
    """The bound for |ℬ(L,M)| in the given regime, implied constant 1."""
    regime = Regime(regime)
    if regime is Regime.LARGE_L:
        return T**0.5 * M
    if regime is Regime.MEDIUM_L:
        return L**-0.5 * T**4 / X + L**0.5 * T**2.25 * X**-0.5
    return L * T**0.3 * M**0.75


def regime_classify(L, T, X, M=None):
    """SMALL_L if L <= T^{14/5}/X, LARGE_L if L >= T^{1/2+1/15}, else MEDIUM_L.

    When both the small and large conditions hold and M is given, the regime
    with the smaller bound wins; without M the small-L test takes precedence.
    """
    if L <= 0 or T <= 0 or X <= 0:
        raise InvalidArgumentError("L, T, X must be positive")
    small = L <= T**2.8 / X
    large = L >= T ** (0.5 + float(ETA))
    if small and large and M is not None:
        if regime_bound(Regime.LARGE_L, L, M, T, X) < regime_bound(Regime.SMALL_L, L, M, T, X):
            return Regime.LARGE_L
        return Regime.SMALL_L
    if small:
        return Regime.SMALL_L
    if large:
        return Regime.LARGE_L
    return Regime.MEDIUM_L


def prop_b_bound(T, X):
    """T^{53/15} X^{-5/6}."""
    return T ** (53 / 15) * X ** (-5 / 6)


def in_prop_b_window(T, X):
    return X ** (5 / 14) <= T * (1 + 1e-12) and T <= X ** (5 / 12) * (1 + 1e-12)


WINDOW_TEXT = "$X^{5/14+\\varepsilon} \\leq T \\leq X^{5/12-\\varepsilon}$"


# -- experiment harness -------------------------------------------------------

@dataclass(frozen=True)
class DualSumParams:
    T: float
    X: float
    N: float
    L: float
    M: float
    beta: Fraction = QUARTER

    def check_pipeline(self, slack=constants.ASYMP_SLACK):
        """N within a factor ``slack`` of T^4/X and LM within ``slack`` of N."""
        target = self.T**4 / self.X
        return (target / slack <= self.N <= slack * target
                and self.N / slack <= self.L * self.M <= slack * self.N)


@dataclass(frozen=True)
class RegimeReport:
    T: float
    X: float
    L: float
    M: float
    regime: Regime
    measured: float
    predicted: float
    ratio: float
    prop_b_ratio: float


def dyadic_grid(T, X, slack=constants.ASYMP_SLACK):
    """All dyadic (L, M) = (2^i, 2^j) with LM within ``slack`` of N = T^4/X."""
    N = T**4 / X
    out = []
    i = 0
    while 2**i <= slack * N:
        L = 2.0**i
        j = 0
        while L * 2**j <= slack * N:
            M = 2.0**j
            if N / slack <= L * M:
                out.append(DualSumParams(T, X, N, L, M))
            j += 1
        i += 1
    return out


def validate_grid(grid):
    for p in grid:
        if not in_prop_b_window(p.T, p.X):
            raise WindowError(
                f"grid point T={p.T:g}, X={p.X:g} violates {WINDOW_TEXT} "
                f"(need {p.X ** (5 / 14):.6g} <= T <= {p.X ** (5 / 12):.6g})")


def run_regime_experiment(derived, grid, U=None, W=None):
    """Measure |ℬ(L,M)| at every grid point and compare with the regime bound."""
    grid = list(grid)
    validate_grid(grid)
    U = U or make_weight("DYADIC_W")
    W = W or make_weight("DYADIC_W")
    reports = []
    for p in grid:
        measured = abs(b_lm(derived, p.L, p.M, p.X, U, W))
        regime = regime_classify(p.L, p.T, p.X, p.M)
        predicted = regime_bound(regime, p.L, p.M, p.T, p.X)
        reports.append(RegimeReport(
            p.T, p.X, p.L, p.M, regime, measured, predicted, measured / predicted,
            measured / prop_b_bound(p.T, p.X)))
    return reports


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["T", "X", "L", "M", "regime", "measured", "predicted", "ratio"])
    for r in reports:
        writer.writerow(["%.6e" % r.T, "%.6e" % r.X, "%.6e" % r.L, "%.6e" % r.M,
                         r.regime.value, "%.6e" % r.measured, "%.6e" % r.predicted,
                         "%.6e" % r.ratio])
    return buf.getvalue()


# -- medium-L analysis --------------------------------------------------------

class MediumLDecomposition(NamedTuple):
    diagonal: float
    offdiag: float
    xi_integral_max: float
    xi_integral_bound: float
    zero_frequency: complex
    zero_frequency_diagonal: float
    window_fraction_outside: float
    cauchy_schwarz: float
    measured: float


def _xi_weight(W):
    return InertWeight(lambda x: W(x) ** 2, W.support[0], W.support[1])


def xi_phase(B, m, M):
    """Phase 2π(4Bξ^{1/4} - mMξ) of the ξ-integral, as a PhaseSpec."""
    return quartic_root_phase(4.0 * B, -float(m) * M)


def xi_integral(W2, B, m, M):
    """∫ W(ξ)² e(4 B ξ^{1/4} - m M ξ) dξ for B = (XM)^{1/4}(ℓ'^{1/4} - ℓ^{1/4}).

    Single adaptive evaluation; :func:`medium_l_decomposition` uses a shared
    fixed rule instead and is checked against this.
    """
    return oscillatory_integral(W2, xi_phase(B, m, M))


def stationary_band(R, M, support=(0.5, 2.0)):
    """Range of B for which e(4Bξ^{1/4} - mMξ) is stationary in ξ for some m in [R, 2R)."""
    lo, hi = support
    return R * M * lo**0.75, (2 * R - 1) * M * hi**0.75


def medium_l_decomposition(derived, L, M, T, X, R, U=None, W=None, band_margin=2.0):
    """Cauchy–Schwarz / Poisson anatomy of ℬ(L,M) in the medium range.

    With S_m = Σ_ℓ U(ℓ/L) e(-4(ℓmX)^{1/4}) the second Cauchy–Schwarz factor is
    Q = Σ_m W(m/M)² |S_m|², split into the ℓ = ℓ' diagonal and the rest.
    Poisson in m turns the (ℓ, ℓ') term into M Σ_k ∫ W(ξ)² e(4Bξ^{1/4} - kMξ) dξ.
    We report its zero frequency, the largest ξ-integral over frequencies
    k in [R, 2R) (to compare with 1/√(RM)), and the share of the absolute
    Poisson mass (zero frequency plus k in [R, 2R)) carried by pairs outside
    the stationary band for B.
    """
    if regime_classify(L, T, X, M) is not Regime.MEDIUM_L:
        raise InvalidArgumentError(
            f"(L={L}, T={T}, X={X}) is not in the medium-L regime")
    if R < 1:
        raise InvalidArgumentError("R must be >= 1")
    U = U or make_weight("DYADIC_W")
    W = W or make_weight("DYADIC_W")
    l_lo, l_hi = _index_range(U, L)
    m_lo, m_hi = _index_range(W, M, derived.n_max)
    ell = np.arange(l_lo, l_hi + 1)
    m = np.arange(m_lo, m_hi + 1)
    u = U(ell / L)
    w = W(m / M)

    S = e(dual_phase(np.outer(m, ell), X)) @ u  # S_m
    Q = math.fsum(w**2 * np.abs(S) ** 2)
    diagonal = math.fsum(w**2) * math.fsum(u**2)

    # One quadrature rule for every (ℓ, ℓ', k): |d/dξ| of the phase is at most
    # 2π(|B| a^{-3/4} + kM) on [a, b].
    a, b = W.support
    root = (X * M) ** 0.25
    quarter = ell.astype(float) ** 0.25
    b_max = root * (quarter[-1] - quarter[0])
    freqs = np.arange(R, 2 * R)
    nodes, qw = composite_gauss_rule(
        a, b, TWO_PI * (b_max * a**-0.75 + (2 * R) * M))
    w2q = W(nodes) ** 2 * qw
    n_quarter = nodes**0.25
    mass_w2 = math.fsum(w2q)
    zf_diag = M * mass_w2 * math.fsum(u**2)

    band_lo, band_hi = stationary_band(R, M, W.support)
    band_lo /= band_margin
    band_hi *= band_margin
    zf_re, zf_im = [], []
    zf_abs = zf_diag
    xi_max = 0.0
    inside = outside = 0.0
    for i in range(len(ell)):
        others = np.delete(np.arange(len(ell)), i)
        B = root * (quarter[others] - quarter[i])
        weight = u[i] * u[others]
        base = np.exp(TWO_PI * 1j * 4.0 * np.outer(B, n_quarter))
        zero = base @ w2q
        zf_re.extend(weight * M * zero.real)
        zf_im.extend(weight * M * zero.imag)
        zf_abs += M * float(np.abs(weight * zero).sum())
        mass = np.zeros(len(others))
        for k in freqs:
            vals = np.abs(base @ (w2q * np.exp(-TWO_PI * 1j * k * M * nodes)))
            xi_max = max(xi_max, float(vals.max()))
            mass += M * np.abs(weight) * vals
        in_band = (band_lo <= B) & (B <= band_hi)
        inside += float(mass[in_band].sum())
        outside += float(mass[~in_band].sum())
    zero_frequency = complex(zf_diag + math.fsum(zf_re), math.fsum(zf_im))
    total = zf_abs + inside + outside
    coeff2 = math.fsum(derived.a1n[m_lo:m_hi + 1] ** 2 * (w > 0))
    measured = abs(b_lm(derived, L, M, X, U, W))
    return MediumLDecomposition(
        diagonal=diagonal,
        offdiag=Q - diagonal,
        xi_integral_max=xi_max,
        xi_integral_bound=constants.XI_INTEGRAL_CONSTANT / math.sqrt(R * M),
        zero_frequency=zero_frequency,
        zero_frequency_diagonal=zf_diag,
        window_fraction_outside=outside / total if total > 0 else 0.0,
        cauchy_schwarz=math.sqrt(coeff2 * Q),
        measured=measured,
    )
