"""Oscillatory integrals ∫ w(ξ) e^{i h(ξ)} dξ, stationary phase and Poisson summation.

The quadrature is an adaptive 7/15-point Gauss–Kronrod scheme whose initial
panels each span at most one local oscillation (so every cycle sees at least
15 nodes); panels are bisected until the summed |K15 - G7| differences fall
below the requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from . import constants
from .errors import AccuracyError, DomainError, InvalidArgumentError, NoStationaryPointError

TWO_PI = 2.0 * math.pi

# Kronrod abscissae on [0, 1] (symmetric), descending; the Gauss points are the
# odd-indexed ones.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]
GAUSS_WEIGHTS[7] = _WG[3]


def _gk15(fun, a, b):
    """Vectorized GK15 over panels [a_i, b_i]; returns (kronrod, |kronrod - gauss|)."""
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    x = centre[:, None] + half[:, None] * KRONROD_NODES[None, :]
    fx = fun(x.ravel()).reshape(x.shape)
    k = half * (fx @ KRONROD_WEIGHTS)
    g = half * (fx @ GAUSS_WEIGHTS)
    return k, np.abs(k - g)


def adaptive_integral(fun, breaks, rel_tol=constants.QUAD_REL_TOL, abs_tol=None,
                      max_panels=constants.QUAD_MAX_PANELS):
    """∫ fun over [breaks[0], breaks[-1]] starting from the given panels.

    ``fun`` must accept a 1-d float array.  Converged when the summed error
    estimate is <= max(abs_tol, rel_tol * |I|); ``abs_tol`` defaults to
    ``rel_tol`` so the criterion reads err <= rel_tol * (1 + |I|) up to a
    factor of 2.
    """
    if abs_tol is None:
        abs_tol = rel_tol
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    done_val = []
    done_err = 0.0
    total_width = breaks[-1] - breaks[0]
    n_panels = len(a)
    while True:
        vals, errs = _gk15(fun, a, b)
        estimate = math.fsum(np.real(vals)) + math.fsum(np.real(done_val)) + 1j * (
            math.fsum(np.imag(vals)) + math.fsum(np.imag(done_val)))
        err_total = float(np.sum(errs)) + done_err
        target = max(abs_tol, rel_tol * abs(estimate))
        if err_total <= target:
            return estimate
        # Keep panels whose share of the error is already within budget.
        share = target * (b - a) / total_width
        bad = errs > share
        done_val.extend(vals[~bad])
        done_err += float(np.sum(errs[~bad]))
        a, b = a[bad], b[bad]
        n_panels += int(bad.sum())
        if n_panels > max_panels or not len(a):
            raise AccuracyError(
                f"quadrature did not converge within {max_panels} panels",
                estimate=estimate, error_bound=err_total)
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])


def cycle_breaks(a, b, abs_freq, n_probe=4001, min_panels=8):
    """Panel breaks so each panel spans <= 1 cycle of a phase with |h'| = abs_freq.

    ``abs_freq`` is a vectorized function returning |h'(x)| (radians per unit).
    """
    x = np.linspace(a, b, n_probe)
    f = np.abs(abs_freq(x))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x))])
    cycles = cum[-1] / TWO_PI
    n = max(min_panels, int(math.ceil(cycles * 1.25)) + 1)
    if n > constants.QUAD_MAX_PANELS:
        raise AccuracyError(f"phase has ~{cycles:.3g} cycles, beyond the panel budget")
    # Invert the cumulative phase at equally spaced levels, then merge with a
    # uniform split so slowly varying stretches still get panels.
    targets = np.linspace(0.0, cum[-1], n + 1) if cum[-1] > 0 else None
    uniform = np.linspace(a, b, min_panels + 1)
    if targets is None:
        return uniform
    phase_breaks = np.interp(targets, cum, x)
    return np.unique(np.concatenate([phase_breaks, uniform]))


def composite_gauss_rule(a, b, max_abs_freq, order=20, min_panels=4):
    """Nodes and weights of a composite Gauss–Legendre rule on [a, b].

    Panels are uniform and each spans at most half a cycle of a phase whose
    derivative is bounded by ``max_abs_freq`` (radians per unit), so one rule
    can be shared by a whole family of phases with that bound.
    """
    if not b > a:
        raise InvalidArgumentError(f"empty interval [{a}, {b}]")
    cycles = (b - a) * abs(max_abs_freq) / TWO_PI
    n = max(min_panels, int(math.ceil(2.0 * cycles)))
    if n * order > constants.QUAD_MAX_PANELS * 15:
        raise AccuracyError(f"phase has ~{cycles:.3g} cycles, beyond the node budget")
    x, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[1:] + edges[:-1])
    nodes = (centre[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


# -- weights and phases -------------------------------------------------------

@dataclass(frozen=True)
class InertWeight:
    """A smooth weight with compact support [a, b] and inert scale ``scale``.

    ``w`` must be vectorized over float arrays.
    """

    w: Callable
    a: float
    b: float
    scale: float = 1.0

    @classmethod
    def on_dyadic(cls, w, Z, scale=1.0):
        return cls(w, Z, 2.0 * Z, scale)

    def __call__(self, x):
        return self.w(x)

    def inert_violations(self, constants_=constants.INERT_CONSTANTS, n_grid=4001, h=None):
        """Orders j <= 3 where max |x^j w^{(j)}(x)| > C_j scale^j on a grid.

        Derivatives are taken by repeated central differences.
        """
        x = np.linspace(self.a, self.b, n_grid)
        h = h or 1e-3 * (self.b - self.a)
        bad = []
        for j in range(4):
            dj = _finite_derivative(self.w, x, j, h)
            if np.max(np.abs(x**j * dj)) > constants_[j] * self.scale**j:
                bad.append(j)
        return bad


def _finite_derivative(f, x, j, h):
    if j == 0:
        return f(x)
    return (_finite_derivative(f, x + h, j - 1, h) - _finite_derivative(f, x - h, j - 1, h)) / (2 * h)


@dataclass(frozen=True)
class PhaseSpec:
    """A real phase h with optional analytic derivatives and size scales.

    Y is the size of the phase and Z the support scale, so that
    h^{(j)} ≪ Y / Z^j.  Missing derivatives are replaced by central
    differences with step 1e-5 Z.
    """

    h: Callable
    dh: Callable | None = None
    d2h: Callable | None = None
    Y: float = 1.0
    Z: float = 1.0

    def d1(self, x):
        if self.dh is not None:
            return self.dh(x)
        s = 1e-5 * self.Z
        return (self.h(x + s) - self.h(x - s)) / (2 * s)

    def d2(self, x):
        if self.d2h is not None:
            return self.d2h(x)
        s = 1e-5 * self.Z
        if self.dh is not None:
            return (self.dh(x + s) - self.dh(x - s)) / (2 * s)
        return (self.h(x + s) - 2 * self.h(x) + self.h(x - s)) / (s * s)

    def scaled(self, theta):
        """The phase θ·h (derivatives and Y scaled alike)."""
        h, dh, d2h = self.h, self.dh, self.d2h
        return replace(
            self,
            h=lambda x: theta * h(x),
            dh=None if dh is None else (lambda x: theta * dh(x)),
            d2h=None if d2h is None else (lambda x: theta * d2h(x)),
            Y=theta * self.Y,
        )

    def plus_linear(self, c):
        """The phase h(ξ) + c ξ."""
        h, dh, d2h = self.h, self.dh, self.d2h
        return replace(
            self,
            h=lambda x: h(x) + c * x,
            dh=None if dh is None else (lambda x: dh(x) + c),
            d2h=d2h,
        )


def quadratic_phase(Y, centre, Z=1.0):
    """h(ξ) = Y (ξ - centre)² / Z²."""
    return PhaseSpec(
        h=lambda x: Y * ((x - centre) / Z) ** 2,
        dh=lambda x: 2.0 * Y * (x - centre) / Z**2,
        d2h=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0 * Y / Z**2),
        Y=Y, Z=Z)


def linear_phase(c, Z=1.0):
    return PhaseSpec(
        h=lambda x: c * x,
        dh=lambda x: np.full_like(np.asarray(x, dtype=float), c),
        d2h=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        Y=abs(c) * Z, Z=Z)


def quartic_root_phase(A, B, Z=1.0):
    """h(ξ) = 2π (A ξ^{1/4} + B ξ), i.e. e^{ih} = e(A ξ^{1/4} + B ξ).

    With A = -4 (L m X)^{1/4} and B = -ℓ L this is the phase of the rescaled
    ℓ-integral after Poisson summation in the large-L range.
    """
    return PhaseSpec(
        h=lambda x: TWO_PI * (A * x**0.25 + B * x),
        dh=lambda x: TWO_PI * (0.25 * A * x**-0.75 + B),
        d2h=lambda x: TWO_PI * (-0.1875 * A * x**-1.75),
        Y=TWO_PI * max(abs(A), abs(B) * Z) * Z**0.25, Z=Z)


# -- integrals ----------------------------------------------------------------

def oscillatory_integral(w, h, rel_tol=constants.QUAD_REL_TOL, abs_tol=None):
    """I = ∫ w(ξ) e^{i h(ξ)} dξ over the support of w."""
    if not (np.isfinite(w.a) and np.isfinite(w.b)) or w.b <= w.a:
        raise InvalidArgumentError(f"support [{w.a}, {w.b}] must be finite and nonempty")
    breaks = cycle_breaks(w.a, w.b, h.d1)

    def integrand(x):
        return w(x) * np.exp(1j * h.h(x))

    return adaptive_integral(integrand, breaks, rel_tol=rel_tol, abs_tol=abs_tol)


def absolute_mass(w, rel_tol=1e-12):
    """∫ |w| over its support."""
    breaks = np.linspace(w.a, w.b, 17)
    return adaptive_integral(lambda x: np.abs(w(x)) + 0j, breaks, rel_tol=rel_tol).real


def find_stationary_point(h, a, b, n_probe=2001):
    """The unique zero of h' in (a, b), by bisection then Newton."""
    x = np.linspace(a, b, n_probe)
    d = h.d1(x)
    pos = d >= 0
    sign_change = np.flatnonzero(pos[1:] != pos[:-1])
    if len(sign_change) != 1:
        raise NoStationaryPointError(
            f"h' changes sign {len(sign_change)} times on [{a}, {b}]; expected exactly once")
    i = int(sign_change[0])
    lo, hi = float(x[i]), float(x[i + 1])
    flo = float(h.d1(np.array([lo]))[0])
    tol = constants.STATIONARY_ROOT_TOL * h.Y / h.Z
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = float(h.d1(np.array([mid]))[0])
        if (fm >= 0) == (flo >= 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-6 * h.Z:
            break
    xi = 0.5 * (lo + hi)
    for _ in range(50):
        f1 = float(h.d1(np.array([xi]))[0])
        if abs(f1) <= tol:
            break
        step = f1 / float(h.d2(np.array([xi]))[0])
        xi_new = xi - step
        if not lo - (hi - lo) <= xi_new <= hi + (hi - lo):
            break
        xi = xi_new
    return xi


def stationary_phase_leading(w, h):
    """√(2π/|h''(ξ₀)|) e^{i(h(ξ₀) + sgn(h''(ξ₀)) π/4)} w(ξ₀)."""
    probe = np.linspace(w.a, w.b, 2001)
    d2 = h.d2(probe)
    if not (np.all(d2 > 0) or np.all(d2 < 0)):
        raise DomainError("h'' must have constant sign on the support")
    xi0 = find_stationary_point(h, w.a, w.b)
    arr = np.array([xi0])
    h2 = float(h.d2(arr)[0])
    amp = math.sqrt(TWO_PI / abs(h2)) * float(w(arr)[0])
    phase = float(h.h(arr)[0]) + math.copysign(math.pi / 4, h2)
    return amp * complex(math.cos(phase), math.sin(phase))


GAUSSIAN_WIDTH = 0.3
SUPER_GAUSSIAN_WIDTH = 0.35


def model_stationary_case(kind, Y):
    """A (weight, phase) pair of size Y with its stationary point at ξ₀ = 1.

    ``"quadratic"``: h = Y(ξ-1)² with a Gaussian window of width 0.3, cut at
    12 widths.  ``"quartic"``: h = 2π(Aξ^{1/4} + Bξ) scaled so that h''(1) = Y,
    with the window exp(-((ξ-1)/0.35)^4) on [1/4, 2].  Both windows are
    analytic, so the stationary-phase error is a clean O(1/Y).
    """
    if kind == "quadratic":
        s = GAUSSIAN_WIDTH
        w = InertWeight(lambda x: np.exp(-0.5 * ((x - 1.0) / s) ** 2), 1 - 12 * s, 1 + 12 * s)
        return w, quadratic_phase(Y, 1.0)
    if kind == "quartic":
        s = SUPER_GAUSSIAN_WIDTH
        w = InertWeight(lambda x: np.exp(-(((x - 1.0) / s) ** 4)), 0.25, 2.0)
        A = -Y * 16.0 / (3.0 * TWO_PI)
        return w, quartic_root_phase(A, -0.25 * A)
    raise InvalidArgumentError(f"unknown phase kind {kind!r} (quadratic or quartic)")


class StationaryComparison(NamedTuple):
    Y: float
    quadrature: complex
    leading: complex
    rel_error: float


def compare_stationary(kind, Y):
    w, h = model_stationary_case(kind, Y)
    quad = oscillatory_integral(w, h)
    lead = stationary_phase_leading(w, h)
    return StationaryComparison(float(Y), quad, lead, abs(quad - lead) / abs(quad))


class DecayCheck(NamedTuple):
    ok: bool
    measured_ratio: float
    exponent: float


def nonstationary_decay_check(w, h, A, thetas=(1.0, 2.0, 4.0, 8.0), abs_tol=None):
    """Check |∫ w e^{iθh}| decays at least like θ^{-A} + θ^{1/2} slack.

    Fits log|I(θh)| against log θ; ``measured_ratio`` is |I(θ_max h)|/|I(h)|.
    """
    probe = np.linspace(w.a, w.b, 4001)
    d = h.d1(probe)
    if np.any(np.sign(d) != np.sign(d[0])) or np.any(d == 0):
        raise DomainError("h' vanishes on the support; use stationary_phase_leading")
    if abs_tol is None:
        abs_tol = 1e-13 * absolute_mass(w)
    mags = np.array([abs(oscillatory_integral(w, h.scaled(t), abs_tol=abs_tol)) for t in thetas])
    ratio = float(mags[-1] / mags[0]) if mags[0] > 0 else 0.0
    floor = 10 * abs_tol
    if np.all(mags[1:] <= floor):
        return DecayCheck(True, ratio, -math.inf)
    keep = mags > floor
    if keep.sum() < 2:
        return DecayCheck(True, ratio, -math.inf)
    lt = np.log(np.asarray(thetas, dtype=float)[keep])
    slope = float(np.polyfit(lt, np.log(mags[keep]), 1)[0])
    if keep.sum() < len(mags):
        # Values hit the noise floor: the true decay is at least this fast.
        slope = min(slope, float((math.log(floor) - math.log(mags[0])) / lt[-1]) if lt[-1] > 0 else slope)
    return DecayCheck(slope <= -A + 0.5, ratio, slope)


# -- Poisson summation --------------------------------------------------------

class PoissonResult(NamedTuple):
    lhs: complex
    rhs: complex
    frequencies: np.ndarray
    fhat: np.ndarray


def _integer_sum(f, support, negligible, max_terms=10_000_000):
    if support is not None:
        lo, hi = math.ceil(support[0]), math.floor(support[1])
        n = np.arange(lo, hi + 1, dtype=float)
        vals = f(n)
        return complex(math.fsum(np.real(vals)), math.fsum(np.imag(vals)))
    # Rapidly decaying: grow symmetric windows until the new terms are negligible.
    vals = [complex(f(np.array([0.0]))[0])]
    scale = abs(vals[0])
    k = 1
    while k < max_terms:
        pair = f(np.array([float(k), float(-k)]))
        vals.extend(complex(v) for v in pair)
        scale = max(scale, *(abs(v) for v in pair))
        if np.all(np.abs(pair) <= negligible * max(scale, 1e-300)) and k > 2:
            return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
        k += 1
    raise AccuracyError("Poisson left side did not reach the negligibility threshold")


def fourier_transform(f, support, m, n_probe=8193, rel_tol=constants.QUAD_REL_TOL, abs_tol=None):
    """f̂(m) = ∫ f(x) e(-m x) dx by adaptive quadrature over ``support``."""
    a, b = support
    x = np.linspace(a, b, n_probe)
    arg = np.unwrap(np.angle(f(x)))
    local = np.abs(np.gradient(arg, x)) + TWO_PI * abs(m)
    breaks = cycle_breaks(a, b, lambda t: np.interp(t, x, local))
    return adaptive_integral(lambda t: f(t) * np.exp(-2j * math.pi * m * t), breaks,
                             rel_tol=rel_tol, abs_tol=abs_tol)


def dual_spectrum(f, support, frequencies, samples_per_unit=None):
    """f̂(m) for many integers m at once, by the trapezoid rule and one FFT.

    For f smooth with compact support inside ``support`` the trapezoid rule
    with step 1/P is exact up to aliasing Σ_{j≠0} f̂(m + jP), negligible once
    P exceeds twice the frequency content of f plus max|m|.
    """
    frequencies = np.asarray(frequencies, dtype=np.int64)
    a = math.floor(support[0])
    b = math.ceil(support[1])
    if samples_per_unit is None:
        need = 4 * int(np.max(np.abs(frequencies))) + 64
        samples_per_unit = 1 << max(6, (need - 1).bit_length())
    P = int(samples_per_unit)
    k = np.arange((b - a) * P + 1)
    vals = f(a + k / P)
    folded = np.zeros(P, dtype=complex)
    np.add.at(folded, k % P, vals)
    spectrum = np.fft.fft(folded) / P  # e(-m a) = 1 because a is an integer
    return spectrum[np.mod(frequencies, P)]


def poisson_sum(f, fhat=None, m_range=None, support=None, method="quad",
                negligible=constants.POISSON_NEGLIGIBLE):
    """Both sides of Σ_n f(n) = Σ_m f̂(m).

    ``fhat`` may be supplied analytically; otherwise it is computed over
    ``support`` by adaptive quadrature (``method="quad"``) or by
    :func:`dual_spectrum` (``method="fft"``).  ``m_range`` is an iterable of
    integer frequencies; by default it grows until the terms are negligible.
    """
    lhs = _integer_sum(f, support, negligible)
    if fhat is None and support is None:
        raise InvalidArgumentError("numeric f̂ needs a finite support")

    def transform(ms):
        ms = np.asarray(list(ms), dtype=np.int64)
        if fhat is not None:
            return ms, np.array([complex(fhat(float(m))) for m in ms])
        if method == "fft":
            return ms, dual_spectrum(f, support, ms)
        return ms, np.array([fourier_transform(f, support, int(m)) for m in ms])

    if m_range is not None:
        ms, vals = transform(m_range)
    else:
        ms, vals = transform([0])
        scale = abs(vals[0])
        k = 1
        while True:
            mk, vk = transform([k, -k])
            ms, vals = np.concatenate([ms, mk]), np.concatenate([vals, vk])
            scale = max(scale, *np.abs(vk))
            if np.all(np.abs(vk) <= negligible * scale) and k > 2:
                break
            k += 1
            if k > 100_000:
                raise AccuracyError("Poisson dual side did not reach the negligibility threshold")
    rhs = complex(math.fsum(np.real(vals)), math.fsum(np.imag(vals)))
    return PoissonResult(lhs, rhs, ms, vals)


def predict_dual_range(L, T):
    """Window [T/(8L), 8T/L] for |ℓ| outside which the dual terms are negligible.

    The frequency of e(-4 T (y/L)^{1/4}) at y = L u is (T/L) u^{-3/4}; for
    u in the dyadic support [1/2, 2] this stays in [0.59, 1.69] T/L, and the
    factor 8 leaves room for the decay of the smooth weight's transform.
    """
    if L <= 0 or T <= 0:
        raise InvalidArgumentError("L and T must be positive")
    k = constants.DUAL_RANGE_FACTOR
    return (T / (k * L), k * T / L)
