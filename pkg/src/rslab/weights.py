"""Smooth compactly supported weights built from one C^∞ step.

The step is the normalized integral of the bump ψ(t) = exp(-1/(t(1-t))):

    S(t) = ∫_0^t ψ / ∫_0^1 ψ,   0 <= t <= 1,

extended by 0 to the left and 1 to the right.  All derivatives of S vanish at
0 and 1, so gluing rising and falling copies of S to a plateau gives C^∞
weights whose k-th derivative is S^{(k)} scaled by (ramp width)^{-k}.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


def bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < 1.0)
    tm = t[m]
    with np.errstate(over="ignore"):  # exp(-inf) = 0 for subnormal t
        out[m] = np.exp(-1.0 / (tm * (1.0 - tm)))
    return out


def _bump_integral(t):
    # ∫_0^t ψ for 0 <= t <= 1/2, two Gauss–Legendre panels.
    t = np.asarray(t, dtype=float)[..., None]
    half = 0.25 * t
    total = np.zeros(t.shape[:-1])
    for centre in (0.25 * t, 0.75 * t):
        total += half[..., 0] * (bump(half * _GL_X + centre) @ _GL_W)
    return total


BUMP_MASS = 2.0 * float(_bump_integral(0.5))


def step(t):
    """S(t), vectorized; exact symmetry S(t) + S(1-t) = 1."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    inner = (t > 0.0) & (t < 1.0)
    ti = t[inner]
    lower = ti <= 0.5
    vals = np.empty_like(ti)
    vals[lower] = _bump_integral(ti[lower]) / BUMP_MASS
    vals[~lower] = 1.0 - _bump_integral(1.0 - ti[~lower]) / BUMP_MASS
    out[inner] = vals
    return out


def step_derivative(t, k):
    """S^{(k)}(t) for 0 <= k <= 3."""
    if k == 0:
        return step(t)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    # exp(-1/p) underflows to 0 once 1/p > 745; the derivatives vanish there too.
    m = (t > 0.0) & (t < 1.0)
    m[m] = t[m] * (1.0 - t[m]) > 1.0 / 740.0
    tm = t[m]
    p = tm * (1.0 - tm)
    psi = np.exp(-1.0 / p) / BUMP_MASS
    if k == 1:
        out[m] = psi
    elif k == 2:
        out[m] = psi * (1.0 - 2.0 * tm) / p**2
    elif k == 3:
        g = (1.0 - 2.0 * tm) / p**2
        dg = (-2.0 * p - 2.0 * (1.0 - 2.0 * tm) ** 2) / p**3
        out[m] = psi * (g * g + dg)
    else:
        raise InvalidArgumentError(f"derivative order {k} not supported (k <= 3)")
    return out


@lru_cache(maxsize=None)
def step_derivative_max(k):
    """max |S^{(k)}|, from a dense grid refined around the maximizer."""
    if k == 0:
        return 1.0
    grid = np.linspace(0.0, 1.0, 200_001)
    vals = np.abs(step_derivative(grid, k))
    i = int(np.argmax(vals))
    fine = np.linspace(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)], 2001)
    return float(max(vals[i], np.max(np.abs(step_derivative(fine, k)))))


class WeightKind(enum.Enum):
    W1 = "W1"
    W2 = "W2"
    BUMP_V = "BUMP_V"
    BUMP_U = "BUMP_U"
    DYADIC_W = "DYADIC_W"


_DEFAULT_BUMP_SUPPORT = {
    WeightKind.BUMP_V: (0.5, 1.0),
    WeightKind.BUMP_U: (0.5, 2.0),
}


@dataclass(frozen=True)
class SmoothWeight:
    """A smooth weight u -> W(u) with plateau value 1.

    For the ramp-built kinds the weight rises on [lo, lo + rise], equals 1 up
    to hi - fall and falls to 0 at hi.  DYADIC_W is the dyadic partition
    piece θ(log2 u + 1) - θ(log2 u), supported in (1/2, 2), for which
    Σ_{j>=0} W(n/2^j) = 1 at every integer n >= 1.
    """

    kind: WeightKind
    X: float
    Y: float | None
    P: float
    lo: float
    hi: float
    rise: float
    fall: float

    @property
    def support(self):
        return (self.lo, self.hi)

    @property
    def plateau(self):
        if self.kind is WeightKind.DYADIC_W:
            return (1.0, 1.0)
        return (self.lo + self.rise, self.hi - self.fall)

    @property
    def derivative_scale(self):
        """Reciprocal of the narrowest ramp: |W^{(k)}| <= C_k scale^k."""
        if self.kind is WeightKind.DYADIC_W:
            return 2.0 / math.log(2.0)
        return 1.0 / min(self.rise, self.fall)

    def __call__(self, u):
        return self.derivative(u, 0)

    def derivative(self, u, k=0):
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.kind is WeightKind.DYADIC_W:
            out = self._dyadic(u, k)
        else:
            out = np.zeros_like(u)
            if k == 0:
                out[(u >= self.lo + self.rise) & (u <= self.hi - self.fall)] = 1.0
            left = (u > self.lo) & (u < self.lo + self.rise)
            right = (u > self.hi - self.fall) & (u < self.hi)
            out[left] = step_derivative((u[left] - self.lo) / self.rise, k) / self.rise**k
            out[right] = ((-1) ** k * step_derivative((self.hi - u[right]) / self.fall, k)
                          / self.fall**k)
        return float(out[0]) if scalar else out

    def _dyadic(self, u, k):
        out = np.zeros_like(u)
        m = (u > self.lo) & (u < self.hi)
        um = u[m]
        x = np.log2(um)
        c = 1.0 / math.log(2.0)

        def g(j):
            return step_derivative(x + 1.0, j) - step_derivative(x, j)

        if k == 0:
            out[m] = g(0)
            return out
        x1 = c / um
        if k == 1:
            out[m] = g(1) * x1
        elif k == 2:
            out[m] = g(2) * x1**2 - g(1) * c / um**2
        elif k == 3:
            out[m] = g(3) * x1**3 - 3.0 * g(2) * x1 * c / um**2 + g(1) * 2.0 * c / um**3
        else:
            raise InvalidArgumentError(f"derivative order {k} not supported (k <= 3)")
        return out

    def breakpoints(self):
        if self.kind is WeightKind.DYADIC_W:
            return [0.5, 1.0, 2.0]
        pts = [self.lo, self.lo + self.rise, self.hi - self.fall, self.hi]
        return sorted(set(pts))

    def derivative_violations(self, n_grid=10_000, orders=(1, 2, 3)):
        """Grid points where |W^{(k)}| exceeds C_k * derivative_scale^k."""
        grid = np.linspace(self.lo, self.hi, n_grid)
        bad = []
        for k in orders:
            if self.kind is WeightKind.DYADIC_W:
                # Chain rule through log2 adds lower-order terms.
                ck = sum(step_derivative_max(j) for j in range(1, k + 1)) * math.factorial(k) * 2
            else:
                ck = step_derivative_max(k)
            limit = ck * self.derivative_scale**k * (1 + 1e-9)
            vals = np.abs(self.derivative(grid, k))
            bad.extend((k, float(u)) for u in grid[vals > limit])
        return bad


def make_weight(kind, X=1.0, Y=None, P=1.0, support=None):
    """Construct a :class:`SmoothWeight`.

    W1 / W2 need 0 < Y <= X/5 and have ramps of width Y/X.  BUMP_V / BUMP_U
    have ramps of width (hi - lo)/(2P), so |W^{(k)}| ≪ P^k.
    """
    kind = WeightKind(kind) if not isinstance(kind, WeightKind) else kind
    if kind in (WeightKind.W1, WeightKind.W2):
        if Y is None or not (0.0 < Y <= X / 5.0):
            raise InvalidArgumentError(f"need 0 < Y <= X/5, got X={X}, Y={Y}")
        h = Y / X
        if kind is WeightKind.W1:
            return SmoothWeight(kind, X, Y, 1.0, 0.5 - h, 1.0 + h, h, h)
        return SmoothWeight(kind, X, Y, 1.0, 0.5, 1.0, h, h)
    if kind is WeightKind.DYADIC_W:
        return SmoothWeight(kind, X, None, 1.0, 0.5, 2.0, 0.0, 0.0)
    if P < 1.0:
        raise InvalidArgumentError(f"inert scale P must be >= 1, got {P}")
    lo, hi = support if support is not None else _DEFAULT_BUMP_SUPPORT[kind]
    if not 0.0 <= lo < hi:
        raise InvalidArgumentError(f"bad support {support!r}")
    ramp = (hi - lo) / (2.0 * P)
    return SmoothWeight(kind, X, None, float(P), float(lo), float(hi), ramp, ramp)


def mellin_at_1(weight, tol=1e-12):
    """W̃(1) = ∫_0^∞ W(u) du by adaptive quadrature between breakpoints."""
    pts = weight.breakpoints()
    total = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        val, err = integrate.quad(lambda u: float(weight(u)), a, b,
                                  epsabs=tol, epsrel=tol, limit=200)
        total.append(val)
    return math.fsum(total)
