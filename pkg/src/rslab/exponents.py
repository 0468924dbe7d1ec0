"""Exact exponent calculus over power monomials T^a X^b L^c (N, M as needed).

Exponents are affine forms in a few free rational parameters (δ, η, η' ...),
so a monomial such as X^{87/150 + 31δ/30} is represented exactly and the
final optimization over δ is a linear solve.  Everything is Fraction-based;
no floating point enters a comparison.

The ε-losses of the underlying bounds are tracked only as a boolean flag
(``eps``) that survives multiplication and substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import InvalidArgumentError, NoSolutionError, VerificationFailure

Rational = Fraction

VARIABLES = ("T", "X", "L", "M", "N")


def _q(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise InvalidArgumentError(f"floats are not exact; got {x!r}")
    return Fraction(x)


# -- affine exponents ---------------------------------------------------------

@dataclass(frozen=True)
class Affine:
    """const + Σ coeff[p] * p over named rational parameters p."""

    const: Fraction = Fraction(0)
    coeffs: tuple = ()  # sorted ((name, Fraction), ...), zeros dropped

    @classmethod
    def make(cls, const=0, **coeffs):
        items = tuple(sorted((k, _q(v)) for k, v in coeffs.items() if _q(v) != 0))
        return cls(_q(const), items)

    @classmethod
    def coerce(cls, x):
        return x if isinstance(x, Affine) else cls(_q(x), ())

    @property
    def params(self):
        return dict(self.coeffs)

    def is_constant(self):
        return not self.coeffs

    def constant(self):
        if self.coeffs:
            raise InvalidArgumentError(f"{self} depends on {', '.join(self.params)}")
        return self.const

    def __add__(self, other):
        other = Affine.coerce(other)
        merged = dict(self.coeffs)
        for k, v in other.coeffs:
            merged[k] = merged.get(k, Fraction(0)) + v
        return Affine.make(self.const + other.const, **merged)

    __radd__ = __add__

    def __neg__(self):
        return Affine.make(-self.const, **{k: -v for k, v in self.coeffs})

    def __sub__(self, other):
        return self + (-Affine.coerce(other))

    def __rsub__(self, other):
        return Affine.coerce(other) - self

    def __mul__(self, other):
        other = Affine.coerce(other)
        if self.is_constant():
            self, other = other, self
        if not other.is_constant():
            raise InvalidArgumentError(f"product of non-constant exponents {self} * {other}")
        c = other.const
        return Affine.make(self.const * c, **{k: v * c for k, v in self.coeffs})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = Affine.coerce(other).constant()
        if c == 0:
            raise ZeroDivisionError("division of an exponent by 0")
        return self * (1 / c)

    def __eq__(self, other):
        try:
            other = Affine.coerce(other)
        except (TypeError, ValueError, InvalidArgumentError):
            return NotImplemented
        return self.const == other.const and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.const, self.coeffs))

    def at(self, **values):
        """Substitute values for (some of) the parameters."""
        out = Affine(self.const, ())
        for k, v in self.coeffs:
            if k in values:
                out = out + Affine.coerce(values[k]) * v
            else:
                out = out + Affine.make(0, **{k: v})
        return out

    def solve(self, param):
        """The value of ``param`` making this form vanish (other parameters absent)."""
        coeffs = self.params
        a = coeffs.pop(param, Fraction(0))
        if a == 0:
            raise NoSolutionError(f"{self} does not depend on {param}")
        if coeffs:
            raise NoSolutionError(f"{self} has other free parameters {sorted(coeffs)}")
        return -self.const / a

    def __str__(self):
        parts = []
        if self.const != 0 or not self.coeffs:
            parts.append(str(self.const))
        for k, v in self.coeffs:
            if v == 1:
                term = k
            elif v == -1:
                term = f"-{k}"
            else:
                term = f"{v}{k}" if v.denominator == 1 else f"({v}){k}"
            if parts and not term.startswith("-"):
                parts.append("+" + term)
            else:
                parts.append(term)
        return "".join(parts)


# -- monomials ----------------------------------------------------------------

@dataclass(frozen=True)
class PowerMonomial:
    """Π var^{exponent}; absent variables have exponent 0."""

    exps: tuple = ()  # sorted ((var, Affine), ...), zeros dropped
    eps: bool = field(default=False, compare=False)

    @classmethod
    def make(cls, eps=False, **exps):
        items = []
        for var, e in sorted(exps.items()):
            if var not in VARIABLES:
                raise InvalidArgumentError(f"unknown variable {var!r}")
            e = Affine.coerce(e)
            if e != 0:
                items.append((var, e))
        return cls(tuple(items), eps)

    def exponent(self, var):
        return dict(self.exps).get(var, Affine())

    @property
    def variables(self):
        return tuple(v for v, _ in self.exps)

    def is_one(self):
        return not self.exps

    def __mul__(self, other):
        merged = dict(self.exps)
        for v, e in other.exps:
            merged[v] = merged.get(v, Affine()) + e
        return PowerMonomial.make(self.eps or other.eps, **merged)

    def __pow__(self, k):
        return PowerMonomial.make(self.eps, **{v: e * Affine.coerce(k) for v, e in self.exps})

    def __truediv__(self, other):
        return self * other ** -1

    def without(self, var):
        return PowerMonomial.make(self.eps, **{v: e for v, e in self.exps if v != var})

    def at(self, **values):
        return PowerMonomial.make(self.eps, **{v: e.at(**values) for v, e in self.exps})

    def __str__(self):
        if not self.exps:
            return "1"
        out = []
        for v, e in self.exps:
            out.append(v if e == 1 else f"{v}^{{{e}}}")
        return " ".join(out)


def mono(eps=False, **exps):
    return PowerMonomial.make(eps, **exps)


_TERM = re.compile(r"\s*([A-Z])(?:\^\{?\s*([-+]?\d+(?:/\d+)?)\s*\}?)?")


def parse_monomial(text):
    """Parse e.g. "T^{14/15} X^{-1/3}" or "L^-1/2 T^4 X^-1" (constant exponents)."""
    text = text.strip()
    if text in ("", "1"):
        return mono()
    exps = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise InvalidArgumentError(f"cannot parse monomial at {text[pos:]!r}")
        var, e = m.group(1), m.group(2)
        exps[var] = exps.get(var, Fraction(0)) + (Fraction(e) if e else Fraction(1))
        pos = m.end()
        while pos < len(text) and text[pos] in " *":
            pos += 1
    return mono(**exps)


# -- operations ---------------------------------------------------------------

def balance(m1, m2, var):
    """The monomial value of ``var`` solving m1 = m2."""
    d = m1.exponent(var) - m2.exponent(var)
    if d == 0:
        raise NoSolutionError(f"{var} has the same exponent on both sides")
    if not d.is_constant():
        raise NoSolutionError(f"{var}-exponent difference {d} is not a constant")
    rest = m2.without(var) / m1.without(var)
    return rest ** (1 / d.const)


def substitute(m, var, value):
    """Replace ``var`` in ``m`` by the monomial ``value``."""
    e = m.exponent(var)
    if e == 0:
        return m
    return m.without(var) * value ** e


@dataclass(frozen=True)
class RangeConstraint:
    """lower <= var <= upper with endpoint monomials free of ``var``."""

    var: str
    lower: PowerMonomial | None = None
    upper: PowerMonomial | None = None

    def __post_init__(self):
        for end in (self.lower, self.upper):
            if end is not None and self.var in end.variables:
                raise InvalidArgumentError(f"endpoint {end} involves {self.var}")


def _sign(a, assume):
    """Sign of an affine form; parameters are replaced by ``assume`` values."""
    a = a.at(**(assume or {}))
    if not a.is_constant():
        raise InvalidArgumentError(
            f"sign of {a} undetermined; pass values for {sorted(a.params)} in assume")
    return (a.const > 0) - (a.const < 0)


def sup_exponent(m, rng, target="X", assume=None):
    """Largest ``target``-exponent of m as rng.var runs over its range.

    m must involve only rng.var and ``target``; the endpoints must be powers
    of ``target``.  The sign of the rng.var exponent picks the endpoint;
    when it depends on parameters, ``assume`` supplies representative values
    (the caller asserts the sign is constant on the parameter range of
    interest).  Returns an :class:`Affine`.
    """
    extra = set(m.variables) - {rng.var, target}
    if extra:
        raise InvalidArgumentError(f"unexpected variables {sorted(extra)}")
    a = m.exponent(rng.var)
    s = _sign(a, assume)
    if s == 0:
        return m.exponent(target)
    end = rng.upper if s > 0 else rng.lower
    if end is None:
        raise NoSolutionError(f"{rng.var} unbounded in the direction that grows m")
    if set(end.variables) - {target}:
        raise InvalidArgumentError(f"endpoint {end} is not a power of {target}")
    return substitute(m, rng.var, end).exponent(target)


def window(lo, hi, var="T", target="X"):
    return RangeConstraint(var, mono(**{target: lo}), mono(**{target: hi}))


# -- the exponent chain -------------------------------------------------------

DELTA, ETA, ETA_PRIME = "d", "eta", "eta_p"

# Every exponent the bookkeeping uses, by name.  Mutating any entry must make
# verify_prop_b_chain fail.
PROP_B_CONSTANTS = {
    "target_T": Fraction(53, 15), "target_X": Fraction(-5, 6),
    "N_T": Fraction(4), "N_X": Fraction(-1),
    "cubic_T": Fraction(3, 10), "cubic_N": Fraction(3, 4),
    "cubic_lo": Fraction(6, 5), "cubic_hi": Fraction(8, 5),
    "small_L": Fraction(1),
    "small_thr_T": Fraction(14, 5), "small_thr_X": Fraction(-1),
    "medium0_L": Fraction(-1, 2), "medium0_T": Fraction(4), "medium0_X": Fraction(-1),
    "medium1_L": Fraction(1, 2), "medium1_T": Fraction(9, 4), "medium1_X": Fraction(-1, 2),
    "large_T": Fraction(1, 2), "large_M": Fraction(1),
    "base_exp": Fraction(1, 2),
    "eta": Fraction(1, 15), "eta_p": Fraction(1, 5),
    "L0_T": Fraction(14, 15), "L0_X": Fraction(-1, 3),
    "window_lo": Fraction(5, 14), "window_hi": Fraction(5, 12),
    "dual_T": Fraction(61, 30), "dual_X": Fraction(-1, 3),
    "gain_X": Fraction(1, 2), "gain_T": Fraction(-1),
    "contrib_X": Fraction(1, 6), "contrib_T": Fraction(31, 30),
    "t_centre": Fraction(2, 5), "t_hi_delta": Fraction(1), "t_lo_delta": Fraction(-4),
    "axiom_T": Fraction(5, 4), "classical": Fraction(3, 5),
    "delta": Fraction(3, 305),
}

MUTATION_GROUPS = {
    "smallL": "cubic_T",
    "mediumL": "medium1_T",
    "largeL": "large_T",
    "target": "target_T",
    "delta": "delta",
    "eta": "eta",
    "eta_p": "eta_p",
}


class Check(NamedTuple):
    name: str
    ok: bool
    detail: str


class ChainReport(NamedTuple):
    checks: list

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def raise_on_failure(self):
        bad = self.failures()
        if bad:
            raise VerificationFailure("; ".join(f"{c.name}: {c.detail}" for c in bad))


class _Recorder:
    def __init__(self):
        self.checks = []

    def equal(self, name, lhs, rhs):
        ok = lhs == rhs
        self.checks.append(Check(name, ok, f"{lhs} {'==' if ok else '!='} {rhs}"))
        return ok

    def leq(self, name, lhs, rhs):
        ok = Affine.coerce(lhs).constant() <= Affine.coerce(rhs).constant()
        self.checks.append(Check(name, ok, f"{lhs} {'<=' if ok else '>'} {rhs}"))
        return ok

    def less(self, name, lhs, rhs):
        ok = Affine.coerce(lhs).constant() < Affine.coerce(rhs).constant()
        self.checks.append(Check(name, ok, f"{lhs} {'<' if ok else '>='} {rhs}"))
        return ok

    def tight(self, name, value):
        """A worst-case exponent that must be exactly 0 (bound met with equality)."""
        return self.equal(name, Affine.coerce(value), Affine())

    def axiom(self, name, statement):
        self.checks.append(Check(name, True, f"imported: {statement}"))


def _constants(overrides):
    c = dict(PROP_B_CONSTANTS)
    for k, v in (overrides or {}).items():
        if k not in c:
            raise InvalidArgumentError(f"unknown constant {k!r}")
        c[k] = _q(v)
    return c


def regime_monomials(c):
    """The bound monomials of the three regimes, N and the target."""
    N = mono(T=c["N_T"], X=c["N_X"])
    M = N / mono(L=1)
    small = mono(True, L=c["small_L"], T=c["cubic_T"]) * M ** c["cubic_N"]
    return {
        "N": N,
        "M": M,
        "small": small,
        "medium0": mono(True, L=c["medium0_L"], T=c["medium0_T"], X=c["medium0_X"]),
        "medium1": mono(True, L=c["medium1_L"], T=c["medium1_T"], X=c["medium1_X"]),
        "large": mono(True, T=c["large_T"]) * M ** c["large_M"],
        "target": mono(True, T=c["target_T"], X=c["target_X"]),
        "small_thr": mono(T=c["small_thr_T"], X=c["small_thr_X"]),
    }


def solve_thresholds(constants=None):
    """(η', η) from the tight medium- and large-L conditions on the window."""
    c = _constants(constants)
    m = regime_monomials(c)
    win = window(c["window_lo"], c["window_hi"])
    # Medium second term at L = T^{1/2+η'} against the target.
    at_top = substitute(m["medium1"], "L", mono(T=Affine.make(c["base_exp"], eta_p=1)))
    ratio = at_top / m["target"]
    eta_p = sup_exponent(ratio, win, assume={ETA_PRIME: Fraction(0)}).solve(ETA_PRIME)
    # Large-L bound at L = T^{1/2+η}.
    at_bottom = substitute(m["large"], "L", mono(T=Affine.make(c["base_exp"], eta=1)))
    ratio = at_bottom / m["target"]
    eta = sup_exponent(ratio, win, assume={ETA: Fraction(0)}).solve(ETA)
    return eta_p, eta


def dual_sum_bound(constants=None):
    """T^{1/2} N^{-1/2} · target with N = T^4/X."""
    c = _constants(constants)
    m = regime_monomials(c)
    return substitute(mono(T=Fraction(1, 2), N=Fraction(-1, 2)) * m["target"], "N", m["N"])


def delta_balance_terms(constants=None):
    """The two X-exponents to be balanced, as affine forms in δ."""
    c = _constants(constants)
    gain = mono(X=c["gain_X"], T=c["gain_T"])
    contrib = gain * mono(T=c["dual_T"], X=c["dual_X"])
    hi = mono(X=Affine.make(c["t_centre"], d=c["t_hi_delta"]))
    lo = mono(X=Affine.make(c["t_centre"], d=c["t_lo_delta"]))
    first = sup_exponent(contrib, RangeConstraint("T", lo, hi))
    axiom = gain * mono(T=c["axiom_T"])
    second = sup_exponent(axiom, RangeConstraint("T", None, lo))
    return contrib, first, second


def solve_delta(constants=None):
    """Optimal δ: the X-exponent of the dual-sum contribution over
    X^{2/5-4δ} <= T <= X^{2/5+δ} equals that of the T^{5/4} range."""
    _, first, second = delta_balance_terms(constants)
    return (first - second).solve(DELTA)


def verify_prop_b_chain(constants=None):
    """Re-derive every exponent identity; returns a :class:`ChainReport`."""
    c = _constants(constants)
    m = regime_monomials(c)
    r = _Recorder()
    win = window(c["window_lo"], c["window_hi"])

    # Small-L bound after eliminating M.
    r.equal("smallL bound L^{1/4}T^{33/10}X^{-3/4}", m["small"],
            mono(L=Fraction(1, 4), T=Fraction(33, 10), X=Fraction(-3, 4)))
    # L0 balances the first medium term with the small-L bound.
    L0 = balance(m["medium0"], m["small"], "L")
    r.equal("L0 = T^{14/15}X^{-1/3}", L0, mono(T=c["L0_T"], X=c["L0_X"]))
    r.equal("smallL at L0 = target", substitute(m["small"], "L", L0), m["target"])
    r.equal("mediumL first term at L0 = target", substitute(m["medium0"], "L", L0), m["target"])
    # The first medium term is the zero-frequency term L^{1/2}M.
    zero_freq = substitute(mono(L=Fraction(1, 2), M=1), "M", m["M"])
    r.equal("mediumL zero frequency L^{1/2}M", zero_freq, m["medium0"])
    # Worst L in each regime interval.
    r.leq("smallL increasing in L", 0, m["small"].exponent("L"))
    r.leq("mediumL first term decreasing in L", m["medium0"].exponent("L"), 0)
    r.leq("mediumL second term increasing in L", 0, m["medium1"].exponent("L"))
    r.leq("largeL decreasing in L", m["large"].exponent("L"), 0)
    # L0 lies inside the small-L range on the window (tight at T = X^{5/14}).
    r.tight("L0 <= T^{14/5}/X on window", sup_exponent(L0 / m["small_thr"], win))
    # The cubic-sum bound applies in the small-L range: M >= T^{6/5} and N <= T^{8/5}.
    M_small = substitute(m["M"], "L", m["small_thr"])
    r.equal("smallL M >= T^{6/5}", M_small, mono(T=c["cubic_lo"]))
    r.tight("N <= T^{8/5} on window", sup_exponent(m["N"] / mono(T=c["cubic_hi"]), win))
    # Thresholds.
    eta_p, eta = solve_thresholds(c)
    r.equal("η′ = 1/5", eta_p, c["eta_p"])
    r.equal("η = 1/15", eta, c["eta"])
    r.less("η < η′", eta, eta_p)
    r.leq("η′ <= 1/3", c["eta_p"], Fraction(1, 3))
    top = mono(T=c["base_exp"] + c["eta_p"])
    bottom = mono(T=c["base_exp"] + c["eta"])
    r.tight("mediumL at L=T^{1/2+η′} <= target on window",
            sup_exponent(substitute(m["medium1"], "L", top) / m["target"], win))
    r.tight("largeL at L=T^{1/2+η} <= target on window",
            sup_exponent(substitute(m["large"], "L", bottom) / m["target"], win))
    r.leq("medium range nonempty: L0 <= T^{1/2+η′} on window",
          sup_exponent(L0 / top, win), 0)
    # Dual-sum contribution and the final balance in δ.
    dual = dual_sum_bound(c)
    r.equal("T^{1/2}N^{-1/2}T^{53/15}X^{-5/6} = T^{61/30}X^{-1/3}", dual,
            mono(T=c["dual_T"], X=c["dual_X"]))
    contrib, first, second = delta_balance_terms(c)
    r.equal("X^{1/2}T^{-1}T^{61/30}X^{-1/3} = X^{1/6}T^{31/30}", contrib,
            mono(X=c["contrib_X"], T=c["contrib_T"]))
    r.axiom("classical bound T^{5/4}", "I << T^{5/4+eps} for all X > 0, T >= 1")
    r.equal("upper range exponent 87/150 + 31δ/30", first,
            Affine.make(Fraction(87, 150), d=Fraction(31, 30)))
    r.equal("lower range exponent 3/5 - δ", second, Affine.make(c["classical"], d=-1))
    delta = (first - second).solve(DELTA)
    r.equal("δ = 3/305", delta, c["delta"])
    r.equal("87/150 + (31/30)δ = 3/5 - δ", first.at(d=c["delta"]),
            second.at(d=c["delta"]))
    lo_t = c["t_centre"] + c["t_lo_delta"] * c["delta"]
    hi_t = c["t_centre"] + c["t_hi_delta"] * c["delta"]
    r.leq("window lower 22/61 >= 5/14", c["window_lo"], lo_t)
    r.leq("window upper 25/61 <= 5/12", hi_t, c["window_hi"])
    return ChainReport(r.checks)


def mutated(name, amount=Fraction(1, 100)):
    """Constants table with one entry (or group alias) shifted by ``amount``."""
    key = MUTATION_GROUPS.get(name, name)
    if key not in PROP_B_CONSTANTS:
        raise InvalidArgumentError(
            f"unknown constant {name!r}; choose from {sorted(PROP_B_CONSTANTS)} "
            f"or {sorted(MUTATION_GROUPS)}")
    return {key: PROP_B_CONSTANTS[key] + _q(amount)}
