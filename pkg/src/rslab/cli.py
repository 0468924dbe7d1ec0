"""Command-line front end.

    rslab coeffs    build (or reuse) the cached coefficient tables
    rslab delta2    Δ₂(X) on an X grid, fitted growth exponent on stderr
    rslab asum      𝒜(X, 1⊞Φ) - L(1,Φ) X on an X grid
    rslab smoothed  smoothed sums with W1 and Y = X^{3/5-δ}
    rslab dualsum   𝒮(N) against T^{3/10}N^{3/4} (lemma3) or ℬ(L,M) regime reports
    rslab phase     stationary phase against adaptive quadrature
    rslab exponents verify the exact exponent chain

Exit codes: 0 success, 1 internal or IO failure, 2 constraint violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bilinear, exponents, lfunctions, oscillatory, sums
from .errors import (DomainError, FormatError, InvalidArgumentError, NoSolutionError,
                     RangeError, RslabError)
from .forms import (DerivedCoeffTable, build_derived_table, build_fourier_table, load_table,
                    save_table)
from .weights import make_weight

log = logging.getLogger("rslab")

EXIT_OK, EXIT_IO, EXIT_CONSTRAINT = 0, 1, 2

DEFAULT_X_GRID = (1e4, 3e4, 1e5, 3e5, 1e6)
DEFAULT_T_GRID = (64.0, 91.0, 128.0, 181.0, 256.0)


class CacheMissing(RslabError):
    pass


@dataclass
class Config:
    cache_dir: Path = Path(".rslab-cache")
    n_max: int = 1 << 20
    x_grid: tuple = DEFAULT_X_GRID
    t_grid: tuple = DEFAULT_T_GRID
    delta: Fraction = Fraction(3, 305)
    output_format: str = "csv"
    x_exponent: float = 2.6
    y_grid: tuple = (1e2, 1e3, 1e4)
    window_ratio: float = 0.5

    def check(self, need_x=False, need_t=False):
        if self.n_max < 1:
            raise InvalidArgumentError(f"n_max must be positive, got {self.n_max}")
        if self.output_format not in ("csv", "json"):
            raise InvalidArgumentError(f"output_format must be csv or json, got {self.output_format}")
        if need_x:
            if not self.x_grid:
                raise InvalidArgumentError("x_grid is empty")
            if max(self.x_grid) > self.n_max:
                raise InvalidArgumentError(
                    f"n_max={self.n_max} < max(x_grid)={max(self.x_grid):g}")
        if need_t and not self.t_grid:
            raise InvalidArgumentError("t_grid is empty")


def _grid(text):
    vals = [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    return tuple(vals)


_CONVERTERS = {
    "cache_dir": Path,
    "n_max": lambda v: int(float(v)),
    "x_grid": _grid,
    "t_grid": _grid,
    "y_grid": _grid,
    "delta": Fraction,
    "output_format": str.strip,
    "x_exponent": float,
    "window_ratio": float,
}


def parse_config(text):
    """``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise FormatError(f"expected key=value, got {raw!r}", line=lineno)
        if key not in _CONVERTERS:
            raise FormatError(f"unknown config key {key!r}", line=lineno)
        try:
            values[key] = _CONVERTERS[key](value.strip())
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"bad value for {key}: {value.strip()!r}", line=lineno) from None
    return values


def load_config(path=None, overrides=None):
    cfg = Config()
    if path is not None:
        cfg = replace(cfg, **parse_config(Path(path).read_text(encoding="utf-8")))
    known = {f.name for f in fields(Config)}
    clean = {k: v for k, v in (overrides or {}).items() if v is not None and k in known}
    return replace(cfg, **clean)


# -- cache --------------------------------------------------------------------

def cache_paths(cache_dir, n_max):
    cache_dir = Path(cache_dir)
    return cache_dir / f"tau-{n_max}.txt", cache_dir / f"derived-{n_max}.npz"


def _save_derived(derived, path):
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, a1n=derived.a1n, rs=derived.rs, iso=derived.iso)
    tmp.replace(path)


def _load_derived(base, path):
    with np.load(path) as data:
        arrays = {k: np.array(data[k]) for k in ("a1n", "rs", "iso")}
    for k, a in arrays.items():
        if a.shape != (base.n_max + 1,) or not np.all(np.isfinite(a)):
            raise FormatError(f"array {k} has the wrong shape or non-finite entries")
        a.setflags(write=False)
    return DerivedCoeffTable(base, arrays["a1n"], arrays["rs"], arrays["iso"])


def get_tables(cache_dir, n_max, build=False):
    """(FourierTable, DerivedCoeffTable) from the cache, building when allowed.

    A corrupted cache file is rebuilt with a warning when ``build`` is set.
    """
    tau_path, derived_path = cache_paths(cache_dir, n_max)
    table = None
    if tau_path.exists():
        try:
            table = load_table(tau_path)
            if table.n_max != n_max:
                raise FormatError(f"cache holds n_max={table.n_max}, expected {n_max}")
            log.info("cache hit: %s", tau_path)
        except (FormatError, UnicodeDecodeError) as exc:
            if not build:
                raise CacheMissing(f"corrupted cache {tau_path}: {exc}; "
                                   f"run `rslab coeffs --n-max {n_max}` to rebuild") from exc
            log.warning("corrupted cache %s (%s); rebuilding", tau_path, exc)
            table = None
    elif not build:
        raise CacheMissing(f"no coefficient cache for n_max={n_max} in {cache_dir}; "
                           f"run `rslab coeffs --n-max {n_max} --cache {cache_dir}` first")
    fresh = table is None
    if fresh:
        log.info("building coefficient table to n_max=%d", n_max)
        table = build_fourier_table(n_max)
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        save_table(table, tau_path)
    derived = None
    if derived_path.exists() and not fresh:
        try:
            derived = _load_derived(table, derived_path)
            log.info("cache hit: %s", derived_path)
        except (OSError, ValueError, KeyError, FormatError) as exc:
            log.warning("corrupted cache %s (%s); rebuilding", derived_path, exc)
    if derived is None:
        derived = build_derived_table(table)
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        _save_derived(derived, derived_path)
    return table, derived


# -- output -------------------------------------------------------------------

def render(header, rows, fmt, float_format="%.12e"):
    """CSV text, or JSON with the same (rounded) numbers."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return float_format % v
        return str(v)

    text_rows = [[cell(v) for v in row] for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(text_rows)
        return buf.getvalue()

    def back(s, v):
        return float(s) if isinstance(v, (float, np.floating)) else v

    records = [{h: back(s, v) for h, s, v in zip(header, tr, row)}
               for tr, row in zip(text_rows, rows)]
    return json.dumps(records, indent=1, ensure_ascii=False) + "\n"


def emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def summary(**items):
    parts = []
    for k, v in items.items():
        parts.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    print("summary: " + " ".join(parts), file=sys.stderr)


# -- commands -----------------------------------------------------------------

def cmd_coeffs(cfg, args):
    cfg.check()
    table, derived = get_tables(cfg.cache_dir, cfg.n_max, build=True)
    tau_path, derived_path = cache_paths(cfg.cache_dir, cfg.n_max)
    with open(tau_path, "rb") as fh:
        lines = sum(1 for _ in fh)
    rows = [(cfg.n_max, lines - 2, tau_path.stat().st_size, str(tau_path))]
    emit(render(["n_max", "rows", "bytes", "path"], rows, cfg.output_format), args.out)
    return EXIT_OK


def _l_value(derived):
    est = lfunctions.l_sym2_at_1(derived)
    log.info("L(1,Sym^2) = %.10f (heuristic tail %.2e, n <= %d)",
             est.value, est.tail_bound, est.truncation_n)
    return est


def _fit(xs, vals):
    if len(xs) < 5:
        raise InvalidArgumentError(f"fit needs at least 5 grid points, got {len(xs)}")
    return sums.fit_exponent(list(zip(xs, vals)))


def cmd_delta2(cfg, args):
    cfg.check(need_x=True)
    if len(cfg.x_grid) < 5:
        raise InvalidArgumentError(f"fit needs at least 5 grid points, got {len(cfg.x_grid)}")
    table, derived = get_tables(cfg.cache_dir, cfg.n_max)
    c = lfunctions.c_phi(derived, _l_value(derived))
    records = sums.delta2_records(table, cfg.x_grid, c)
    rows = [(r.X, r.s2, r.main, r.delta2) for r in records]
    emit(render(["X", "s2", "main", "delta2"], rows, cfg.output_format), args.out)
    point = _fit(cfg.x_grid, [r.delta2 for r in records])
    sup = _fit(cfg.x_grid, [sums.delta2_window_sup(table, c, x, cfg.window_ratio)
                            for x in cfg.x_grid])
    slope_c = sums.linear_slope(cfg.x_grid, [r.s2 for r in records])
    summary(c_phi=c, slope_c=slope_c, exponent_window_sup=sup.slope,
            exponent_pointwise=point.slope)
    return EXIT_OK


def cmd_asum(cfg, args):
    cfg.check(need_x=True)
    _, derived = get_tables(cfg.cache_dir, cfg.n_max)
    L1 = _l_value(derived).value
    rows = []
    for x in cfg.x_grid:
        a = sums.a_sum(derived, x)
        rows.append((x, a, L1 * x, a - L1 * x))
    emit(render(["X", "asum", "main", "error"], rows, cfg.output_format), args.out)
    sup = _fit(cfg.x_grid, [sums.a_window_sup(derived, L1, x, cfg.window_ratio)
                            for x in cfg.x_grid])
    summary(L1=L1, slope_L1=sums.linear_slope(cfg.x_grid, [r[1] for r in rows]),
            exponent_window_sup=sup.slope,
            exponent_pointwise=_fit(cfg.x_grid, [r[3] for r in rows]).slope)
    return EXIT_OK


def cmd_smoothed(cfg, args):
    cfg.check(need_x=True)
    _, derived = get_tables(cfg.cache_dir, cfg.n_max)
    L1 = _l_value(derived).value
    expo = float(Fraction(3, 5) - cfg.delta)
    rows = []
    for x in cfg.x_grid:
        Y = x**expo
        W = make_weight("W1", X=x, Y=Y)
        s = sums.smoothed_sum(derived, W, x)
        main = L1 * sums.mellin_at_1(W) * x
        rows.append((x, Y, s, main, s - main))
    emit(render(["X", "Y", "smoothed", "main", "error"], rows, cfg.output_format), args.out)
    summary(exponent=_fit(cfg.x_grid, [r[4] for r in rows]).slope)
    return EXIT_OK


def _script_s_rows(derived, t_grid, n_exponent):
    V = make_weight("BUMP_V")
    rows = []
    for T in t_grid:
        N = math.ceil(T**n_exponent)
        if not T**1.2 <= N <= T**1.6:
            raise InvalidArgumentError(
                f"T={T:g}, N={N}: window T^(6/5) <= N <= T^(8/5) violated")
        S = abs(bilinear.script_s(derived, N, T, bilinear.QUARTER, V))
        bound = T**0.3 * N**0.75
        rows.append((float(T), float(N), S, bound, S / bound))
    return rows


def cmd_dualsum(cfg, args):
    cfg.check(need_t=True)
    t_grid = sorted(cfg.t_grid)
    if args.mode == "lemma3":
        need = max(math.ceil(T**args.n_exponent) for T in t_grid)
        if need > cfg.n_max:
            raise RangeError(f"n_max={cfg.n_max} too small; need {need}")
        _, derived = get_tables(cfg.cache_dir, cfg.n_max)
        rows = _script_s_rows(derived, t_grid, args.n_exponent)
        emit(render(["T", "N", "measured", "predicted", "ratio"], rows, cfg.output_format,
                    "%.6e"), args.out)
        summary(max_ratio=max(r[4] for r in rows))
        return EXIT_OK
    grid = []
    for T in t_grid:
        grid.extend(bilinear.dyadic_grid(T, T**cfg.x_exponent))
    bilinear.validate_grid(grid)
    _, derived = get_tables(cfg.cache_dir, cfg.n_max)
    reports = bilinear.run_regime_experiment(derived, grid)
    if cfg.output_format == "csv":
        emit(bilinear.reports_to_csv(reports), args.out)
    else:
        rows = [(r.T, r.X, r.L, r.M, r.regime.value, r.measured, r.predicted, r.ratio)
                for r in reports]
        emit(render(["T", "X", "L", "M", "regime", "measured", "predicted", "ratio"],
                    rows, "json", "%.6e"), args.out)
    peaks = [max(r.measured for r in reports if r.T == T) for T in t_grid]
    fit = _fit(t_grid, peaks) if len(t_grid) >= 5 else None
    summary(max_ratio=max(r.ratio for r in reports),
            max_prop_b_ratio=max(r.prop_b_ratio for r in reports),
            t_exponent=fit.slope if fit else "n/a")
    return EXIT_OK


def cmd_phase(cfg, args):
    rows = []
    for Y in cfg.y_grid:
        r = oscillatory.compare_stationary(args.kind, Y)
        rows.append((r.Y, r.quadrature.real, r.quadrature.imag, r.leading.real,
                     r.leading.imag, r.rel_error, r.rel_error * r.Y))
    emit(render(["Y", "quad_re", "quad_im", "lead_re", "lead_im", "rel_error",
                 "rel_error_times_Y"], rows, cfg.output_format), args.out)
    return EXIT_OK


def cmd_exponents(cfg, args):
    overrides = exponents.mutated(args.mutate) if args.mutate else None
    report = exponents.verify_prop_b_chain(overrides)
    rows = [(c.name, "PASS" if c.ok else "FAIL", c.detail) for c in report.checks]
    if cfg.output_format == "json":
        text = json.dumps([{"name": n, "status": s, "detail": d} for n, s, d in rows],
                          indent=1, ensure_ascii=False) + "\n"
    else:
        text = "".join(f"{n} {s}  [{d}]\n" for n, s, d in rows)
        text += f"ALL {'PASS' if report.ok else 'FAIL'}\n"
    emit(text, args.out)
    return EXIT_OK if report.ok else EXIT_IO


# -- argument parsing ---------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value config file")
    common.add_argument("--cache", dest="cache_dir", type=Path, help="cache directory")
    common.add_argument("--format", dest="output_format", choices=["csv", "json"])
    common.add_argument("--out", type=Path, help="write the primary output here")
    common.add_argument("--n-max", dest="n_max", type=lambda v: int(float(v)))
    common.add_argument("--x-grid", dest="x_grid", type=_grid)
    common.add_argument("--t-grid", dest="t_grid", type=_grid)
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only on stderr")

    parser = argparse.ArgumentParser(prog="rslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="build/cache coefficient tables")
    sub.add_parser("delta2", parents=[common], help="Δ₂(X) experiment")
    sub.add_parser("asum", parents=[common], help="𝒜(X, 1⊞Φ) experiment")
    p = sub.add_parser("smoothed", parents=[common], help="smoothed-sum experiment")
    p.add_argument("--delta", type=Fraction)
    p = sub.add_parser("dualsum", parents=[common], help="dual-sum experiments")
    p.add_argument("--mode", choices=["lemma3", "proposition_b"], default="proposition_b")
    p.add_argument("--x-exponent", dest="x_exponent", type=float,
                   help="X = T^x_exponent along the proposition_b family")
    p.add_argument("--n-exponent", dest="n_exponent", type=float, default=1.4,
                   help="N = ceil(T^e) in lemma3 mode")
    p = sub.add_parser("phase", parents=[common], help="stationary phase check")
    p.add_argument("--kind", choices=["quadratic", "quartic"], default="quartic")
    p.add_argument("--y-grid", dest="y_grid", type=_grid)
    p = sub.add_parser("exponents", parents=[common], help="exact exponent chain")
    p.add_argument("action", nargs="?", choices=["verify"], default="verify")
    p.add_argument("--mutate", metavar="NAME",
                   help="shift one constant (or alias smallL/mediumL/largeL) by 1/100")
    return parser


COMMANDS = {
    "coeffs": cmd_coeffs,
    "delta2": cmd_delta2,
    "asum": cmd_asum,
    "smoothed": cmd_smoothed,
    "dualsum": cmd_dualsum,
    "phase": cmd_phase,
    "exponents": cmd_exponents,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s",
                        level=logging.WARNING if args.quiet else logging.INFO, force=True)
    try:
        cfg = load_config(args.config, vars(args))
    except FormatError as exc:
        print(f"error: config {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, args)
    except (InvalidArgumentError, RangeError, DomainError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (OSError, RslabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
