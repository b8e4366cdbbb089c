"""``gap`` command-line front end.

Exit codes: 0 success, 1 a verification found a counterexample, 2 range or
argument error, 3 accuracy-certificate failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .errors import AccuracyError, ArgumentError, GapError, RangeError, ResourceError
from .expsum import (
    Coefficients,
    RationalApprox,
    approx_residual,
    bilinear_sum,
    exp_sum,
    progression_weights,
    rational_approx,
    rational_character_sum,
    type_one_envelope,
    vaughan_check,
)
from .goldbach import ArcPartition, arc_integrals, discrepancy_scan, exception_scan, rep_counts
from .output import render_csv, render_json
from .progression import ResidueClass, coprime_residues
from .sieve import (
    DEFAULT_TABLE_BUDGET,
    CacheError,
    LambdaTable,
    build_lambda_table,
    bv_scan,
    fnv1a64,
    load_table,
    save_table,
)
from .singular import (
    DEFAULT_PRODUCT_BOUND,
    DEFAULT_SERIES_BOUND,
    singular_series_product,
    singular_series_truncated,
)

log = logging.getLogger("gap")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_RANGE = 2
EXIT_ACCURACY = 3
EXIT_USAGE = 64
IDENTITY_TOL = 1e-9


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    table_limit: int = 0
    cache_path: Optional[Path] = None
    cache_dir: Optional[Path] = None
    threads: int = 1
    output_format: str = "csv"
    seed: int = 0
    budget_bytes: int = DEFAULT_TABLE_BUDGET
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.threads < 1:
            raise ArgumentError(f"threads must be >= 1, got {self.threads}")
        if self.table_limit and self.table_limit < 2:
            raise ArgumentError(f"table limit must be >= 2, got {self.table_limit}")


def _config_from_args(args) -> RunConfig:
    env_dir = os.environ.get("GAP_CACHE_DIR")
    return RunConfig(
        table_limit=args.limit or 0,
        cache_path=Path(args.cache) if args.cache else None,
        cache_dir=Path(env_dir) if env_dir and not args.cache else None,
        threads=args.threads,
        output_format=args.format,
        seed=args.seed,
        budget_bytes=args.budget_bytes,
        params={k: v for k, v in vars(args).items()},
    )


def obtain_table(required: int, cfg: RunConfig) -> LambdaTable:
    """Load a cached table covering ``required`` or sieve (and cache) one."""
    limit = max(int(required), cfg.table_limit, 2)
    path = cfg.cache_path
    if path is None and cfg.cache_dir is not None:
        path = cfg.cache_dir / f"lambda-{limit}.gapl"
    if path is not None and path.exists():
        try:
            table = load_table(path, cfg.budget_bytes)
            if table.limit >= limit:
                log.info("loaded table up to %d from %s", table.limit, path)
                return table
            log.info("cache %s covers only %d < %d; rebuilding", path, table.limit, limit)
        except CacheError as exc:
            log.warning("ignoring cache: %s", exc)
    table = build_lambda_table(limit, cfg.budget_bytes)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_table(table, path)
        log.info("cached table up to %d at %s", limit, path)
    return table


def _emit(text: str, cfg: RunConfig) -> None:
    out = cfg.params.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _classes(args) -> tuple[ResidueClass, ResidueClass]:
    return ResidueClass.normalized(args.r, args.b1), ResidueClass.normalized(args.r, args.b2)


def _parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}")


def _parse_alpha(text: str):
    """``0.25``, ``1/4`` (exact rational) or ``golden``."""
    if text == "golden":
        return (math.sqrt(5) - 1) / 2
    if "/" in text:
        return Fraction(text)
    return float(text)


def _write_plot_data(path: str, ns, R, main) -> None:
    rows = zip(ns, R, main)
    Path(path).write_text(render_csv("plot-data", ["n", "R", "main"], rows))


# --- commands ---------------------------------------------------------------


def cmd_sieve(cfg: RunConfig, args) -> int:
    table = obtain_table(args.limit or 2, cfg)
    raw = np.ascontiguousarray(table.lam, dtype="<f8").tobytes()
    row = {
        "limit": table.limit,
        "primes": int(table.is_prime.sum()),
        "prime_powers": int(np.count_nonzero(table.lam)),
        "psi": math.fsum(table.lam),
        "checksum": f"{fnv1a64(raw):016x}",
    }
    if cfg.output_format == "json":
        _emit(render_json(row), cfg)
    else:
        _emit(render_csv("sieve", list(row), [list(row.values())]), cfg)
    return EXIT_OK


def cmd_singular(cfg: RunConfig, args) -> int:
    prod = singular_series_product(args.r, args.h, args.product_bound)
    trunc = singular_series_truncated(args.r, args.h, args.series_bound)
    row = {
        "r": args.r,
        "h": args.h,
        "product": prod.value,
        "product_bound": args.product_bound,
        "truncated": trunc.value,
        "series_bound": args.series_bound,
        "delta": trunc.value - prod.value,
        "tail_bound": prod.tail_bound,
    }
    if cfg.output_format == "json":
        _emit(render_json(row), cfg)
    else:
        _emit(render_csv("singular", list(row), [list(row.values())]), cfg)
    return EXIT_OK


def cmd_expsum(cfg: RunConfig, args) -> int:
    rc = ResidueClass.normalized(args.r, args.b)
    table = obtain_table(rc.r * args.N + rc.b, cfg)
    if args.q is not None:
        header = ["r", "b", "N", "a", "q", "beta", "re", "im", "abs", "main_re", "main_im", "residual", "envelope", "ratio"]
        rows = []
        for beta in args.beta:
            ra = RationalApprox(args.a, args.q, beta)
            res = approx_residual(table, rc, args.N, ra, args.strip_plus_one)
            rows.append(
                [rc.r, rc.b, args.N, ra.a, ra.q, beta, res.actual.real, res.actual.imag, abs(res.actual),
                 res.main.real, res.main.imag, res.residual, res.envelope, res.ratio]
            )
    else:
        header = ["r", "b", "N", "alpha", "re", "im", "abs", "envelope", "ratio"]
        trivial = math.fsum(progression_weights(table, rc, args.N))
        rows = []
        for text in args.alpha:
            v = exp_sum(table, rc, args.N, _parse_alpha(text)).value
            rows.append([rc.r, rc.b, args.N, text, v.real, v.imag, abs(v), trivial, abs(v) / trivial if trivial else math.nan])
    _emit_rows(cfg, "expsum", header, rows)
    return EXIT_OK


def _emit_rows(cfg: RunConfig, command: str, header, rows, extra: Optional[dict] = None) -> None:
    if cfg.output_format == "json":
        payload = dict(extra or {})
        payload["rows"] = [dict(zip(header, row)) for row in rows]
        _emit(render_json(payload), cfg)
    else:
        _emit(render_csv(command, header, rows, extra), cfg)


def cmd_identity_verify(cfg: RunConfig, args) -> int:
    def per_r(r: int):
        worst = 0.0
        count = 0
        for q in range(1, args.max_q + 1):
            for a in coprime_residues(q):
                for b in coprime_residues(r):
                    lhs, rhs = rational_character_sum(r, b, q, a)
                    worst = max(worst, abs(lhs - rhs))
                    count += 1
        return count, worst

    results = ordered_map(per_r, range(1, args.max_r + 1), cfg.threads)
    count = sum(c for c, _ in results)
    worst = max(w for _, w in results)
    ok = worst <= IDENTITY_TOL
    _verify_summary(cfg, "identity", count, worst, ok)
    return EXIT_OK if ok else EXIT_FAILED


def _verify_summary(cfg: RunConfig, what: str, count: int, worst: float, ok: bool) -> None:
    if cfg.output_format == "json":
        _emit(render_json({"tuples": count, "max_abs_delta": worst, "tolerance": IDENTITY_TOL, "verified": ok}), cfg)
    elif ok:
        _emit(f"{what} verified for {count} tuples (max |delta| = {worst:.3g})\n", cfg)
    else:
        _emit(f"{what} FAILED: max |delta| = {worst:.3g} over {count} tuples\n", cfg)


def cmd_vaughan(cfg: RunConfig, args) -> int:
    table = obtain_table(args.max_n, cfg)

    def per_y(y: float):
        worst = 0.0
        n0 = math.floor(y) + 1
        for n in range(n0, args.max_n + 1):
            lhs, rhs = vaughan_check(table, n, y)
            worst = max(worst, abs(lhs - rhs))
        return args.max_n - n0 + 1, worst

    results = ordered_map(per_y, args.y, cfg.threads)
    count = sum(c for c, _ in results)
    worst = max(w for _, w in results)
    ok = worst <= IDENTITY_TOL
    _verify_summary(cfg, "Vaughan identity", count, worst, ok)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bilinear(cfg: RunConfig, args) -> int:
    rc = ResidueClass.normalized(args.r, args.b)
    table = obtain_table(args.X, cfg)
    coeffs = Coefficients(args.a_coeff, args.b_coeff, args.y)
    header = ["r", "b", "M", "N", "X", "a_coeff", "b_coeff", "alpha", "scaled", "q", "re", "im", "abs", "envelope", "ratio"]
    rows = []
    for text in args.alpha:
        alpha = _parse_alpha(text)
        value = bilinear_sum(table, rc, args.M, args.N, args.X, coeffs, alpha, not args.unscaled)
        q = rational_approx(float(alpha), max(1, math.isqrt(args.X))).q
        env = type_one_envelope(args.M, args.N, rc.r, q)
        rows.append([rc.r, rc.b, args.M, args.N, args.X, coeffs.a, coeffs.b, text, not args.unscaled, q,
                     value.real, value.imag, abs(value), env, abs(value) / env])
    _emit_rows(cfg, "bilinear", header, rows)
    return EXIT_OK


def cmd_reps(cfg: RunConfig, args) -> int:
    rc1, rc2 = _classes(args)
    table = obtain_table(rc1.r * args.N + max(rc1.b, rc2.b), cfg)
    reps = rep_counts(table, rc1, rc2, args.N, method=args.method)
    ns = np.arange(1, args.N + 1)
    meta = {"r": rc1.r, "b1": rc1.b, "b2": rc2.b, "N": args.N, "method": reps.method, "error_bound": reps.error_bound}
    _emit_rows(cfg, "reps", ["n", "R"], zip(ns, reps.values[1:]), meta)
    if args.emit_plot_data:
        from .goldbach import main_terms

        _write_plot_data(args.emit_plot_data, ns, reps.values[1:], main_terms(rc1, rc2, ns))
    return EXIT_OK


def render_scan(report, fmt: str) -> str:
    """Serialise a :class:`DiscrepancyReport` as CSV or JSON text."""
    meta = {
        "r": report.r,
        "b1": report.b1,
        "b2": report.b2,
        "N": report.N,
        "window": f"{report.window[0]}:{report.window[1]}",
        "method": report.method,
        "error_bound": report.error_bound,
        "product_bound": report.product_bound,
        "tail_bound": report.tail_bound,
    }
    header = ["n", "R", "main", "delta", "relative"]
    if fmt == "json":
        return render_json(
            {"params": meta, "aggregates": report.aggregates, "rows": [dict(zip(header, row)) for row in report.rows()]}
        )
    meta.update(report.aggregates)
    return render_csv("scan", header, report.rows(), meta)


def cmd_scan(cfg: RunConfig, args) -> int:
    rc1, rc2 = _classes(args)
    table = obtain_table(rc1.r * args.N + max(rc1.b, rc2.b), cfg)
    report = discrepancy_scan(
        table, rc1, rc2, args.N, args.window, threads=cfg.threads, P=args.product_bound, method=args.method
    )
    _emit(render_scan(report, cfg.output_format), cfg)
    if args.emit_plot_data:
        _write_plot_data(args.emit_plot_data, report.n, report.R, report.main)
    return EXIT_OK


def cmd_exceptions(cfg: RunConfig, args) -> int:
    rc1, rc2 = _classes(args)
    table = obtain_table(args.N, cfg)
    scan = exception_scan(table, rc1, rc2, args.N)
    meta = {"r": rc1.r, "b1": rc1.b, "b2": rc2.b, "N": args.N, "count": scan.count}
    if args.above is not None:
        meta["above"] = args.above
        meta["count_above"] = scan.count_above(args.above)
        meta["fraction_of_N_over_r"] = scan.count_above(args.above) / (args.N / rc1.r)
    _emit_rows(cfg, "exceptions", ["even"], [[m] for m in scan.evens], meta)
    return EXIT_OK


def cmd_arcs(cfg: RunConfig, args) -> int:
    rc1, rc2 = _classes(args)
    table = obtain_table(rc1.r * args.N + max(rc1.b, rc2.b), cfg)
    part = ArcPartition(args.A, args.N)
    targets = args.n or [args.N]
    results = arc_integrals(table, rc1, rc2, args.N, targets, part, args.grid, cfg.threads)
    header = ["n", "major_re", "major_im", "minor_re", "minor_im", "R", "total_check", "main", "relative_gap"]
    rows = [
        [a.n, a.major.real, a.major.imag, a.minor.real, a.minor.imag, a.R, a.total_check, a.main, a.relative_gap]
        for a in results
    ]
    meta = {"r": rc1.r, "b1": rc1.b, "b2": rc2.b, "N": args.N, "A": args.A, "max_q": part.max_q,
            "half_width": part.half_width, "major_measure": part.measure()}
    _emit_rows(cfg, "arcs", header, rows, meta)
    ok = all(a.total_check <= 1e-4 * (1 + a.R) for a in results)
    if not ok:
        log.error("arc quadrature failed to reproduce R(n)")
        return EXIT_ACCURACY
    return EXIT_OK


def cmd_bv(cfg: RunConfig, args) -> int:
    table = obtain_table(args.R * args.N, cfg)
    scan = bv_scan(table, args.R, args.N, args.q, cfg.threads, args.strip_plus_one)
    meta = {"R": args.R, "N": args.N, "q": args.q, "mean": scan.mean, "mean_over_RN": scan.mean / (args.R * args.N)}
    _emit_rows(cfg, "bv", ["r", "E"], scan.rows, meta)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = Parser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--limit", type=int, default=0, help="sieve at least this far (default: what the command needs)")
    g.add_argument("--cache", default=None, help="GAPL table cache file (default: $GAP_CACHE_DIR/lambda-LIMIT.gapl)")
    g.add_argument("--threads", type=int, default=1, help="worker threads; output does not depend on it")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--out", default=None, help="write results here instead of stdout")
    g.add_argument("--seed", type=int, default=0, help="seed for randomised choices")
    g.add_argument("--budget-bytes", type=int, default=DEFAULT_TABLE_BUDGET, help="memory cap for the sieve table")
    g.add_argument("--config", default=None, help="JSON config file; command-line flags win")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _progression_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=int, required=True, help="common modulus")
    p.add_argument("--b1", type=int, required=True, help="residue of the first summand")
    p.add_argument("--b2", type=int, required=True, help="residue of the second summand")
    p.add_argument("--N", type=int, required=True, help="range of the progression index")


COMMANDS = {}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = Parser(prog="gap", description="Circle-method computations for Goldbach's problem in arithmetic progressions.")
    parser.add_argument("--version", action="version", version=f"gap {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)

    def add(name, func, help_text, aliases=()):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text, aliases=list(aliases))
        COMMANDS[name] = func
        p.set_defaults(func=func)
        return p

    add("sieve", cmd_sieve, "Sieve the von Mangoldt function and prime flags; optionally cache the table.")

    p = add("singular", cmd_singular,
            "Singular series of the Goldbach problem in progressions: Euler product vs. truncated Ramanujan-sum series.")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--product-bound", type=int, default=DEFAULT_PRODUCT_BOUND, help="largest prime in the product")
    p.add_argument("--series-bound", type=int, default=DEFAULT_SERIES_BOUND, help="largest q in the series")

    p = add("expsum", cmd_expsum,
            "Generating function S_{b,r}(N, alpha) over a progression; with --q, its major-arc approximation "
            "and residual against q(1+|beta|N) E_{rq}(rN+b).")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--alpha", nargs="+", default=["0"], help="frequencies: decimal, exact a/q, or 'golden'")
    p.add_argument("--q", type=int, default=None, help="denominator of the rational approximation")
    p.add_argument("--a", type=int, default=1, help="numerator of the rational approximation")
    p.add_argument("--beta", type=float, nargs="+", default=[0.0], help="offsets from a/q")
    p.add_argument("--strip-plus-one", action="store_true", help="drop the +1 in the error-term envelope")

    p = add("lemma31-verify", cmd_identity_verify,
            "Rational exponential-sum identity over a progression (sum of e_{rq}(ah) over h = b mod r, (h,q)=1) "
            "checked exactly for every admissible tuple.",
            aliases=("identity-verify",))
    p.add_argument("--max-r", type=int, default=24)
    p.add_argument("--max-q", type=int, default=24)

    p = add("vaughan-verify", cmd_vaughan, "Vaughan's identity for Lambda(n), checked for every y < n <= max-n.")
    p.add_argument("--max-n", type=int, default=10**4)
    p.add_argument("--y", type=float, nargs="+", default=[2, 5, 10, 31])

    p = add("bilinear", cmd_bilinear,
            "Type I / Type II bilinear sums over mn = b mod r with phase e_r(alpha mn), "
            "against the (MN/(rq) + M + q) log 2qM envelope.")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--a-coeff", choices=("unit", "moebius"), default="unit")
    p.add_argument("--b-coeff", choices=("unit", "log", "lambda-tail"), default="unit")
    p.add_argument("--y", type=float, default=None, help="cut-off for lambda-tail coefficients")
    p.add_argument("--alpha", nargs="+", default=["golden"])
    p.add_argument("--unscaled", action="store_true", help="use e(alpha mn) instead of e_r(alpha mn)")

    p = add("reps", cmd_reps,
            "Representation counts R(n) = sum Lambda(r n1 + b1) Lambda(r n2 + b2) over n1 + n2 = n, "
            "the circle-method integral inside the progression.")
    _progression_args(p)
    p.add_argument("--method", choices=("auto", "fft", "ntt", "direct"), default="auto")
    p.add_argument("--emit-plot-data", default=None, help="also write (n, R, main) triples to this file")

    p = add("scan", cmd_scan,
            "Discrepancy between R(n) and the main term (r/phi(r))^2 S_r(rn+b1+b2) n over a window.")
    _progression_args(p)
    p.add_argument("--window", type=_parse_window, default=None, help="LO:HI (default 1:N)")
    p.add_argument("--product-bound", type=int, default=DEFAULT_PRODUCT_BOUND)
    p.add_argument("--method", choices=("auto", "fft", "ntt", "direct"), default="auto")
    p.add_argument("--emit-plot-data", default=None, help="also write (n, R, main) triples to this file")

    p = add("exceptions", cmd_exceptions,
            "Exceptional set: even m <= N, m = b1 + b2 mod r, with no m = p1 + p2, p_i = b_i mod r.")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b1", type=int, required=True)
    p.add_argument("--b2", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--above", type=int, default=None, help="also count exceptions above this value")

    p = add("arcs", cmd_arcs,
            "Major / minor arc split of the circle-method integral (arcs |alpha - a/q| <= log^A N / N, "
            "q <= log^A N) by exact quadrature.")
    _progression_args(p)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--n", type=int, nargs="+", default=None, help="targets (default: N)")
    p.add_argument("--grid", type=int, default=None, help="quadrature nodes (>= 2N + 2)")

    p = add("bv", cmd_bv,
            "Mean prime-counting error sum_{r<=R} E_{qr}(rN) / R, the Bombieri-Vinogradov-type average.")
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--strip-plus-one", action="store_true", help="drop the +1 in E_d(x)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        conf = json.loads(Path(known.config).read_text())
    except (OSError, ValueError) as exc:
        raise ArgumentError(f"cannot read config {known.config}: {exc}")
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    globals_ = {k.replace("-", "_"): v for k, v in conf.items() if not isinstance(v, dict)}
    for name, p in sub.choices.items():
        section = {k.replace("-", "_"): v for k, v in conf.get(name, {}).items()}
        p.set_defaults(**globals_, **section)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ArgumentError as exc:
        print(f"gap: {exc}", file=sys.stderr)
        return EXIT_RANGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = _config_from_args(args)
        return args.func(cfg, args)
    except AccuracyError as exc:
        print(f"gap: accuracy: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (RangeError, ArgumentError, ResourceError) as exc:
        print(f"gap: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except GapError as exc:
        print(f"gap: {exc}", file=sys.stderr)
        return EXIT_RANGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
