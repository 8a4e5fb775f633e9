"""Command-line front end.

Subcommands ``pdf``, ``cdf``, ``cf`` and ``mellin`` tabulate a function over a
grid; ``sample`` draws variates; ``check`` runs a verification suite and
prints its JSON report.

Exit codes: 0 success, 1 check failure, 2 usage or domain error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import __version__, checks, dist
from .errors import BudgetError, ConvergenceError, DomainError, PrecisionError
from .params import BpbParams, FreeStableParams, from_bpb, make_params

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
MAX_GRID = 10_000_000
MAX_SAMPLES = 100_000_000
SEED_ENV = "FREESTABLE_SEED"
DEFAULT_SEED = 42

NUMERIC_ERRORS = (ConvergenceError, PrecisionError, BudgetError)

# per-subcommand grid defaults (min, max, n) and the methods each accepts
_GRID_DEFAULTS = {"pdf": (-5.0, 5.0, 101), "cdf": (-5.0, 5.0, 101), "cf": (0.0, 10.0, 101), "mellin": (-0.5, 0.5, 11)}
_METHODS = {
    "pdf": ("auto", "series", "inversion"),
    "cdf": ("auto",),
    "cf": ("auto", "series", "fourier"),
    "mellin": ("closed-form",),
}


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    params: FreeStableParams | None = None
    grid: np.ndarray | None = None
    method: str = "auto"
    tolerance: float = 1e-12
    seed: int = DEFAULT_SEED
    count: int = 0
    law: str = "free"
    kind: str = "free"
    suite: str = "all"
    fmt: str = "csv"
    output: str | None = None


def _fmt(v: float) -> str:
    # 17 significant digits round-trip every double; format() ignores the locale
    return format(float(v), ".17g")


def _json_num(v: float):
    v = float(v)
    return v if math.isfinite(v) else None


def _count(text: str, what: str, hi: int) -> int:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"{what} must be a number, got {text!r}") from None
    if not v.is_integer() or not 1 <= v <= hi:
        raise UsageError(f"{what} must be an integer in [1, {hi}], got {text}")
    return int(v)


def _seed(arg: str | None) -> int:
    text = arg if arg is not None else os.environ.get(SEED_ENV)
    if text is None:
        return DEFAULT_SEED
    try:
        seed = int(text)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {text!r}") from None
    if seed < 0:
        raise UsageError(f"seed must be non-negative, got {seed}")
    return seed


def _params(args) -> FreeStableParams:
    if args.alpha is None or args.rho is None:
        raise UsageError("--alpha and --rho are required")
    if args.bpb:
        return from_bpb(BpbParams(args.alpha, args.rho))
    return make_params(args.alpha, args.rho)


def _grid(args, sub: str) -> np.ndarray:
    if sub == "mellin" and args.s is not None:
        if args.min is not None or args.max is not None or args.n is not None:
            raise UsageError("--s cannot be combined with --min/--max/--n")
        return np.array([args.s])
    lo0, hi0, n0 = _GRID_DEFAULTS[sub]
    lo = lo0 if args.min is None else args.min
    hi = hi0 if args.max is None else args.max
    n = n0 if args.n is None else _count(args.n, "grid count --n", MAX_GRID)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError("grid bounds must be finite")
    if hi < lo or (n > 1 and hi == lo):
        raise UsageError(f"need --min < --max, got {lo} and {hi}")
    if args.spacing == "log":
        if lo <= 0:
            raise UsageError("log spacing needs --min > 0")
        return np.geomspace(lo, hi, n) if n > 1 else np.array([lo])
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def build_config(args) -> CliConfig:
    sub = args.command
    cfg = CliConfig(sub, fmt=args.format, output=args.output)
    if sub == "check":
        cfg.suite = args.suite
        cfg.seed = _seed(args.seed)
        return cfg
    cfg.params = _params(args)
    if sub == "sample":
        cfg.law = args.law
        cfg.count = _count(args.n, "sample count --n", MAX_SAMPLES)
        cfg.seed = _seed(args.seed)
        return cfg
    if not 1e-14 <= args.tolerance <= 1e-2:
        raise UsageError(f"tolerance must lie in [1e-14, 1e-2], got {args.tolerance}")
    cfg.tolerance = args.tolerance
    method = args.method or _METHODS[sub][0]
    if method not in _METHODS[sub]:
        raise UsageError(f"{sub} does not support --method {method} (choose from {', '.join(_METHODS[sub])})")
    cfg.method = method
    cfg.kind = getattr(args, "kind", "free")
    cfg.grid = _grid(args, sub)
    return cfg


# ---------------------------------------------------------------------------
# evaluation


def _pointwise(fn: Callable[[float], object], grid: np.ndarray, label: str) -> list:
    out = []
    for v in grid:
        try:
            out.append(fn(float(v)))
        except NUMERIC_ERRORS as exc:
            raise NumericFailure(f"numerical failure at {label}={_fmt(v)}: {exc}") from exc
    return out


def _vector_then_locate(vec: Callable[[np.ndarray], np.ndarray], scalar, grid, label) -> np.ndarray:
    # the vectorized path is fast; on failure, rerun point by point to name the culprit
    try:
        return np.asarray(vec(grid), dtype=float)
    except NUMERIC_ERRORS:
        return np.asarray(_pointwise(scalar, grid, label), dtype=float)


def cmd_pdf(cfg: CliConfig) -> tuple[list[str], list[list[float]]]:
    p, m = cfg.params, cfg.method
    y = _vector_then_locate(lambda g: dist.pdf_array(p, g, m), lambda v: dist.pdf(p, v, m), cfg.grid, "x")
    return ["x", "pdf"], [list(r) for r in zip(cfg.grid, y)]


def cmd_cdf(cfg: CliConfig) -> tuple[list[str], list[list[float]]]:
    p, tol = cfg.params, cfg.tolerance
    y = _vector_then_locate(lambda g: dist.cdf_array(p, g, tol), lambda v: dist.cdf(p, v), cfg.grid, "x")
    return ["x", "cdf"], [list(r) for r in zip(cfg.grid, y)]


def _cf_point(p: FreeStableParams, method: str, tol: float) -> Callable[[float], complex]:
    from .series import free_cf_series

    if method == "series":
        def f(z):
            v = complex(free_cf_series(p, abs(z), tol).value)
            return v.conjugate() if z < 0 else v
        return f
    if method == "fourier":
        return lambda z: complex(dist.cf_fourier(p, z, max(tol, 1e-10)).value)
    return lambda z: dist.cf(p, z, tol)


def cmd_cf(cfg: CliConfig) -> tuple[list[str], list[list[float]]]:
    vals = _pointwise(_cf_point(cfg.params, cfg.method, cfg.tolerance), cfg.grid, "z")
    return ["z", "cf_re", "cf_im"], [[z, v.real, v.imag] for z, v in zip(cfg.grid, vals)]


_MELLIN = {"free": dist.mellin_free, "classical": dist.mellin_classical, "cf": dist.mellin_cf}


def cmd_mellin(cfg: CliConfig) -> tuple[list[str], list[list[float]]]:
    fn = _MELLIN[cfg.kind]
    vals = [complex(fn(cfg.params, float(s))) for s in cfg.grid]
    return ["s", "mellin_re", "mellin_im"], [[s, v.real, v.imag] for s, v in zip(cfg.grid, vals)]


def cmd_sample(cfg: CliConfig) -> np.ndarray:
    rng = dist.RngState(cfg.seed)
    draw = dist.sample_free if cfg.law == "free" else dist.sample_classical
    return draw(cfg.params, rng, cfg.count)


def cmd_check(cfg: CliConfig) -> checks.CheckReport:
    return checks.run_suite(cfg.suite, checks.SuiteConfig(seed=cfg.seed))


# ---------------------------------------------------------------------------
# output


def _metadata(cfg: CliConfig) -> dict:
    p = cfg.params
    meta = {"alpha": p.alpha, "rho": p.rho, "method": cfg.method, "tolerance": cfg.tolerance, "version": __version__}
    if cfg.subcommand == "mellin":
        meta["kind"] = cfg.kind
    return meta


def render_table(cfg: CliConfig, header: Sequence[str], rows: list[list[float]]) -> str:
    if cfg.fmt == "json":
        doc = {
            "metadata": _metadata(cfg),
            "columns": list(header),
            "rows": [[_json_num(v) for v in r] for r in rows],
        }
        return json.dumps(doc, allow_nan=False) + "\n"
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


def render_sample(cfg: CliConfig, values: np.ndarray) -> str:
    if cfg.fmt == "json":
        p = cfg.params
        doc = {
            "metadata": {"alpha": p.alpha, "rho": p.rho, "law": cfg.law, "n": cfg.count, "seed": cfg.seed,
                         "version": __version__},
            "values": [_json_num(v) for v in values],
        }
        return json.dumps(doc, allow_nan=False) + "\n"
    return "".join(_fmt(v) + "\n" for v in values)


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# argument parsing


def _common(sp: argparse.ArgumentParser, *, params: bool = True) -> None:
    if params:
        sp.add_argument("--alpha", type=float, help="stability index in (0, 1) or (1, 2]")
        sp.add_argument("--rho", type=float, help="positivity parameter P(X > 0) (rho_tilde with --bpb)")
        sp.add_argument("--bpb", action="store_true", help="read --rho as the alternative rho_tilde coordinate")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", help="write to this file instead of standard output")


def _grid_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--min", type=float)
    sp.add_argument("--max", type=float)
    sp.add_argument("--n", help="number of grid points (accepts 1e3 style)")
    sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
    sp.add_argument("--method")
    sp.add_argument("--tolerance", type=float, default=1e-12)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freestable", description="Free stable distributions: tables, samples, checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("pdf", help="density on a grid (methods: auto, series, inversion)")
    _common(sp)
    _grid_args(sp)
    sp = sub.add_parser("cdf", help="distribution function on a grid")
    _common(sp)
    _grid_args(sp)
    sp = sub.add_parser("cf", help="characteristic function on a z grid (methods: auto, series, fourier)")
    _common(sp)
    _grid_args(sp)
    sp = sub.add_parser("mellin", help="Mellin transform in closed form")
    _common(sp)
    _grid_args(sp)
    sp.add_argument("--s", type=float, help="single evaluation point instead of a grid")
    sp.add_argument("--kind", choices=tuple(_MELLIN), default="free",
                    help="free: E[X^s; X>0]; classical: the classical counterpart; cf: transform of the cf")

    sp = sub.add_parser("sample", help="draw variates, one per line")
    _common(sp)
    sp.add_argument("--law", choices=("free", "classical"), default="free")
    sp.add_argument("--n", default="1", help="sample count (accepts 1e5 style)")
    sp.add_argument("--seed", help=f"integer seed; falls back to ${SEED_ENV}, then {DEFAULT_SEED}")

    sp = sub.add_parser("check", help="run a verification suite and print a JSON report")
    _common(sp, params=False)
    sp.add_argument("--suite", choices=("all",) + checks.SUITES, default="all")
    sp.add_argument("--seed", help=f"integer seed; falls back to ${SEED_ENV}, then {DEFAULT_SEED}")
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on malformed flags
    try:
        cfg = build_config(args)
        if cfg.subcommand == "check":
            report = cmd_check(cfg)
            _write(json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n", cfg.output)
            bad = [c.id for c in report.cases if not c.passed]
            if bad:
                print(f"freestable: {len(bad)} of {len(report.cases)} checks failed: {', '.join(bad)}", file=sys.stderr)
                return EXIT_CHECK
            return EXIT_OK
        if cfg.subcommand == "sample":
            _write(render_sample(cfg, cmd_sample(cfg)), cfg.output)
            return EXIT_OK
        command = {"pdf": cmd_pdf, "cdf": cmd_cdf, "cf": cmd_cf, "mellin": cmd_mellin}[cfg.subcommand]
        header, rows = command(cfg)
        _write(render_table(cfg, header, rows), cfg.output)
        return EXIT_OK
    except (UsageError, DomainError) as exc:
        print(f"freestable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"freestable: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NUMERIC_ERRORS as exc:
        print(f"freestable: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"freestable: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))
