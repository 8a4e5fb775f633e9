"""Executable identity suite.

Each check turns one distributional identity into a named, tolerance-bearing
:class:`CheckCase`.  Checks never raise on a failed identity; a numerical
exception inside a check is recorded as a failing case with the message in
``details``.  Monte Carlo cases draw from an :class:`RngState` derived from
the suite seed and the case id, so changing the seed changes only the
Monte Carlo metrics.
"""
from __future__ import annotations

import logging
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special, stats

from . import dist
from .errors import FreeStableError, PrecisionError
from .params import FreeStableParams, dual, make_params, reflected
from .quad import integrate_adaptive
from .series import free_cf_series
from .specfun import sin_pi

__all__ = [
    "CheckCase",
    "CheckReport",
    "SuiteConfig",
    "SUITES",
    "check_duality",
    "check_positivity",
    "check_normalization",
    "check_mellin_quadrature",
    "check_factorization_mellin",
    "check_cauchy_factorization",
    "check_ratio_identity",
    "check_cf_consistency",
    "check_cf_bessel",
    "check_mellin_cf",
    "check_density_at_zero",
    "check_classical_sampler",
    "ks_critical",
    "run_suite",
]

log = logging.getLogger(__name__)

# identities each check exercises; reported as the anchor of every case
ANCHORS = {
    "duality": "duality law psi_{a,r}(x) = x^(-a-1) psi_{1/a,a r}(x^(-a))",
    "positivity": "P(X > 0) = rho",
    "normalization": "total mass one",
    "mellin_quadrature": "positive-part Mellin transform of the free stable law",
    "factorization_mellin": "classical = free x Gamma(2)^(1-1/a), Mellin form",
    "cauchy_factorization": "X_{a,r} = X_{a,1} x K_r",
    "ratio_identity": "X_{a,r1}/X_{a,r2} = X_{a,r2}/X_{a,r1} in law, and for the cutoffs",
    "cf_consistency": "characteristic-function series vs Fourier integral of the density",
    "cf_bessel": "semicircle characteristic function J1(2z)/z",
    "mellin_cf": "Mellin transform of the characteristic function",
    "density_at_zero": "psi(0) = sin(pi rho)/pi",
    "classical_sampler": "classical = free x Gamma(2)^(1-1/a), in law",
}

# a statement with no executable content, listed in every report
OUT_OF_SCOPE = ("Mellin cancellation statement (uniqueness of a factorization; used only inside a proof, nothing to execute)",)


@dataclass(frozen=True)
class CheckCase:
    id: str
    anchor: str
    params: FreeStableParams | None
    metric: float
    tolerance: float
    details: str = ""
    params2: FreeStableParams | None = None

    @property
    def passed(self) -> bool:
        return bool(self.metric <= self.tolerance)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "paper_ref": self.anchor,
            "alpha": None if self.params is None else self.params.alpha,
            "rho": None if self.params is None else self.params.rho,
            "metric": self.metric if math.isfinite(self.metric) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.params2 is not None:
            d["alpha2"] = self.params2.alpha
            d["rho2"] = self.params2.rho
        if self.details:
            d["details"] = self.details
        return d


@dataclass(frozen=True)
class CheckReport:
    suite_name: str
    cases: tuple[CheckCase, ...]
    seed: int
    wall_time: float
    warnings: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite_name,
            "seed": self.seed,
            "cases": [c.to_dict() for c in self.cases],
            "pass": self.passed,
            "wall_time": self.wall_time,
            "warnings": list(self.warnings),
            "out_of_scope": list(OUT_OF_SCOPE),
        }


def _tag(p: FreeStableParams) -> str:
    return f"a={p.alpha:.6g},r={p.rho:.6g}"


def _failed(case_id: str, kind: str, p, tol: float, exc: Exception, p2=None) -> CheckCase:
    return CheckCase(case_id, ANCHORS[kind], p, math.inf, tol, f"{type(exc).__name__}: {exc}", p2)


def _rel(a, b) -> float:
    """|a - b| relative to the larger magnitude (0 when both vanish)."""
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def ks_critical(n: int, m: int | None = None, level: float = 0.01) -> float:
    """Asymptotic Kolmogorov-Smirnov critical value (one- or two-sample)."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    eff = n if m is None else n * m / (n + m)
    return c / math.sqrt(eff)


# ---------------------------------------------------------------------------
# closed-form and quadrature identities


def check_duality(p: FreeStableParams, xs: Sequence[float], tol: float = 1e-9) -> CheckCase:
    """Both sides from the Cauchy-transform oracle, each on its own law; the
    series value on the small-alpha side is compared as well."""
    cid = f"duality/{_tag(p)}"
    try:
        q = dual(p)
        x = np.asarray(xs, dtype=float)
        y = x ** (-p.alpha)
        jac = x ** (-p.alpha - 1.0)
        lhs = dist.pdf_array(p, x, "inversion")
        rhs = jac * dist.pdf_array(q, y, "inversion")
        small, big = (p, q) if p.alpha < 1.0 else (q, p)
        if small is p:
            series = jac * dist.pdf_array(big, y, "inversion")
            other = dist.pdf_array(p, x, "series")
        else:
            series = dist.pdf_array(p, x, "inversion")
            other = jac * dist.pdf_array(q, y, "series")
        metric = max(
            max((_rel(a, b) for a, b in zip(lhs, rhs)), default=0.0),
            max((_rel(a, b) for a, b in zip(series, other)), default=0.0),
        )
        return CheckCase(cid, ANCHORS["duality"], p, metric, tol, f"{x.size} points", q)
    except FreeStableError as exc:
        return _failed(cid, "duality", p, tol, exc)


def check_positivity(p: FreeStableParams, tol: float = 1e-6) -> CheckCase:
    cid = f"positivity/{_tag(p)}"
    try:
        r = dist.positive_mass(p)
        return CheckCase(cid, ANCHORS["positivity"], p, abs(r.value - p.rho), tol, f"mass {r.value!r}")
    except FreeStableError as exc:
        return _failed(cid, "positivity", p, tol, exc)


def check_normalization(p: FreeStableParams, tol: float = 1e-8) -> CheckCase:
    cid = f"normalization/{_tag(p)}"
    try:
        total = dist.positive_mass(p).value + dist.positive_mass(reflected(p)).value
        return CheckCase(cid, ANCHORS["normalization"], p, abs(total - 1.0), tol, f"total {total!r}")
    except FreeStableError as exc:
        return _failed(cid, "normalization", p, tol, exc)


def check_mellin_quadrature(p: FreeStableParams, s_values: Iterable[float] | None = None, tol: float = 1e-6) -> CheckCase:
    cid = f"mellin_quadrature/{_tag(p)}"
    s_values = (-0.5, 0.25, p.alpha / 2.0) if s_values is None else tuple(s_values)
    try:
        worst = 0.0
        for s in s_values:
            worst = max(worst, _rel(dist.positive_moment(p, s).value, dist.mellin_free(p, s)))
        return CheckCase(cid, ANCHORS["mellin_quadrature"], p, worst, tol, f"s in {list(s_values)}")
    except FreeStableError as exc:
        return _failed(cid, "mellin_quadrature", p, tol, exc)


def check_factorization_mellin(p: FreeStableParams, s_values: Iterable[float] | None = None, tol: float = 1e-12) -> CheckCase:
    cid = f"factorization_mellin/{_tag(p)}"
    if s_values is None:
        s_values = np.linspace(-1.0, p.alpha, 52)[1:-1]
    s_values = [float(s) for s in s_values]
    try:
        worst = 0.0
        for s in s_values:
            c = dist.mellin_classical(p, s)
            f = special.gamma(2.0 + (1.0 - 1.0 / p.alpha) * s) * dist.mellin_free(p, s)
            worst = max(worst, _rel(c, f))
        return CheckCase(cid, ANCHORS["factorization_mellin"], p, worst, tol, f"{len(s_values)} s-points")
    except FreeStableError as exc:
        return _failed(cid, "factorization_mellin", p, tol, exc)


def _cauchy_positive_moment(rho: float, s: float) -> float:
    """Quadrature of x^s against the K_rho density over (0, inf)."""
    sn, cs = math.sin(math.pi * rho), math.cos(math.pi * rho)

    def k(x):
        return sn / math.pi / ((x + cs) ** 2 + sn * sn)

    # u = x^(1+s) on (0, 1], and w = x^(s-1) on [1, inf) where the density decays like x^-2
    e = 1.0 / (1.0 + s)
    head = integrate_adaptive(lambda u: k(u**e) * e, 0.0, 1.0, 1e-13, vectorized=True).value

    def g(w):
        with np.errstate(divide="ignore", over="ignore"):
            x = w ** (-1.0 / (1.0 - s))
            return np.where(np.isfinite(x), k(x) * x * x, sn / math.pi) / (1.0 - s)

    tail = integrate_adaptive(g, 0.0, 1.0, 1e-13, vectorized=True).value
    return head + tail


def check_cauchy_factorization(
    p: FreeStableParams,
    rng: dist.RngState | None,
    n: int = 100_000,
    s_values: Sequence[float] = (-0.5, 0.25, 0.4),
    tol: float = 1e-10,
) -> list[CheckCase]:
    """Closed-form Mellin relation plus a two-sample KS test of the product law.

    The positive part of the product X_{a,1} K_r is X_{a,1} times the positive
    part of K_r, whose Mellin transform sin(pi r s)/sin(pi s) is also checked
    against direct quadrature of the Cauchy density.  ``rng=None`` skips the
    Monte Carlo part.
    """
    out = []
    cid = f"cauchy_factorization/{_tag(p)}/mellin"
    try:
        if not p.alpha < 1.0:
            raise ValueError("the factorization through X_{a,1} needs alpha < 1")
        one = make_params(p.alpha, 1.0)
        worst = 0.0
        for s in s_values:
            k_s = sin_pi(p.rho * s) / sin_pi(s)
            worst = max(worst, _rel(dist.mellin_free(p, s), dist.mellin_free(one, s) * k_s))
            worst = max(worst, _rel(_cauchy_positive_moment(p.rho, s), k_s))
        out.append(CheckCase(cid, ANCHORS["cauchy_factorization"], p, worst, tol, f"s in {list(s_values)}", one))
    except (FreeStableError, ValueError) as exc:
        out.append(_failed(cid, "cauchy_factorization", p, tol, exc))
    if rng is None:
        return out
    cid = f"cauchy_factorization/{_tag(p)}/ks"
    crit = ks_critical(n, n)
    try:
        one = make_params(p.alpha, 1.0)
        x = dist.sample_free(p, rng.split(0), n)
        y = dist.sample_free(one, rng.split(1), n) * dist.sample_cauchy_k(p.rho, rng.split(2), n)
        res = stats.ks_2samp(np.arctan(x), np.arctan(y))
        out.append(
            CheckCase(cid, ANCHORS["cauchy_factorization"], p, float(res.statistic), crit,
                      f"n={n}, p-value {res.pvalue:.3g}", one)
        )
    except FreeStableError as exc:
        out.append(_failed(cid, "cauchy_factorization", p, crit, exc))
    return out


def _cutoff(p: FreeStableParams, rng: dist.RngState, n: int) -> np.ndarray:
    """Samples of X conditioned on X > 0, through the upper part of the quantile table."""
    u = (1.0 - p.rho) + p.rho * rng.uniform(n)
    return dist.quantile_table(p).inverse(u)


def check_ratio_identity(p1: FreeStableParams, p2: FreeStableParams, rng: dist.RngState, n: int = 100_000) -> list[CheckCase]:
    """Two-sample KS on arctan of the two ratio laws, for the full laws and the cutoffs."""
    if p1.alpha != p2.alpha:
        raise ValueError("the ratio identity compares two laws with the same alpha")
    crit = ks_critical(n, n)
    out = []
    for label, draw in (("full", dist.sample_free), ("cutoff", _cutoff)):
        cid = f"ratio_identity/{_tag(p1)}/r2={p2.rho:.6g}/{label}"
        sub = rng.split(0 if label == "full" else 1)
        try:
            a = draw(p1, sub.split(0), n) / draw(p2, sub.split(1), n)
            b = draw(p2, sub.split(2), n) / draw(p1, sub.split(3), n)
            res = stats.ks_2samp(np.arctan(a), np.arctan(b))
            out.append(
                CheckCase(cid, ANCHORS["ratio_identity"], p1, float(res.statistic), crit,
                          f"n={n}, p-value {res.pvalue:.3g}", p2)
            )
        except FreeStableError as exc:
            out.append(_failed(cid, "ratio_identity", p1, crit, exc, p2))
    return out


# ---------------------------------------------------------------------------
# characteristic function


def _cf_series_abs(p: FreeStableParams, z: float, atol: float) -> complex:
    if z < 0:
        return _cf_series_abs(p, -z, atol).conjugate()
    return complex(free_cf_series(p, z, 1e-12, atol=atol).value)


def check_cf_consistency(p: FreeStableParams, zs: Sequence[float] | None = None, tol: float = 1e-6) -> CheckCase:
    cid = f"cf_consistency/{_tag(p)}"
    zs = (0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, -2.5) if zs is None else tuple(zs)
    try:
        worst = 0.0
        for z in zs:
            s = _cf_series_abs(p, z, 1e-10)
            f = dist.cf_fourier(p, z, 1e-9).value
            worst = max(worst, abs(s - f))
        return CheckCase(cid, ANCHORS["cf_consistency"], p, worst, tol, f"z in {list(zs)}")
    except FreeStableError as exc:
        return _failed(cid, "cf_consistency", p, tol, exc)


def check_cf_bessel(zs: Sequence[float] | None = None, tol: float = 1e-8) -> CheckCase:
    """The alpha = 2 law against J1(2z)/z, through both evaluation paths."""
    p = make_params(2.0, 0.5)
    cid = "cf_bessel/a=2,r=0.5"
    zs = np.linspace(-5.0, 5.0, 41) if zs is None else np.asarray(zs, dtype=float)
    try:
        worst = 0.0
        for z in zs:
            exact = 1.0 if z == 0 else special.j1(2.0 * z) / z
            worst = max(worst, abs(dist.cf(p, float(z)) - exact))
        for z in zs[::8]:
            exact = 1.0 if z == 0 else special.j1(2.0 * z) / z
            worst = max(worst, abs(dist.cf_fourier(p, float(z), 1e-10).value - exact))
        return CheckCase(cid, ANCHORS["cf_bessel"], p, worst, tol, f"{zs.size} z-points")
    except FreeStableError as exc:
        return _failed(cid, "cf_bessel", p, tol, exc)


def _series_horizon(p: FreeStableParams, atol: float, zmax: float = 40.0) -> float:
    """Largest z on a 0.5 grid up to which the series keeps absolute accuracy ``atol``."""
    z = 0.5
    while z < zmax:
        try:
            free_cf_series(p, z + 0.5, 1e-12, atol=atol)
        except PrecisionError:
            break
        z += 0.5
    return z


def _bessel_tail(s: float, a: float, b: float = 400.0) -> float:
    """Integral of J1(2z) z^(s-2) over [a, inf): quadrature to b, then the
    first two terms of the oscillatory asymptotics."""
    body = integrate_adaptive(
        lambda z: special.j1(2.0 * z) * z ** (s - 2.0), a, b, 1e-11,
        vectorized=True, points=list(np.arange(a, b, math.pi / 2.0)),
    ).value
    ph = 2.0 * b - 0.75 * math.pi
    g0 = b ** (s - 2.5) / math.sqrt(math.pi)
    g1 = (s - 2.5) * b ** (s - 3.5) / math.sqrt(math.pi)
    return body - 0.5 * g0 * math.sin(ph) - 0.25 * g1 * math.cos(ph)


def check_mellin_cf(p: FreeStableParams, s_values: Sequence[float] = (0.25, 0.5, 0.75), tol: float = 1e-3) -> CheckCase:
    """Truncated quadrature of the CF against z^(s-1), compared with the closed form.

    The series is integrated up to the horizon where it still has absolute
    accuracy 1e-10.  For alpha = 2 the remainder uses J1; otherwise it is
    left out and its size, bounded by the CF magnitude at the horizon, is
    reported in ``details`` (reduced coverage beyond the horizon).
    """
    cid = f"mellin_cf/{_tag(p)}"
    try:
        Z = _series_horizon(p, 1e-10)
        fz = abs(_cf_series_abs(p, Z, 1e-10))
        worst = 0.0
        for s in s_values:

            def g(w, s=s):
                return _cf_series_abs(p, w ** (1.0 / s), 1e-10) / s if w > 0 else 1.0 / s

            v = integrate_adaptive(g, 0.0, Z**s, 1e-9).value
            if p.alpha == 2.0:
                v += _bessel_tail(s, Z)
            worst = max(worst, abs(v - dist.mellin_cf(p, s)) / abs(dist.mellin_cf(p, s)))
        tail = "Bessel tail" if p.alpha == 2.0 else f"tail omitted, |f(Z)|={fz:.2g}"
        return CheckCase(cid, ANCHORS["mellin_cf"], p, worst, tol, f"Z={Z}, {tail}, s in {list(s_values)}")
    except FreeStableError as exc:
        return _failed(cid, "mellin_cf", p, tol, exc)


def check_density_at_zero(p: FreeStableParams, tol: float = 1e-10) -> CheckCase:
    """pdf at 0 and the oracle just either side of 0 against sin(pi rho)/pi."""
    cid = f"density_at_zero/{_tag(p)}"
    target = sin_pi(p.rho) / math.pi
    try:
        vals = [dist.pdf(p, 0.0), dist.pdf(p, 0.0, "inversion")]
        vals += list(dist.pdf_array(p, [-1e-12, 1e-12], "inversion"))
        metric = max(abs(v - target) for v in vals)
        return CheckCase(cid, ANCHORS["density_at_zero"], p, metric, tol)
    except FreeStableError as exc:
        return _failed(cid, "density_at_zero", p, tol, exc)


def check_classical_sampler(p: FreeStableParams, rng: dist.RngState, n: int = 100_000) -> CheckCase:
    """One-sample KS of the product sampler against the classical CDF from the series."""
    cid = f"classical_sampler/{_tag(p)}"
    crit = ks_critical(n)
    try:
        y = dist.sample_classical(p, rng, n)
        res = stats.kstest(y, lambda v: dist.classical_cdf(p, v))
        return CheckCase(cid, ANCHORS["classical_sampler"], p, float(res.statistic), crit,
                         f"n={n}, p-value {res.pvalue:.3g}")
    except FreeStableError as exc:
        return _failed(cid, "classical_sampler", p, crit, exc)


# ---------------------------------------------------------------------------
# suites


def admissible_grid(alphas: Iterable[float] = (0.3, 0.5, 0.7, 0.9, 1.25, 1.5, 1.75, 2.0)) -> list[FreeStableParams]:
    """Each alpha with both endpoints and the midpoint of its admissible rho range."""
    out = []
    for a in alphas:
        lo, hi = (0.0, 1.0) if a < 1.0 else (1.0 - 1.0 / a, 1.0 / a)
        for r in (lo, 0.5 * (lo + hi), hi):
            p = make_params(a, r)
            if p not in out:
                out.append(p)
    return out


def zero_grid() -> list[FreeStableParams]:
    """Twenty pairs with rho strictly inside (0, 1), across both alpha regimes."""
    out = []
    for a in (0.2, 0.45, 0.7, 0.95, 1.1, 1.3, 1.5, 1.7, 1.9):
        lo, hi = (0.0, 1.0) if a < 1.0 else (1.0 - 1.0 / a, 1.0 / a)
        for t in (0.3, 0.8):
            out.append(make_params(a, lo + t * (hi - lo)))
    return out + [make_params(1.95, 0.49), make_params(2.0, 0.5)]


@dataclass
class SuiteConfig:
    """What :func:`run_suite` runs.  Grids may be emptied to skip a family."""

    seed: int = 42
    mc_n: int = 100_000
    grid: list[FreeStableParams] = field(default_factory=admissible_grid)
    duality_x: list[float] = field(default_factory=lambda: list(np.geomspace(0.01, 100.0, 41)))
    zero_grid: list[FreeStableParams] = field(default_factory=zero_grid)
    cf_grid: list[FreeStableParams] | None = None
    mellin_cf_grid: list[FreeStableParams] = field(
        default_factory=lambda: [make_params(a, r) for a, r in ((2.0, 0.5), (1.5, 0.5), (1.5, 0.4), (1.25, 0.5), (1.75, 0.5))]
    )
    cauchy_grid: list[FreeStableParams] = field(default_factory=lambda: [make_params(0.5, 0.5), make_params(0.7, 0.3)])
    ratio_pairs: list[tuple[FreeStableParams, FreeStableParams]] = field(
        default_factory=lambda: [(make_params(0.6, 0.4), make_params(0.6, 0.8))]
    )
    classical_grid: list[FreeStableParams] = field(default_factory=lambda: [make_params(0.5, 1.0), make_params(2.0, 0.5)])


def has_dual(p: FreeStableParams) -> bool:
    """True when alpha >= 1/2 and the dual pair is itself admissible."""
    try:
        dual(p)
    except FreeStableError:
        return False
    return True


def _case_rng(seed: int, case_id: str) -> dist.RngState:
    return dist.RngState(seed, (zlib.crc32(case_id.encode()),))


def _family_runners(cfg: SuiteConfig) -> dict[str, Callable[[], list[CheckCase]]]:
    grid = cfg.grid
    cf_grid = grid if cfg.cf_grid is None else cfg.cf_grid
    return {
        "duality": lambda: [check_duality(p, cfg.duality_x) for p in grid if has_dual(p)],
        "positivity": lambda: [c for p in grid for c in (check_positivity(p), check_normalization(p))],
        "mellin": lambda: [
            c for p in grid for c in (check_mellin_quadrature(p), check_factorization_mellin(p))
        ] + ([check_mellin_quadrature(make_params(2.0, 0.5), (1.0,), tol=1e-10)] if grid else []),
        "cauchy": lambda: [
            c for p in cfg.cauchy_grid
            for c in check_cauchy_factorization(p, _case_rng(cfg.seed, f"cauchy/{_tag(p)}"), cfg.mc_n)
        ],
        "ratio": lambda: [
            c for p1, p2 in cfg.ratio_pairs
            for c in check_ratio_identity(p1, p2, _case_rng(cfg.seed, f"ratio/{_tag(p1)}/{p2.rho}"), cfg.mc_n)
        ],
        "cf": lambda: [check_cf_consistency(p) for p in cf_grid] + ([check_cf_bessel()] if cf_grid else []),
        "mellin_cf": lambda: [check_mellin_cf(p) for p in cfg.mellin_cf_grid],
        "zero": lambda: [check_density_at_zero(p) for p in cfg.zero_grid],
        "classical": lambda: [
            check_classical_sampler(p, _case_rng(cfg.seed, f"classical/{_tag(p)}"), cfg.mc_n)
            for p in cfg.classical_grid
        ],
    }


SUITES = ("duality", "positivity", "mellin", "cauchy", "ratio", "cf", "mellin_cf", "zero", "classical")


def run_suite(name: str = "all", config: SuiteConfig | None = None) -> CheckReport:
    """Run one family of checks (or ``'all'``) and collect a sorted report."""
    cfg = SuiteConfig() if config is None else config
    runners = _family_runners(cfg)
    if name == "all":
        names = list(SUITES)
    elif name in runners:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(('all',) + SUITES)}")
    t0 = time.perf_counter()
    cases: list[CheckCase] = []
    for fam in names:
        cases.extend(runners[fam]())
    warnings = []
    if not cases:
        warnings.append("empty grid: no cases were run")
        log.warning("suite %s ran no cases", name)
    cases.sort(key=lambda c: c.id)
    return CheckReport(name, tuple(cases), cfg.seed, time.perf_counter() - t0, tuple(warnings))
