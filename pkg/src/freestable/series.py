"""Direct series evaluators.

Four expansions are implemented:

* the large-x density series of a free stable law with alpha < 1 (valid on [x*, inf)),
* the small-x density series of the same law (valid on [0, x*]),
* the power series of the free characteristic function,
* the two classical stable density series (one convergent, one asymptotic,
  with the roles swapped between alpha < 1 and alpha > 1).

Coefficients are formed in log space with explicit signs; factors 1/Gamma(y)
that hit a pole of Gamma give exact zero terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from .errors import DomainError, PrecisionError
from .params import FreeStableParams, x_star
from .specfun import cos_pi, log_abs_rec_gamma, sin_pi

__all__ = [
    "SeriesEval",
    "MAX_TERMS",
    "free_density_power",
    "free_density_tail",
    "free_cf_series",
    "classical_density_series",
    "classical_density_array",
    "free_density_power_array",
    "free_density_tail_array",
    "tail_radius",
    "tail_series_complex",
]

MAX_TERMS = 20000
_CHUNK = 128
_EPS = np.finfo(float).eps
_LOG_HUGE = 700.0


@dataclass(frozen=True)
class SeriesEval:
    """Outcome of a series evaluation.

    ``trunc_estimate`` is an absolute bound on the dropped remainder (for
    asymptotic sums: the size of the first omitted term).  ``converged`` means
    ``trunc_estimate <= tol * |value|``, or the value is exactly determined.
    """

    value: float | complex
    terms_used: int
    trunc_estimate: float
    converged: bool


# ---------------------------------------------------------------------------
# coefficient tables


def _tail_coeffs(alpha: float, n: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """log|c_n|, sign(c_n) and log of a remainder envelope for
    c_n = (-1)^(n-1) Gamma(1 + alpha n) / (n! Gamma(2 + (alpha - 1) n)).
    """
    base = special.gammaln(1.0 + alpha * n) - special.gammaln(n + 1.0)
    lrg, srg = log_abs_rec_gamma(2.0 + (alpha - 1.0) * n)
    sign = np.where(n % 2 == 1, 1.0, -1.0) * srg
    # |1/Gamma(2 - m)| <= Gamma(m - 1)/pi for m > 1 (reflection formula), smooth across the poles
    m = (1.0 - alpha) * n
    with np.errstate(divide="ignore", invalid="ignore"):
        env = np.where(m >= 1.5, special.gammaln(np.maximum(m - 1.0, 0.5)) - math.log(math.pi), lrg)
    env = np.where(np.isfinite(env), env, lrg)
    return base + lrg, sign, base + env


def _power_coeffs(alpha: float, n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log|d_n| and sign for d_n = (-1)^(n-1) Gamma(1 + n/alpha) / (n! Gamma(2 + (1/alpha - 1) n))."""
    ia = 1.0 / alpha
    lg = special.gammaln(1.0 + n * ia) - special.gammaln(n + 1.0) - special.gammaln(2.0 + (ia - 1.0) * n)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    return lg, sign


# ---------------------------------------------------------------------------
# generic chunked summation of geometric-envelope series


def _sum_geometric(
    chunk_terms,
    q: np.ndarray,
    tol: float,
    max_terms: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sum series whose n-th term is bounded by an envelope ~ C n^(-3/2) q^n.

    ``chunk_terms(n, idx)`` returns ``(terms, envelope)`` arrays of shape
    ``(len(n), len(idx))`` for the still-active points ``idx``.
    Stops a point once three consecutive terms and the envelope remainder
    are below ``tol * |partial sum|``.  Partial sums are accumulated in
    extended precision.
    """
    m = q.size
    partial = np.zeros(m, dtype=np.longdouble)
    trunc = np.full(m, np.inf)
    used = np.zeros(m, dtype=np.int64)
    done = np.zeros(m, dtype=bool)
    small_run = np.zeros(m, dtype=np.int64)
    with np.errstate(divide="ignore"):
        tail_factor = np.where(q < 1.0, 1.0 / np.maximum(1.0 - q, 1e-300), np.inf)

    start = 1
    while start <= max_terms and not done.all():
        idx = np.flatnonzero(~done)
        stop = min(start + _CHUNK, max_terms + 1)
        n = np.arange(start, stop, dtype=float)
        k = n.size
        terms, env = chunk_terms(n, idx)  # (k, len(idx))
        s = partial[idx][None, :] + np.cumsum(terms.astype(np.longdouble), axis=0)
        sabs = np.abs(s).astype(float)
        small = np.abs(terms) <= tol * sabs
        # length of the run of small terms ending at each row
        j = np.arange(k)[:, None]
        last_big = np.maximum.accumulate(np.where(small, -1 - small_run[idx][None, :], j), axis=0)
        run = j - last_big
        factor = np.minimum(tail_factor[idx][None, :], 2.0 * n[:, None] + 3.0)
        e_next = np.vstack([env[1:], env[-1:] * np.minimum(q[idx], 1.0)[None, :]])
        rem = e_next * factor
        ok = (run >= 3) & (rem <= tol * sabs)
        hit = ok.any(axis=0)
        first = np.where(hit, np.argmax(ok, axis=0), k - 1)
        cols = np.arange(idx.size)
        partial[idx] = s[first, cols]
        used[idx] = n[first].astype(np.int64)
        trunc[idx] = rem[first, cols]
        small_run[idx] = run[-1]
        done[idx[hit]] = True
        start = stop
    values = partial.astype(float)
    converged = trunc <= tol * np.abs(values)
    return values, used, trunc, converged


def _as_array(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# free stable density, alpha < 1


def free_density_tail_array(p: FreeStableParams, x, tol: float = 1e-14, max_terms: int = MAX_TERMS):
    """Vectorized large-x series; returns ``(values, terms_used, trunc, converged)``.

    No domain check: callers guarantee alpha < 1 and x >= x*.
    """
    x = _as_array(x)
    a = p.alpha
    ar = p.alpha_rho
    m = x.size
    if ar == 0.0:
        z = np.zeros(m)
        return z, np.ones(m, dtype=np.int64), z.copy(), np.ones(m, dtype=bool)
    logx = np.log(x)
    xs = x_star(p)
    q = np.exp(a * (math.log(xs) - logx))

    def chunk(n, idx):
        lc, sg, lenv = _tail_coeffs(a, n)
        sn = sin_pi(n * ar)
        expo = -(a * n + 1.0)[:, None] * logx[idx][None, :]
        terms = (sg * sn)[:, None] * np.exp(lc[:, None] + expo) / math.pi
        env = np.exp(lenv[:, None] + expo) / math.pi
        return terms, env

    return _sum_geometric(chunk, q, tol, max_terms)


def free_density_power_array(p: FreeStableParams, x, tol: float = 1e-14, max_terms: int = MAX_TERMS):
    """Vectorized small-x series; returns ``(values, terms_used, trunc, converged)``.

    No domain check: callers guarantee alpha < 1 and 0 <= x <= x*.
    """
    x = _as_array(x)
    a, r = p.alpha, p.rho
    m = x.size
    if r == 0.0 or r == 1.0:
        z = np.zeros(m)
        return z, np.ones(m, dtype=np.int64), z.copy(), np.ones(m, dtype=bool)
    values = np.empty(m)
    used = np.ones(m, dtype=np.int64)
    trunc = np.zeros(m)
    conv = np.ones(m, dtype=bool)
    zero = x == 0.0
    # only the n = 1 term survives at the origin, and its coefficient is 1
    values[zero] = sin_pi(r) / math.pi
    nz = ~zero
    if nz.any():
        xv = x[nz]
        logx = np.log(xv)
        q = xv / x_star(p)

        def chunk(n, idx):
            lc, sg = _power_coeffs(a, n)
            sn = sin_pi(n * r)
            expo = (n - 1.0)[:, None] * logx[idx][None, :]
            env = np.exp(lc[:, None] + expo) / math.pi
            return (sg * sn)[:, None] * env, env

        v, u, t, c = _sum_geometric(chunk, q, tol, max_terms)
        values[nz], used[nz], trunc[nz], conv[nz] = v, u, t, c
    return values, used, trunc, conv


def _scalar(result) -> SeriesEval:
    v, u, t, c = result
    return SeriesEval(float(v[0]), int(u[0]), float(t[0]), bool(c[0]))


def free_density_tail(p: FreeStableParams, x: float, tol: float = 1e-14) -> SeriesEval:
    """Large-x density series, valid for x >= x* when alpha < 1."""
    if p.alpha > 1.0:
        raise DomainError("the large-x free density series needs alpha < 1")
    xs = x_star(p)
    if not x >= xs:
        raise DomainError(f"x={x!r} below x*={xs!r}")
    if p.positive and x == xs:
        # left support edge, where the series converges too slowly to be useful
        return SeriesEval(0.0, 0, 0.0, True)
    return _scalar(free_density_tail_array(p, x, tol))


def _levin_u(terms: np.ndarray) -> complex:
    """Levin u-transform of the partial sums of ``terms`` (all nonzero)."""
    k = terms.size - 1
    j = np.arange(k + 1, dtype=float)
    c = (-1.0) ** j * special.comb(k, j) * ((1.0 + j) / (1.0 + k)) ** (k - 1)
    w = terms * (1.0 + j)
    return complex(np.sum(c * np.cumsum(terms) / w) / np.sum(c / w))


def _power_accelerated(p: FreeStableParams, x: float) -> tuple[float, float]:
    # sin(n pi rho) = Im exp(i n pi rho): the complex series has a regular phase,
    # which the transform handles even on the circle of convergence
    n = np.arange(1.0, 41.0)
    lc, sg = _power_coeffs(p.alpha, n)
    t = sg * np.exp(1j * math.pi * p.rho * n + lc + (n - 1.0) * math.log(x)) / math.pi
    est = [_levin_u(t[:k]).imag for k in range(10, 41, 5)]
    diffs = [abs(b - a) for a, b in zip(est[:-1], est[1:])]
    i = int(np.argmin(diffs))
    return est[i + 1], 4.0 * diffs[i] + 128.0 * _EPS * abs(est[i + 1])


def free_density_power(p: FreeStableParams, x: float, tol: float = 1e-14) -> SeriesEval:
    """Small-x density series, valid for 0 <= x <= x* when alpha < 1.

    Near x* the direct sum converges slowly; there the result falls back to
    a Levin u-transform of the complexified series when its error estimate
    (the spread of successive transform orders) is smaller.
    """
    if p.alpha > 1.0:
        raise DomainError("the small-x free density series needs alpha < 1")
    xs = x_star(p)
    if not 0.0 <= x <= xs:
        raise DomainError(f"x={x!r} outside [0, x*={xs!r}]")
    direct = _scalar(free_density_power_array(p, x, tol))
    if direct.converged or x == 0.0 or p.rho in (0.0, 1.0):
        return direct
    value, err = _power_accelerated(p, x)
    if err < direct.trunc_estimate:
        return SeriesEval(value, 40, err, bool(err <= tol * abs(value)))
    return direct


def tail_radius(p: FreeStableParams) -> float:
    """Radius beyond which the large-x series converges, for either alpha regime.

    For alpha > 1 the dual's small-x series, pulled back through the duality
    map, has the same coefficients as the alpha < 1 large-x series; its radius
    is alpha (alpha - 1)^(1/alpha - 1).
    """
    a = p.alpha
    if a < 1.0:
        return x_star(p)
    return a * (a - 1.0) ** (1.0 / a - 1.0)


def tail_series_complex(p: FreeStableParams, x, tol: float = 1e-15) -> np.ndarray:
    """Large-x density series at complex points with |x| >= 2 * tail_radius(p).

    Principal branch of x^(-alpha n - 1).  Works for both alpha regimes.
    Truncation is fixed in advance from the geometric rate at |x|.
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    a = p.alpha
    ar = p.alpha_rho
    if ar == 0.0 or x.size == 0:
        return np.zeros(x.shape, dtype=complex)
    R = tail_radius(p)
    q = float(np.max((R / np.abs(x)) ** a))
    if not q < 1.0:
        raise DomainError("tail_series_complex needs |x| beyond the convergence radius")
    nterms = int(min(MAX_TERMS, math.ceil(math.log(tol * 1e-2) / math.log(q)) + 32))
    n = np.arange(1, nterms + 1, dtype=float)
    lc, sg, _ = _tail_coeffs(a, n)
    coef = sg * sin_pi(n * ar) * np.exp(lc) / math.pi
    logx = np.log(x)
    out = np.zeros(x.shape, dtype=complex)
    # sum in reverse order of magnitude; blocks keep the matrix small
    for lo in range(0, nterms, 256):
        nn = n[lo : lo + 256]
        out += (coef[lo : lo + 256, None] * np.exp(-(a * nn + 1.0)[:, None] * logx[None, :])).sum(axis=0)
    return out


# ---------------------------------------------------------------------------
# entire series with superexponentially decaying coefficients


def _truncate_entire(terms: np.ndarray, env: np.ndarray, tol: float, atol: float = 0.0):
    """First index k past the envelope peak where the remainder bound
    ``env[k+1] / (1 - env[k+1]/env[k])`` drops below
    ``max(tol * |sum(terms[:k+1])|, atol)``.

    Returns ``(k, remainder)`` or ``None``.
    """
    if len(env) < 3:
        return None
    peak = int(np.argmax(env))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = env[1:] / env[:-1]
    partial = np.cumsum(terms)
    for k in range(max(peak, 0), len(env) - 1):
        r = ratio[k]
        if not r <= 0.5:
            continue
        rem = env[k + 1] / (1.0 - r)
        if rem <= max(tol * abs(partial[k]), atol) or rem == 0.0:
            return k, float(rem)
    return None


def _cf_terms(p: FreeStableParams, z: float, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    a = p.alpha
    n = np.arange(nmax, dtype=float)
    logz = math.log(z)
    lrg, srg = log_abs_rec_gamma(2.0 + (a - 1.0) * n)
    common = a * n * logz - special.gammaln(n + 1.0)
    # |1/Gamma(2 - m)| <= Gamma(m - 1)/pi for m > 1; a smooth bound that also covers the poles
    m = (1.0 - a) * n
    lenv = np.where(m >= 1.5, special.gammaln(np.maximum(m - 1.0, 0.5)) - math.log(math.pi), lrg)
    ph = n * (a * (0.5 - p.rho))
    sign = np.where(n % 2 == 0, 1.0, -1.0) * srg
    terms = sign * np.exp(lrg + common) * (cos_pi(ph) + 1j * sin_pi(ph))
    return terms, np.exp(lenv + common)


def free_cf_series(p: FreeStableParams, z: float, tol: float = 1e-12, *, atol: float = 0.0) -> SeriesEval:
    """Power series of the free characteristic function at z >= 0.

    The series is entire in z**alpha, but for large z the terms grow far
    beyond the result before they decay.  If the rounding error implied by
    the largest term, ``eps * max|term|``, exceeds ``max(tol * |value|, atol)``
    a :class:`PrecisionError` is raised instead of returning a cancelled sum.
    """
    if z < 0:
        raise DomainError("free_cf_series takes z >= 0; use conjugation for z < 0")
    if z == 0.0:
        return SeriesEval(1.0 + 0.0j, 1, 0.0, True)
    nmax = 64
    while True:
        terms, env = _cf_terms(p, z, nmax)
        stop = _truncate_entire(terms, env, tol, atol)
        if stop is not None or nmax >= MAX_TERMS:
            break
        nmax = min(4 * nmax, MAX_TERMS)
    k, rem = stop if stop is not None else (len(terms) - 1, float(env[-1]))
    t = terms[: k + 1]
    value = complex(math.fsum(t.real), math.fsum(t.imag))
    max_term = float(np.abs(t).max())
    rounding = 4.0 * _EPS * max_term
    target = max(tol * abs(value), atol)
    if rounding > target:
        raise PrecisionError(
            f"characteristic-function series at z={z:g}: largest term {max_term:.3g} "
            f"vs result {abs(value):.3g} leaves no significant digits at tol={tol:g}"
        )
    err = rem + rounding
    return SeriesEval(value, k + 1, err, stop is not None and err <= target)


# ---------------------------------------------------------------------------
# classical stable densities


def _classical_log_terms(p: FreeStableParams, x: float, kind: str, nmax: int):
    """Signs (sin factors included) and sin-free log-envelopes of the classical
    series at x > 0, for n = 1..nmax."""
    a = p.alpha
    n = np.arange(1, nmax + 1, dtype=float)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    logx = math.log(x)
    if kind == "tail":
        lenv = special.gammaln(1.0 + a * n) - special.gammaln(n + 1.0) - (a * n + 1.0) * logx
        sn = sin_pi(n * p.alpha_rho)
    else:
        lenv = special.gammaln(1.0 + n / a) - special.gammaln(n + 1.0) + (n - 1.0) * logx
        sn = sin_pi(n * p.rho)
    return sign * sn, lenv - math.log(math.pi)


def classical_density_series(
    p: FreeStableParams,
    x: float,
    tol: float = 1e-14,
    mode: Literal["convergent", "asymptotic"] = "convergent",
) -> SeriesEval:
    """Classical strictly stable density on x > 0.

    For alpha < 1 the large-x series converges everywhere and the small-x one
    is asymptotic; for alpha > 1 the roles are reversed.  ``mode`` selects
    which of the two is summed.  Asymptotic sums stop just before the
    smallest envelope term (sin factors dropped, so identically-zero
    expansions still get a meaningful size) and always report
    ``converged=False``.
    """
    if not x > 0:
        raise DomainError("classical_density_series needs x > 0; reflect rho for the negative axis")
    if mode not in ("convergent", "asymptotic"):
        raise DomainError(f"unknown mode {mode!r}")
    small_x_convergent = p.alpha > 1.0
    if mode == "convergent":
        kind = "power" if small_x_convergent else "tail"
    else:
        kind = "tail" if small_x_convergent else "power"

    if mode == "asymptotic":
        nmax = 64
        while True:
            sg, lenv = _classical_log_terms(p, x, kind, nmax)
            k = int(np.argmin(lenv))
            if k < nmax - 1 or nmax >= MAX_TERMS:
                break
            nmax = min(4 * nmax, MAX_TERMS)
        # terms 1..k, stopping before the smallest one
        t = sg[:k] * np.exp(lenv[:k])
        return SeriesEval(math.fsum(t), max(k, 1), math.sqrt(2.0 * math.pi * (k + 1)) * math.exp(lenv[k]), False)

    nmax = 64
    while True:
        sg, lenv = _classical_log_terms(p, x, kind, nmax)
        if lenv.max() > _LOG_HUGE:
            return SeriesEval(math.nan, nmax, math.inf, False)
        env = np.exp(lenv)
        t = sg * env
        stop = _truncate_entire(t, env, tol)
        if stop is not None or nmax >= MAX_TERMS:
            break
        nmax = min(4 * nmax, MAX_TERMS)
    if stop is None:
        return SeriesEval(math.fsum(t), len(t), float(env[-1]), False)
    j, rem = stop
    value = math.fsum(t[: j + 1])
    err = rem + 4.0 * _EPS * float(env[: j + 1].max())
    return SeriesEval(value, j + 1, float(err), bool(err <= tol * abs(value) or err == 0.0))


def classical_density_array(p: FreeStableParams, x, tol: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classical density on x > 0 with an error estimate per point.

    Each point takes whichever of the two series has the smaller error: the
    convergent one (truncation plus rounding from its largest term) or the
    optimally truncated asymptotic one.
    """
    x = _as_array(x)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("classical_density_array needs finite x > 0")
    a = p.alpha
    logx = np.log(x)
    conv_kind, asym_kind = ("power", "tail") if a > 1.0 else ("tail", "power")

    def log_terms(kind, n, lx):
        if kind == "tail":
            lenv = special.gammaln(1.0 + a * n) - special.gammaln(n + 1.0)
            expo = -(a * n + 1.0)[:, None] * lx[None, :]
            sn = sin_pi(n * p.alpha_rho)
        else:
            lenv = special.gammaln(1.0 + n / a) - special.gammaln(n + 1.0)
            expo = (n - 1.0)[:, None] * lx[None, :]
            sn = sin_pi(n * p.rho)
        sign = np.where(n % 2 == 1, 1.0, -1.0) * sn
        # exp() of a sum of large logs is accurate only to eps times their size
        cond = 1.0 + np.abs(lenv)[:, None] + np.abs(expo)
        return sign, lenv[:, None] + expo - math.log(math.pi), cond

    # optimally truncated asymptotic sum: stop before the smallest envelope term
    n = np.arange(1, 257, dtype=float)
    sg, le, _ = log_terms(asym_kind, n, logx)
    k = np.argmin(le, axis=0)
    cols = np.arange(x.size)
    keep = np.arange(n.size)[:, None] < k[None, :]
    t = sg[:, None] * np.exp(np.where(keep, le, -np.inf))
    values = t.sum(axis=0)
    err = np.sqrt(2.0 * np.pi * (k + 1.0)) * np.exp(le[k, cols])

    # the convergent sum loses about eps * (largest term); skip it where that is worse
    ngrid = np.unique(np.geomspace(1, MAX_TERMS, 96).round())
    _, lg, _ = log_terms(conv_kind, ngrid, logx)
    peak = lg.max(axis=0)
    try_conv = _EPS * np.exp(np.minimum(peak, _LOG_HUGE)) < err
    if try_conv.any():
        lxc = logx[try_conv]
        rounding = np.zeros(lxc.size)

        def chunk(nn, idx):
            sgc, lc, cond = log_terms(conv_kind, nn, lxc[idx])
            env = np.exp(lc)
            rounding[idx] += (env * cond).sum(axis=0)
            return sgc[:, None] * env, env

        v, _, tr, _ = _sum_geometric(chunk, np.zeros(lxc.size), tol, MAX_TERMS)
        e = tr + 2.0 * _EPS * rounding
        better = e < err[try_conv]
        idx = np.flatnonzero(try_conv)[better]
        values[idx] = v[better]
        err[idx] = e[better]
    return values, err
