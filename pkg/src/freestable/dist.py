"""Distribution-level API for free stable laws and their classical counterparts.

Density evaluation for alpha < 1 uses the two convergent series away from
x*; within 5% of x* (where both series converge only like n^(-3/2)) it uses
the Cauchy-transform oracle.  For alpha > 1 the density is pulled back from
the dual law with exponent 1/alpha.  Negative arguments use the reflected law.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import special

from .errors import BudgetError, ConvergenceError, DomainError, PrecisionError
from .inversion import density_oracle_array, support
from .params import FreeStableParams, dual, reflected, x_star
from .quad import DEFAULT_BUDGET, IntegralResult, fourier_integral, integrate_adaptive, integrate_tail_powerlaw
from .series import (
    classical_density_array,
    free_cf_series,
    free_density_power_array,
    free_density_tail_array,
    tail_radius,
    tail_series_complex,
)
from .specfun import sin_pi

__all__ = [
    "BAND",
    "pdf",
    "pdf_array",
    "cdf",
    "cdf_array",
    "quantile",
    "QuantileTable",
    "quantile_table",
    "cf",
    "cf_fourier",
    "mellin_free",
    "mellin_classical",
    "mellin_cf",
    "abs_moment",
    "positive_mass",
    "positive_moment",
    "RngState",
    "sample_free",
    "sample_classical",
    "sample_cauchy_k",
    "classical_pdf",
    "classical_cdf",
]

Method = Literal["auto", "series", "inversion"]

BAND = 0.05
_EPS = float(np.finfo(float).eps)
_QTOL = 1e-14


# ---------------------------------------------------------------------------
# density


def _oracle_many(p: FreeStableParams, x: np.ndarray) -> np.ndarray:
    return density_oracle_array(p, x)[0]


def _pdf_small_alpha(p: FreeStableParams, x: np.ndarray, method: Method) -> np.ndarray:
    """alpha < 1 and x >= 0."""
    xs = x_star(p)
    out = np.zeros(x.size)
    band = np.abs(x / xs - 1.0) < (0.0 if method == "series" else BAND)
    if p.positive:
        # no mass on [0, x*]; the edge value is exactly 0
        band &= x > xs
        x = np.where(x > xs, x, np.inf)
    finite = np.isfinite(x)
    for mask, fn in ((~band & finite & (x > xs), free_density_tail_array), (~band & (x <= xs), free_density_power_array)):
        if not mask.any():
            continue
        v, _, _, conv = fn(p, x[mask])
        if not conv.all():
            if method == "series":
                bad = x[mask][~conv][0]
                raise ConvergenceError(f"density series did not converge at x={bad!r} for {p}")
            idx = np.flatnonzero(mask)[~conv]
            v[~conv] = _oracle_many(p, x[idx])
        out[mask] = v
    if band.any():
        out[band] = _oracle_many(p, x[band])
    return out


def _pdf_nonneg(p: FreeStableParams, x: np.ndarray, method: Method) -> np.ndarray:
    if p.alpha < 1.0:
        return _pdf_small_alpha(p, x, method)
    at0 = sin_pi(p.rho) / math.pi
    out = np.full(x.size, at0)
    with np.errstate(over="ignore", divide="ignore"):
        y = x ** (-p.alpha)
        scale = x ** (-p.alpha - 1.0)
    ok = (x > 0) & np.isfinite(y) & np.isfinite(scale)
    if ok.any():
        out[ok] = scale[ok] * _pdf_small_alpha(dual(p), y[ok], method)
    return out


def pdf_array(p: FreeStableParams, x, method: Method = "auto") -> np.ndarray:
    """Vectorized density.

    ``method='auto'`` uses the series and falls back to the oracle where a
    series fails to converge; ``'series'`` raises instead; ``'inversion'``
    evaluates the Cauchy-transform oracle on ``p`` directly, without duality.
    """
    if method not in ("auto", "series", "inversion"):
        raise DomainError(f"unknown method {method!r}")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if np.isnan(x).any():
        raise DomainError("pdf received NaN")
    if method == "inversion":
        return _oracle_many(p, x).reshape(shape)
    out = np.zeros(x.size)
    neg = x < 0
    if neg.any():
        out[neg] = _pdf_nonneg(reflected(p), -x[neg], method)
    if (~neg).any():
        out[~neg] = _pdf_nonneg(p, x[~neg], method)
    return out.reshape(shape)


def pdf(p: FreeStableParams, x: float, method: Method = "auto") -> float:
    """Density of the free stable law at ``x``."""
    return float(pdf_array(p, np.array([x], dtype=float), method)[0])


# ---------------------------------------------------------------------------
# cumulative distribution


def _layout(p: FreeStableParams) -> tuple[list[float], float | None, float | None]:
    """Breakpoints on (0, inf) for the positive-axis density, plus the lower and
    upper support edges there when they are square-root edges (else None)."""
    R = tail_radius(p)
    pts = [R]
    lo_edge = hi_edge = None
    if p.alpha < 1.0:
        pts += [R * (1 - BAND), R * (1 + BAND)]
        if p.rho == 1.0:
            lo_edge = R
    else:
        # images of the dual's band under the duality map
        pts += [R * (1 + BAND) ** (-1.0 / p.alpha), R * (1 - BAND) ** (-1.0 / p.alpha)]
        if p.alpha_rho == 1.0:
            hi_edge = R
    return sorted(pts), lo_edge, hi_edge


def _edge_piece(f, a: float, b: float, edge: str, tol: float) -> IntegralResult:
    """Integral over [a, b] with x = a + (b-a) s^2 (edge='lo') or x = b - (b-a) s^2
    (edge='hi'), which removes a square-root singularity at that end."""
    w = b - a

    def g(s):
        s = np.asarray(s, dtype=float)
        x = a + w * s * s if edge == "lo" else b - w * s * s
        return f(x) * (2.0 * w * s)

    return integrate_adaptive(g, 0.0, 1.0, tol, vectorized=True)


def _mass_between(
    p: FreeStableParams, a: float, b: float, tol: float = _QTOL, power: float = 0.0
) -> IntegralResult:
    """Integral of ``x**power`` times the density over [a, b], 0 <= a <= b <= inf."""
    pts, lo_edge, hi_edge = _layout(p)
    if lo_edge is not None:
        a = max(a, lo_edge)
    if hi_edge is not None:
        b = min(b, hi_edge)
    if b <= a:
        return IntegralResult(0.0, 0.0, 0)
    c = 2.0 * tail_radius(p)
    if power == 0.0:
        f = functools.partial(pdf_array, p)
    else:

        def f(x):
            x = np.asarray(x, dtype=float)
            return x**power * pdf_array(p, x)

    value, err, evals = 0.0, 0.0, 0
    top = min(b, c)
    if a < top:
        knots = [a, *[t for t in pts if a < t < top], top]
        for u, v in zip(knots[:-1], knots[1:]):
            if u == lo_edge:
                r = _edge_piece(f, u, v, "lo", tol)
            elif v == hi_edge:
                r = _edge_piece(f, u, v, "hi", tol)
            elif u == 0.0 and power != 0.0:
                # x = w^(1/(1+power)) absorbs the x^power factor at the origin
                e = 1.0 / (1.0 + power)

                def g(w, e=e):
                    w = np.asarray(w, dtype=float)
                    return pdf_array(p, w**e) * e

                r = integrate_adaptive(g, 0.0, v ** (1.0 + power), tol, vectorized=True)
            else:
                r = integrate_adaptive(f, u, v, tol, vectorized=True)
            value += r.value
            err += r.err_estimate
            evals += r.evaluations
    if b > c and p.alpha_rho != 0.0:
        lo = max(a, c)
        lead = sin_pi(p.alpha_rho) / math.pi
        idx = p.alpha - power
        r = integrate_tail_powerlaw(f, lo, idx, tol, vectorized=True, lead=lead)
        if not math.isinf(b):
            rest = integrate_tail_powerlaw(f, b, idx, tol, vectorized=True, lead=lead)
            r = IntegralResult(r.value - rest.value, r.err_estimate + rest.err_estimate, r.evaluations + rest.evaluations)
        value += r.value
        err += r.err_estimate
        evals += r.evaluations
    return IntegralResult(value, err, evals)


def positive_mass(p: FreeStableParams, tol: float = _QTOL) -> IntegralResult:
    """Quadrature of the density over (0, inf)."""
    return _mass_between(p, 0.0, math.inf, tol)


def positive_moment(p: FreeStableParams, s: float, tol: float = 1e-13) -> IntegralResult:
    """Quadrature of ``x**s`` times the density over (0, inf), for -1 < s < alpha."""
    if not -1.0 < s < p.alpha:
        raise DomainError(f"s={s!r} outside (-1, alpha={p.alpha!r})")
    return _mass_between(p, 0.0, math.inf, tol, power=s)


def cdf(p: FreeStableParams, x: float) -> float:
    """P(X <= x), anchored at F(0) = 1 - rho and integrated outwards."""
    if math.isnan(x):
        raise DomainError("cdf received NaN")
    if x < 0:
        return 1.0 - cdf(reflected(p), -x)
    if x == math.inf:
        return 1.0
    val = (1.0 - p.rho) + _mass_between(p, 0.0, x).value
    return min(max(val, 0.0), 1.0)


def _cdf_right(p: FreeStableParams, x: np.ndarray, tol: float) -> np.ndarray:
    # x >= 0; masses between sorted neighbours, accumulated from the origin
    xs, inv = np.unique(x, return_inverse=True)
    steps = np.empty(xs.size)
    prev = 0.0
    for i, b in enumerate(xs):
        steps[i] = _mass_between(p, prev, float(b), tol).value
        prev = float(b)
    F = (1.0 - p.rho) + np.cumsum(steps)
    F[xs == math.inf] = 1.0
    return np.clip(F, 0.0, 1.0)[inv]


def cdf_array(p: FreeStableParams, x, tol: float = _QTOL) -> np.ndarray:
    """Vectorized :func:`cdf`; one quadrature per gap between sorted points."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if np.isnan(x).any():
        raise DomainError("cdf received NaN")
    out = np.empty(x.size)
    neg = x < 0
    if neg.any():
        out[neg] = 1.0 - _cdf_right(reflected(p), -x[neg], tol)
    if (~neg).any():
        out[~neg] = _cdf_right(p, x[~neg], tol)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# quantiles via a monotone cubic Hermite table


def _gk15_pieces(f, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    from .quad import _gk15

    return _gk15(f, lo, hi, True)


def _interval_masses(f, x: np.ndarray, tol: float, strict: bool = True) -> np.ndarray:
    """Integral of ``f`` over each [x_k, x_{k+1}]; adaptive where one panel is not enough.

    With ``strict=False`` a noisy integrand that exhausts the quadrature budget
    keeps its best estimate instead of raising.
    """
    lo, hi = x[:-1], x[1:]
    val, err, _ = _gk15_pieces(f, lo, hi)
    for k in np.flatnonzero(err > tol):
        try:
            val[k] = integrate_adaptive(
                f, lo[k], hi[k], tol, vectorized=True, budget=DEFAULT_BUDGET if strict else 3000
            ).value
        except BudgetError:
            if strict:
                raise
    return val


def _limit_slopes(x: np.ndarray, F: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Fritsch-Carlson limiting so the Hermite interpolant is monotone."""
    d = d.copy()
    h = np.diff(x)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        delta = np.diff(F) / h
        flat = ~(delta > 0)
        d[:-1][flat] = 0.0
        d[1:][flat] = 0.0
        a = d[:-1] / delta
        b = d[1:] / delta
        s = a * a + b * b
    over = (~flat) & (s > 9.0)
    tau = np.where(over, 3.0 / np.sqrt(np.where(over, s, 1.0)), 1.0)
    d[:-1] = np.where(over, tau * delta * a, d[:-1])
    d[1:] = np.where(over, tau * delta * b, d[1:])
    return d


def _side_nodes(scale: float, lo: float, top: float, finite_top: bool, edge_lo: bool, n: int) -> np.ndarray:
    """Nodes on [lo, top]: asinh-uniform (linear near lo, logarithmic far out),
    clustered geometrically at edges where the density has a root singularity."""
    tmax = math.asinh((top - lo) / scale)
    x = lo + scale * np.sinh(np.linspace(0.0, tmax, n))
    extra = []
    cl = scale * np.geomspace(1e-10, 1e-2, 40)
    if edge_lo:
        extra.append(lo + cl)
    if finite_top:
        extra.append(top - cl)
    x = np.unique(np.concatenate([x, *extra, [lo, top]]))
    return x[(x >= lo) & (x <= top)]


@dataclass(frozen=True)
class QuantileTable:
    """Monotone cubic Hermite interpolant of the CDF.

    ``x``/``F``/``slope`` are the nodes, CDF values and densities there.
    Interpolation runs in the coordinate ``s = asinh(x/scale)`` on
    ``logit(F)``, which is close to linear in both power-law tails; intervals
    touching an exact 0 or 1 (a support edge) interpolate ``F`` itself.
    Beyond the outermost nodes on an unbounded side the tail is extrapolated
    with the leading power law ``C |x|^(-alpha)`` matched to the last node.
    ``tail_constants`` are the leading right and left tail constants
    sin(pi alpha rho)/(pi alpha) and sin(pi alpha (1 - rho))/(pi alpha).
    """

    params: FreeStableParams | None
    x: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    slope: np.ndarray = field(repr=False)
    tail_index: float
    tail_constants: tuple[float, float]
    bounded_left: bool
    bounded_right: bool
    scale: float = 1.0
    _s: np.ndarray = field(init=False, repr=False, compare=False)
    _logit: np.ndarray = field(init=False, repr=False, compare=False)
    _y: np.ndarray = field(init=False, repr=False, compare=False)
    _m: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x, F = self.x, self.F
        s = np.arcsinh(x / self.scale)
        dxds = np.hypot(self.scale, x)
        use_logit = (F[:-1] > 0.0) & (F[1:] < 1.0)
        Fc = np.clip(F, np.finfo(float).tiny, 1.0 - _EPS / 2)
        yl = special.logit(Fc)
        ml = _limit_slopes(s, yl, self.slope * dxds / (Fc * (1.0 - Fc)))
        mf = _limit_slopes(s, F, self.slope * dxds)
        # per interval: (value, slope) at the left and right node in the chosen representation
        y = np.where(use_logit[:, None], np.stack([yl[:-1], yl[1:]], 1), np.stack([F[:-1], F[1:]], 1))
        m = np.where(use_logit[:, None], np.stack([ml[:-1], ml[1:]], 1), np.stack([mf[:-1], mf[1:]], 1))
        object.__setattr__(self, "_s", s)
        object.__setattr__(self, "_logit", use_logit)
        object.__setattr__(self, "_y", y)
        object.__setattr__(self, "_m", m * np.diff(s)[:, None])

    @property
    def grid(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.F.tolist()))

    def _interp(self, k, t):
        v = _hermite(self._y[k, 0], self._y[k, 1], self._m[k, 0], self._m[k, 1], t)
        return np.where(self._logit[k], special.expit(v), v)

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        xn, F, sn = self.x, self.F, self._s
        a = self.tail_index
        inside = (x >= xn[0]) & (x <= xn[-1])
        k = np.clip(np.searchsorted(xn, x[inside], side="right") - 1, 0, xn.size - 2)
        t = (np.arcsinh(x[inside] / self.scale) - sn[k]) / (sn[k + 1] - sn[k])
        out[inside] = np.clip(self._interp(k, np.clip(t, 0.0, 1.0)), F[k], F[k + 1])
        left = x < xn[0]
        right = x > xn[-1]
        if self.bounded_left:
            out[left] = 0.0
        else:
            out[left] = F[0] * (x[left] / xn[0]) ** (-a)
        if self.bounded_right:
            out[right] = 1.0
        else:
            out[right] = 1.0 - (1.0 - F[-1]) * (x[right] / xn[-1]) ** (-a)
        return out

    def inverse(self, u) -> np.ndarray:
        """Table quantile: solves the Hermite cubic on the bracketing interval."""
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape)
        xn, F, sn = self.x, self.F, self._s
        a = self.tail_index
        inside = (u >= F[0]) & (u <= F[-1])
        uu = u[inside]
        k = np.clip(np.searchsorted(F, uu, side="right") - 1, 0, xn.size - 2)
        lg = self._logit[k]
        y0, y1 = self._y[k, 0], self._y[k, 1]
        m0, m1 = self._m[k, 0], self._m[k, 1]
        with np.errstate(divide="ignore"):
            target = np.where(lg, special.logit(np.clip(uu, F[k], F[k + 1])), uu)
        target = np.clip(target, y0, y1)
        dy = y1 - y0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(dy > 0, (target - y0) / dy, 0.0)
        tl = np.zeros_like(t)
        th = np.ones_like(t)
        for _ in range(60):
            val = _hermite(y0, y1, m0, m1, t) - target
            tl = np.where(val < 0, t, tl)
            th = np.where(val >= 0, t, th)
            der = _hermite_dt(y0, y1, m0, m1, t)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = t - val / der
            bad = ~np.isfinite(tn) | (tn <= tl) | (tn >= th)
            tn = np.where(bad, 0.5 * (tl + th), tn)
            if np.all(np.abs(tn - t) <= 1e-15):
                t = tn
                break
            t = tn
        sv = sn[k] + t * (sn[k + 1] - sn[k])
        out[inside] = np.clip(self.scale * np.sinh(sv), xn[k], xn[k + 1])
        lo = u < F[0]
        hi = u > F[-1]
        if self.bounded_left:
            out[lo] = xn[0]
        else:
            out[lo] = xn[0] * (u[lo] / F[0]) ** (-1.0 / a)
        if self.bounded_right:
            out[hi] = xn[-1]
        else:
            out[hi] = xn[-1] * ((1.0 - u[hi]) / (1.0 - F[-1])) ** (-1.0 / a)
        return out

    def node_interval(self, x: float) -> int:
        return int(np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, self.x.size - 2))


def _hermite(F0, F1, m0, m1, t):
    t2 = t * t
    t3 = t2 * t
    return (2 * t3 - 3 * t2 + 1) * F0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * F1 + (t3 - t2) * m1


def _hermite_dt(F0, F1, m0, m1, t):
    t2 = t * t
    return (6 * t2 - 6 * t) * (F0 - F1) + (3 * t2 - 4 * t + 1) * m0 + (3 * t2 - 2 * t) * m1


def _build_table(
    density: Callable[[np.ndarray], np.ndarray],
    *,
    rho: float,
    tail_index: float,
    tail_constants: tuple[float, float],
    scale: float,
    right: tuple[float, float, bool, bool] | None,
    left: tuple[float, float, bool, bool] | None,
    n: int,
    params: FreeStableParams | None,
    refine_rounds: int = 6,
    mass_tol: float = 1e-15,
) -> QuantileTable:
    """Assemble a table from one or two half-line pieces.

    ``right``/``left`` are ``(lo, top, finite_top, root_edge_at_lo)`` on the
    positive half-line of the law and of its mirror image respectively; the
    CDF at x = 0 (or at the left edge of a positive law) is ``1 - rho``.
    """
    pieces_x = []
    if left is not None:
        lo, top, fin, edge = left
        y = _side_nodes(scale, lo, top, fin, edge, n)
        pieces_x.append(-y[::-1])
    if right is not None:
        lo, top, fin, edge = right
        pieces_x.append(_side_nodes(scale, lo, top, fin, edge, n))
    x = np.unique(np.concatenate(pieces_x))

    strict = mass_tol <= 1e-15
    masses = _interval_masses(density, x, mass_tol, strict)
    # the node where 1 - rho of the mass lies to the left
    if right is None:
        anchor = x.size - 1
    elif left is None:
        anchor = 0
    else:
        anchor = int(np.argmin(np.abs(x)))
    F = np.empty(x.size)
    F[anchor] = 1.0 - rho
    F[anchor + 1 :] = F[anchor] + np.cumsum(masses[anchor:])
    F[:anchor] = F[anchor] - np.cumsum(masses[:anchor][::-1])[::-1]
    F = np.maximum.accumulate(np.clip(F, 0.0, 1.0))
    dens = np.asarray(density(x), dtype=float)
    bounded = dict(bounded_left=left is None or left[2], bounded_right=right is None or right[2])

    # intervals still to be checked, identified by their left endpoint
    todo = x[:-1]
    table = None
    for _ in range(refine_rounds + 1):
        table = QuantileTable(params, x, F, dens, tail_index, tail_constants, **bounded, scale=scale)
        if todo.size == 0:
            break
        k = np.searchsorted(x, todo)
        mid = 0.5 * (x[k] + x[k + 1])
        loc = _interval_masses(density, np.stack([x[k], mid], axis=1).ravel(), mass_tol, strict)[::2]
        Fm = np.minimum(F[k] + loc, F[k + 1])
        live = (Fm > F[k]) & (Fm < F[k + 1])
        xh = table.inverse(Fm[live])
        dm = np.asarray(density(mid[live]), dtype=float)
        # F is only known to a few ulps, which bounds how well x can be pinned down
        cond = 8.0 * _EPS / np.maximum(dm, 1e-300)
        bad = np.abs(xh - mid[live]) > 1e-7 * np.abs(mid[live]) + 1e-12 * scale + cond
        if not bad.any():
            break
        nx, nF, nd = mid[live][bad], Fm[live][bad], dm[bad]
        fresh = ~np.isin(nx, x)
        nx, nF, nd = nx[fresh], nF[fresh], nd[fresh]
        if nx.size == 0:
            break
        order = np.argsort(np.concatenate([x, nx]), kind="stable")
        x = np.concatenate([x, nx])[order]
        F = np.maximum.accumulate(np.concatenate([F, nF])[order])
        dens = np.concatenate([dens, nd])[order]
        todo = np.unique(np.concatenate([x[np.searchsorted(x, nx) - 1], nx]))
    return table


@functools.lru_cache(maxsize=64)
def quantile_table(p: FreeStableParams, n: int = 512) -> QuantileTable:
    """Lazily built, cached CDF table for ``p``."""
    a = p.alpha
    lo_s, hi_s = support(p)
    cr = sin_pi(p.alpha_rho) / (math.pi * a)
    cl = sin_pi(p.alpha_rho_reflected) / (math.pi * a)
    scale = tail_radius(p)

    def top(c: float, hi: float) -> tuple[float, bool]:
        if math.isfinite(hi):
            return hi, True
        if c <= 1e-300:
            return 10.0 * scale, True
        return max(10.0 * scale, min((c / 1e-12) ** (1.0 / a), 1e250)), False

    def side(q: FreeStableParams, hi: float, c: float):
        if q.rho == 0.0:
            return None
        lo = x_star(q) if (q.alpha < 1.0 and q.rho == 1.0) else 0.0
        t, fin = top(c, hi)
        return (lo, t, fin, lo > 0.0)

    right = side(p, hi_s, cr)
    left = side(reflected(p), -lo_s, cl)
    return _build_table(
        functools.partial(pdf_array, p),
        rho=p.rho,
        tail_index=a,
        tail_constants=(cr, cl),
        scale=scale,
        right=right,
        left=left,
        n=n,
        params=p,
    )


def quantile(p: FreeStableParams, q: float, tol: float = 1e-10) -> float:
    """Inverse CDF: table guess, then safeguarded Newton on exact local integrals."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile needs q in (0, 1), got {q!r}")
    t = quantile_table(p)
    x = float(t.inverse(q))
    xn = t.x
    if not (xn[0] <= x <= xn[-1]):
        # far tail: polish against the anchored CDF
        for _ in range(20):
            g = cdf(p, x) - q
            if abs(g) <= tol:
                break
            f = pdf(p, x)
            if f <= 0:
                break
            x -= g / f
        return x
    k = t.node_interval(x)
    lo, hi = xn[k], xn[k + 1]
    base_x, base_F = xn[k], t.F[k]
    f = functools.partial(pdf_array, p)

    def F(x):
        return base_F + integrate_adaptive(f, base_x, x, 1e-15, vectorized=True).value

    for _ in range(60):
        g = F(x) - q
        if abs(g) <= tol:
            return x
        if g > 0:
            hi = x
        else:
            lo = x
        d = pdf(p, x)
        xn_ = x - g / d if d > 0 else math.nan
        if not lo < xn_ < hi:
            xn_ = 0.5 * (lo + hi)
        if xn_ == x or hi - lo <= 4e-16 * max(abs(lo), abs(hi)):
            return xn_
        x = xn_
    raise ConvergenceError(f"quantile({q!r}) for {p} did not converge")


# ---------------------------------------------------------------------------
# characteristic function


def cf_fourier(p: FreeStableParams, z: float, tol: float = 1e-10) -> IntegralResult:
    """Characteristic function by direct Fourier quadrature of the density."""
    R = tail_radius(p)
    cut = 2.0 * R
    pts = sorted({s * b for b in _layout(p)[0] + _layout(reflected(p))[0] for s in (1, -1)} | {0.0})
    refl = reflected(p)
    return fourier_integral(
        functools.partial(pdf_array, p),
        z,
        tol,
        cut=cut,
        right_tail=None if p.alpha_rho == 0.0 else functools.partial(tail_series_complex, p),
        left_tail=None if refl.alpha_rho == 0.0 else functools.partial(tail_series_complex, refl),
        tail_alpha=p.alpha,
        points=pts,
    )


def cf(p: FreeStableParams, z: float, tol: float = 1e-12) -> complex:
    """Free characteristic function E[exp(i z X)].

    Power series first; if it loses all significant digits to cancellation
    the Fourier quadrature is used instead.  Negative z by conjugation.
    """
    if z == 0:
        return 1.0 + 0.0j
    if z < 0:
        return cf(p, -z, tol).conjugate()
    try:
        return complex(free_cf_series(p, z, tol).value)
    except PrecisionError:
        return complex(cf_fourier(p, z, max(tol, 1e-10)).value)


# ---------------------------------------------------------------------------
# Mellin transforms


def _as_complex(s) -> tuple[complex, bool]:
    real = not isinstance(s, complex) and not np.iscomplexobj(s)
    return complex(s), real


def _check_strip(p: FreeStableParams, s: complex) -> None:
    if not -1.0 < s.real < p.alpha:
        raise DomainError(f"Re(s)={s.real!r} outside the strip (-1, {p.alpha!r})")


def _sin_over_pi_times_gamma(rho: float, s: complex) -> complex:
    # sin(pi rho s) Gamma(s) / pi = rho * sinc(rho s) * Gamma(1 + s); regular at s = 0
    y = rho * s
    sinc = 1.0 if abs(y) < 1e-8 else np.sinc(y)
    return rho * sinc * special.gamma(1.0 + s)


def mellin_free(p: FreeStableParams, s):
    """E[X^s 1{X>0}] for -1 < Re s < alpha."""
    sc, real = _as_complex(s)
    _check_strip(p, sc)
    a = p.alpha
    v = _sin_over_pi_times_gamma(p.rho, sc) * special.gamma(1.0 - sc / a) * special.rgamma(2.0 + sc - sc / a)
    return float(v.real) if real else complex(v)


def mellin_classical(p: FreeStableParams, s):
    """Positive-part Mellin transform of the classical strictly stable law."""
    sc, real = _as_complex(s)
    _check_strip(p, sc)
    v = _sin_over_pi_times_gamma(p.rho, sc) * special.gamma(1.0 - sc / p.alpha)
    return float(v.real) if real else complex(v)


def mellin_cf(p: FreeStableParams, s) -> complex:
    """Integral of the characteristic function against z^(s-1) over z > 0."""
    sc, _ = _as_complex(s)
    if not sc.real > 0:
        raise DomainError("mellin_cf needs Re(s) > 0")
    a = p.alpha
    phase = np.exp(1j * math.pi * sc * (p.rho - 0.5))
    return complex(phase * special.gamma(sc / a) * special.rgamma(2.0 - sc + sc / a) / a)


def abs_moment(p: FreeStableParams, s: float) -> float:
    """E|X|^s for -1 < s < alpha."""
    return float(mellin_free(p, s) + mellin_free(reflected(p), s))


# ---------------------------------------------------------------------------
# random variates


class RngState:
    """Seeded PCG64 stream with a draw counter.

    ``split(k)`` derives an independent child stream from the same seed via
    NumPy's SeedSequence spawn keys, for per-thread or per-case use.
    """

    def __init__(self, seed: int, _key: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._key = tuple(_key)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self._key)))
        self.position = 0

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, key={self._key}, position={self.position})"

    def split(self, k: int) -> "RngState":
        return RngState(self.seed, self._key + (int(k),))

    def uniform(self, n: int) -> np.ndarray:
        u = self._gen.random(n)
        self.position += n
        # (0, 1): the lower end 0.0 is possible from random()
        return np.where(u == 0.0, 2.0 ** -54, u)

    def exponential(self, n: int) -> np.ndarray:
        e = self._gen.standard_exponential(n)
        self.position += n
        return e


def _count(n) -> int:
    n_int = int(n)
    if n_int != n or n_int < 1:
        raise DomainError(f"sample count must be a positive integer, got {n!r}")
    return n_int


def sample_free(p: FreeStableParams, rng: RngState, n: int) -> np.ndarray:
    """Inverse-CDF samples through the cached quantile table."""
    n = _count(n)
    return quantile_table(p).inverse(rng.uniform(n))


def sample_classical(p: FreeStableParams, rng: RngState, n: int) -> np.ndarray:
    """Classical strictly stable samples as (free sample) * Z^(1 - 1/alpha), Z ~ Gamma(2)."""
    n = _count(n)
    x = sample_free(p, rng, n)
    z = rng.exponential(n) + rng.exponential(n)
    return x * z ** (1.0 - 1.0 / p.alpha)


def sample_cauchy_k(rho: float, rng: RngState, n: int) -> np.ndarray:
    """Shifted Cauchy factor -cos(pi rho) + sin(pi rho) tan(pi (u - 1/2))."""
    if not 0.0 < rho < 1.0:
        raise DomainError("sample_cauchy_k needs rho in (0, 1)")
    n = _count(n)
    u = rng.uniform(n)
    return -math.cos(math.pi * rho) + math.sin(math.pi * rho) * np.tan(math.pi * (u - 0.5))


# ---------------------------------------------------------------------------
# classical stable densities


def classical_pdf(p: FreeStableParams, x: float, with_error: bool = False):
    """Classical strictly stable density.

    The convergent series is used where it is numerically sound; otherwise the
    optimally truncated asymptotic series, whose remainder estimate is returned
    as the uncertainty when ``with_error`` is set.
    """
    v, e = _classical_pdf_array(p, np.array([x], dtype=float), with_error=True)
    return (float(v[0]), float(e[0])) if with_error else float(v[0])


def _classical_pdf_array(p: FreeStableParams, x, with_error: bool = False):
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if np.isnan(x).any():
        raise DomainError("classical_pdf received NaN")
    if p.alpha == 2.0:
        # Gaussian with variance 2, where the series would cancel in the tails
        val = np.exp(-0.25 * x * x) / (2.0 * math.sqrt(math.pi))
        err = 4.0 * _EPS * (1.0 + 0.25 * x * x) * val
        val, err = val.reshape(shape), err.reshape(shape)
        return (val, err) if with_error else val
    val = np.zeros(x.size)
    err = np.zeros(x.size)
    zero = x == 0.0
    if zero.any():
        val[zero] = special.gamma(1.0 + 1.0 / p.alpha) * sin_pi(p.rho) / math.pi
    for q, sel, y in ((p, x > 0, x), (reflected(p), x < 0, -x)):
        sel = sel & np.isfinite(x)
        if sel.any():
            v, e = classical_density_array(q, y[sel])
            val[sel] = np.maximum(v, 0.0)
            err[sel] = e
    val, err = val.reshape(shape), err.reshape(shape)
    return (val, err) if with_error else val


@functools.lru_cache(maxsize=16)
def _classical_table(p: FreeStableParams, n: int = 600) -> QuantileTable:
    a = p.alpha
    cr = special.gamma(a) * sin_pi(p.alpha_rho) / math.pi
    cl = special.gamma(a) * sin_pi(p.alpha_rho_reflected) / math.pi
    # unit scale suits the normalization used here (variance 2 at alpha = 2)
    scale = 1.0

    def side(rho_side: float, c: float):
        if rho_side == 0.0:
            return None
        if c <= 1e-300:
            # light (Gaussian) tail: the density is below 1e-30 beyond 12
            return (0.0, 12.0 * scale, True, False)
        return (0.0, max(10.0, min((c / 1e-12) ** (1.0 / a), 1e250)), False, False)

    return _build_table(
        functools.partial(_classical_pdf_array, p),
        rho=p.rho,
        tail_index=a,
        tail_constants=(cr, cl),
        scale=scale,
        right=side(p.rho, cr),
        left=side(1.0 - p.rho, cl),
        n=n,
        params=p,
        refine_rounds=3,
        mass_tol=1e-10,
    )


def classical_cdf(p: FreeStableParams, x):
    """Classical CDF from the interpolated integral of :func:`classical_pdf`."""
    t = _classical_table(p)
    v = t.cdf(np.asarray(x, dtype=float))
    return float(v) if np.ndim(v) == 0 else v
