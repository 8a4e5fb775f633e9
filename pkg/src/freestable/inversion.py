"""Series-free density oracle based on the Cauchy transform.

The Cauchy transform G of a free stable law maps the positive half-line onto
the arc ``w = r(theta) exp(-i theta)``, ``0 < theta < pi rho``, with

    r(theta)^alpha = sin(theta) / sin((1 - alpha rho) pi + (alpha - 1) theta),

and the preimage of ``w`` is ``x = 1/w - exp(i pi alpha rho) w^(alpha - 1)``.
On the arc this simplifies to the real expression

    x(theta) = sin(alpha (pi rho - theta)) / (r(theta) sin((1 - alpha rho) pi + (alpha - 1) theta)),

and the density is ``-Im(w)/pi = r sin(theta)/pi``.  Solving ``x(theta) = x``
by bisection gives the density without touching any series.

Angles are carried as ``u = theta/pi`` together with the complement
``v = rho - u``; every sine is evaluated from whichever of the two is small,
which keeps both ends of the arc accurate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .params import FreeStableParams, reflected, x_star
from .specfun import cos_pi, sin_pi

__all__ = [
    "CurvePoint",
    "curve_radius",
    "real_axis_image",
    "solve_theta",
    "density_oracle",
    "density_oracle_array",
    "support",
    "self_test",
]

_TINY = 1e-300
_EPS = 2.220446049250313e-16
_MAX_BISECT = 64


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    r: float
    w: complex
    x: float

    @property
    def density(self) -> float:
        return -self.w.imag / math.pi


class _Arc:
    """Trigonometry of the arc for one parameter pair, on arrays of (u, v)."""

    def __init__(self, p: FreeStableParams):
        if p.rho <= 0.0:
            raise DomainError("the arc is empty for rho = 0; reflect first")
        self.p = p
        self.a = p.alpha
        self.rho = p.rho
        self.ar = p.alpha_rho
        self.s_rho, self.c_rho = sin_pi(self.rho), cos_pi(self.rho)
        self.s_ar, self.c_ar = sin_pi(self.ar), cos_pi(self.ar)

    def angles(self, u, v):
        """sin/cos of theta, of the denominator angle phi and of alpha*pi*v.

        Each is formed from whichever of u, v is smaller.
        """
        a = self.a
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        near0 = u <= v
        # from u: phi/pi = alpha rho - (alpha - 1) u, alpha v = alpha rho - alpha u
        su, cu = sin_pi(u), cos_pi(u)
        sb, cb = sin_pi((a - 1.0) * u), cos_pi((a - 1.0) * u)
        sa, ca = sin_pi(a * u), cos_pi(a * u)
        u_form = (
            su, cu,
            self.s_ar * cb - self.c_ar * sb, self.c_ar * cb + self.s_ar * sb,
            self.s_ar * ca - self.c_ar * sa, self.c_ar * ca + self.s_ar * sa,
        )
        # from v: theta/pi = rho - v, phi/pi = rho + (alpha - 1) v
        sv, cv = sin_pi(v), cos_pi(v)
        sb, cb = sin_pi((a - 1.0) * v), cos_pi((a - 1.0) * v)
        v_form = (
            self.s_rho * cv - self.c_rho * sv, self.c_rho * cv + self.s_rho * sv,
            self.s_rho * cb + self.c_rho * sb, self.c_rho * cb - self.s_rho * sb,
            sin_pi(a * v), cos_pi(a * v),
        )
        return tuple(np.where(near0, f, g) for f, g in zip(u_form, v_form))

    def point(self, u, v):
        """(r, x, sin theta) at u = theta/pi, v = rho - u."""
        st, _, sp, _, sn, _ = self.angles(u, v)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = (st / sp) ** (1.0 / self.a)
            x = np.where(r > 0, sn / (r * sp), np.inf)
        return r, x, st

    def dlogx_du(self, u, v):
        st, ct, sp, cp, sn, cn = self.angles(u, v)
        a = self.a
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            d_theta = -a * cn / sn - (ct / st) / a + ((a - 1.0) ** 2 / a) * (cp / sp)
        return math.pi * d_theta


def _split(p: FreeStableParams, theta: float) -> tuple[float, float]:
    u = theta / math.pi
    return u, p.rho - u


def curve_radius(p: FreeStableParams, theta: float) -> float:
    """Radius r(theta) of the arc traced by G(x), x > 0."""
    if p.rho <= 0.0:
        raise DomainError("rho = 0: reflect the parameters first")
    if not 0.0 < theta < math.pi * p.rho:
        raise DomainError(f"theta={theta!r} outside (0, pi*rho)")
    r, _, _ = _Arc(p).point(*_split(p, theta))
    return float(r)


def _curve_point(arc: _Arc, u: float, v: float) -> CurvePoint:
    r, x, _ = arc.point(u, v)
    r, x = float(r), float(x)
    theta = math.pi * u
    w = r * cmath.exp(-1j * theta)
    return CurvePoint(theta=theta, r=r, w=w, x=x)


def real_axis_image(p: FreeStableParams, theta: float) -> CurvePoint:
    """Point of the arc at angle ``theta`` together with its real preimage."""
    if p.rho <= 0.0:
        raise DomainError("rho = 0: reflect the parameters first")
    if not 0.0 < theta < math.pi * p.rho:
        raise DomainError(f"theta={theta!r} outside (0, pi*rho)")
    return _curve_point(_Arc(p), *_split(p, theta))


def support(p: FreeStableParams) -> tuple[float, float]:
    """Closed support [lo, hi] of the law (entries may be infinite)."""
    a = p.alpha
    if a < 1.0:
        if p.rho == 1.0:
            return x_star(p), math.inf
        if p.rho == 0.0:
            return -math.inf, -x_star(p)
        return -math.inf, math.inf
    hi = _edge(p) if p.alpha_rho == 1.0 else math.inf
    lo = -_edge(reflected(p)) if p.alpha_rho_reflected == 1.0 else -math.inf
    return lo, hi


def _edge(p: FreeStableParams) -> float:
    """Finite right end of the support when alpha * rho = 1 (alpha > 1).

    As theta -> 0, r -> (alpha - 1)^(-1/alpha) and x -> alpha / ((alpha - 1) r).
    """
    a = p.alpha
    return a * (a - 1.0) ** (1.0 / a - 1.0)


def _solve(arc: _Arc, x: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve x(theta) = x for an array of x > 0.

    Returns ``(u, v, inside)``; points with ``inside`` False have no preimage
    (they lie in a gap or beyond a finite edge of the support).
    The angle is parametrised by ``t``: ``t = u`` on the half of the arc
    nearer theta = 0 (large x) and ``t = v`` on the other half (small x).
    """
    rho = arc.rho
    half = 0.5 * rho
    xm = float(arc.point(half, rho - half)[1])
    on_u = x >= xm
    n = x.size

    def uv(t):
        return np.where(on_u, t, rho - t), np.where(on_u, rho - t, t)

    def x_of(t):
        u, v = uv(t)
        return arc.point(u, v)[1], u, v

    lo = np.full(n, _TINY)
    hi = np.full(n, half)
    x_lo = x_of(lo)[0]
    # x decreases in u and increases in v
    # at a finite right edge x(theta) is flat to rounding, so x equal to the
    # edge value counts as beyond it (density 0 there)
    beyond = np.where(on_u, x_lo <= x, x_lo > x)
    inside = ~beyond | (~on_u & (not arc.p.positive))
    pinned = beyond & inside  # x below the smallest resolvable x: theta at the end
    active = inside & ~pinned
    t = np.where(pinned, _TINY, 0.5 * (lo + hi))
    logx = np.log(x)
    sgn = np.where(on_u, -1.0, 1.0)  # d log x / dt has this sign
    finished = ~active
    for _ in range(_MAX_BISECT + 16):
        work = ~finished
        geo = work & (hi > 4.0 * lo)
        with np.errstate(divide="ignore"):
            t = np.where(geo, np.exp(0.5 * (np.log(lo) + np.log(hi))), t)
        xt, u, v = x_of(t)
        # a degenerate arc (alpha*rho snapped to 0) can give xt <= 0 on finished entries
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.log(xt) - logx
        # g has the sign of sgn * (t - root)
        above = sgn * g > 0
        hi = np.where(work & above, t, hi)
        lo = np.where(work & ~above, t, lo)
        d = arc.dlogx_du(u, v) * np.where(on_u, 1.0, -1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - g / d
        bad = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
        tn = np.where(bad, 0.5 * (lo + hi), tn)
        polish = work & ~geo
        conv = polish & ((np.abs(tn - t) <= 4e-16 * t) | (g == 0) | (hi - lo <= 4e-16 * hi))
        t = np.where(polish & ~conv, tn, t)
        finished |= conv
        if finished.all():
            break
    u, v = uv(t)
    xt = arc.point(u, v)[1]
    miss = active & (np.abs(xt - x) > max(tol, 1e-12) * (1.0 + np.abs(x)))
    if miss.any():
        i = int(np.flatnonzero(miss)[0])
        raise ConvergenceError(
            f"x(theta) = {xt[i]!r} missed the target {x[i]!r} for {arc.p} (bracket [{lo[i]!r}, {hi[i]!r}])"
        )
    return u, v, inside


def solve_theta(p: FreeStableParams, x: float, tol: float = 1e-13) -> CurvePoint:
    """Arc point whose real preimage is ``x > 0``.

    Raises :class:`DomainError` when ``x`` lies outside the support.
    """
    if not x > 0:
        raise DomainError("solve_theta needs x > 0")
    if p.rho <= 0.0:
        raise DomainError("rho = 0: no mass on the positive axis")
    arc = _Arc(p)
    u, v, inside = _solve(arc, np.array([float(x)]), tol)
    if not inside[0]:
        raise DomainError(f"x={x!r} is outside the support of {p}")
    return _curve_point(arc, float(u[0]), float(v[0]))


def density_oracle_array(p: FreeStableParams, x, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized oracle: ``(density, in_support)`` at each x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dens = np.zeros(x.shape)
    flag = np.zeros(x.shape, dtype=bool)
    for q, sel, y in ((p, x > 0, x), (reflected(p), x < 0, -x)):
        # no mass on this side (alpha*rho within rounding of 0 counts as none)
        if not sel.any() or q.rho == 0.0 or q.alpha_rho == 0.0:
            continue
        arc = _Arc(q)
        u, v, inside = _solve(arc, y[sel], tol)
        r, _, st = arc.point(u, v)
        if q.positive:
            # the left support edge is exactly x*
            inside = inside & (y[sel] > x_star(q))
        dens[sel] = np.where(inside, r * st / math.pi, 0.0)
        flag[sel] = inside
    zero = x == 0
    if zero.any():
        gap = p.alpha < 1.0 and p.rho in (0.0, 1.0)
        dens[zero] = 0.0 if gap else sin_pi(p.rho) / math.pi
        flag[zero] = not gap
    return dens, flag


def density_oracle(p: FreeStableParams, x: float, tol: float = 1e-13, return_flag: bool = False):
    """Density at ``x`` read off ``-Im G(x)/pi``.

    With ``return_flag=True`` returns ``(density, in_support)``; points in a
    gap of the support give ``(0.0, False)`` rather than an error.
    """
    d, f = density_oracle_array(p, [x], tol)
    return (float(d[0]), bool(f[0])) if return_flag else float(d[0])


def self_test(p: FreeStableParams, n: int = 1000) -> float:
    """Max of |Im x(theta)| / (1 + |x|) over a log-spaced theta grid; also
    checks that x(theta) is non-increasing up to rounding.  Raises ConvergenceError on failure."""
    if p.rho <= 0.0:
        p = reflected(p)
    top = math.pi * p.rho
    thetas = np.concatenate([np.geomspace(1e-9, 0.5 * top, n // 2), top - np.geomspace(0.5 * top, 1e-9, n - n // 2)])
    thetas = np.unique(np.clip(thetas, 1e-12, top - 1e-12))
    worst = 0.0
    prev = math.inf
    phase = cmath.exp(1j * math.pi * p.alpha_rho)
    for th in thetas:
        cp = real_axis_image(p, float(th))
        if cp.r == 0.0:
            continue
        w = cp.w
        im = (1.0 / w - phase * w ** (p.alpha - 1.0)).imag
        worst = max(worst, abs(im) / (1.0 + abs(cp.x)))
        if cp.x > prev * (1.0 + 8 * _EPS):
            raise ConvergenceError(f"x(theta) not decreasing at theta={th!r} for {p}")
        prev = cp.x
    return worst
