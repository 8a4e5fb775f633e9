"""Admissible (alpha, rho) parameters and the maps between parameterizations.

Free stable laws are indexed here by the stability index ``alpha`` and the
positivity parameter ``rho = P(X > 0)``.  The admissible set is

    alpha in (0, 1), rho in [0, 1]    or    alpha in (1, 2], rho in [1 - 1/alpha, 1/alpha].

The older Bercovici-Pata-Biane form uses ``(alpha, rho_tilde)`` with
``rho_tilde in [0, 1]`` and a Voiculescu transform whose phase depends on the
regime.  For ``alpha > 1`` the two are related by the affine map
``rho = (1 - (2 - alpha) * rho_tilde) / alpha``.  For ``alpha < 1`` matching the
phases of the two Voiculescu transforms forces ``rho = rho_tilde``; the single
affine formula would leave [0, 1] there, so the map is piecewise.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError
from .specfun import cos_pi, sin_pi

__all__ = [
    "FreeStableParams",
    "BpbParams",
    "VoiculescuCoefficient",
    "make_params",
    "from_bpb",
    "to_bpb",
    "reflected",
    "dual",
    "x_star",
    "voiculescu",
]

# Endpoint slack, in units of double epsilon.  Values such as rho = 1/3 with
# alpha = 1.5 are not representable, and the rounded endpoint falls on the
# wrong side of 1 - 1/alpha by one ulp.
_EDGE_ULPS = 4
_EDGE = _EDGE_ULPS * 2.220446049250313e-16


def _num(v: float) -> str:
    return f"{v:.17g}" if float(v).is_integer() else repr(float(v))


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and 0.0 < alpha <= 2.0) or alpha == 1.0:
        raise DomainError(f"alpha={_num(alpha)} not admissible (need 0 < alpha < 1 or 1 < alpha <= 2)")


def _snap_unit(v: float) -> float:
    """Round products that miss 0 or 1 by a few ulps back onto them."""
    if abs(v - 1.0) <= _EDGE:
        return 1.0
    if abs(v) <= _EDGE:
        return 0.0
    return v


@dataclass(frozen=True)
class FreeStableParams:
    """Validated point of the admissible set.  Build with :func:`make_params`."""

    alpha: float
    rho: float

    def __post_init__(self) -> None:
        a, r = self.alpha, self.rho
        if not isinstance(a, (int, float)) or not isinstance(r, (int, float)):
            raise DomainError("alpha and rho must be real numbers")
        _check_alpha(float(a))
        if not math.isfinite(r):
            raise DomainError(f"rho={r!r} not admissible")
        if a < 1.0:
            if not 0.0 <= r <= 1.0:
                raise DomainError(f"rho={r!r} not admissible for alpha={a!r} (need 0 <= rho <= 1)")
        else:
            ar = a * r
            if ar < a - 1.0 - _EDGE or ar > 1.0 + _EDGE:
                raise DomainError(
                    f"rho={r!r} not admissible for alpha={a!r} "
                    f"(need {1.0 - 1.0 / a:.17g} <= rho <= {1.0 / a:.17g})"
                )
        object.__setattr__(self, "alpha", float(a))
        object.__setattr__(self, "rho", float(r))

    @property
    def alpha_rho(self) -> float:
        """alpha * rho, snapped to 1 at the upper edge of the admissible interval."""
        return _snap_unit(self.alpha * self.rho)

    @property
    def alpha_rho_reflected(self) -> float:
        """alpha * (1 - rho), snapped to 1 at the lower edge."""
        return _snap_unit(self.alpha * (1.0 - self.rho))

    @property
    def positive(self) -> bool:
        """True when the law lives on [x*, inf) (alpha < 1, rho = 1)."""
        return self.alpha < 1.0 and self.rho == 1.0

    @property
    def negative(self) -> bool:
        return self.alpha < 1.0 and self.rho == 0.0

    def __iter__(self):
        yield self.alpha
        yield self.rho


@dataclass(frozen=True)
class BpbParams:
    alpha: float
    rho_tilde: float

    def __post_init__(self) -> None:
        _check_alpha(float(self.alpha))
        if not 0.0 <= self.rho_tilde <= 1.0:
            raise DomainError(f"rho_tilde={self.rho_tilde!r} not in [0, 1]")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "rho_tilde", float(self.rho_tilde))


@dataclass(frozen=True)
class VoiculescuCoefficient:
    """phi(z) = phase * z**exponent, with phase = -exp(i pi alpha rho)."""

    phase: complex
    exponent: float

    def __call__(self, z: complex) -> complex:
        return self.phase * cmath.exp(self.exponent * cmath.log(z))


def make_params(alpha: float, rho: float) -> FreeStableParams:
    return FreeStableParams(alpha, rho)


def from_bpb(p: BpbParams) -> FreeStableParams:
    a, rt = p.alpha, p.rho_tilde
    if a < 1.0:
        return FreeStableParams(a, rt)
    return FreeStableParams(a, (1.0 - (2.0 - a) * rt) / a)


def to_bpb(p: FreeStableParams) -> BpbParams:
    """Inverse of :func:`from_bpb`.  At alpha = 2 every rho_tilde gives rho = 1/2; returns 0."""
    a, r = p.alpha, p.rho
    if a < 1.0:
        return BpbParams(a, r)
    if a == 2.0:
        return BpbParams(a, 0.0)
    rt = (1.0 - a * r) / (2.0 - a)
    return BpbParams(a, min(max(rt, 0.0), 1.0))


def reflected(p: FreeStableParams) -> FreeStableParams:
    """Parameters of -X."""
    return FreeStableParams(p.alpha, 1.0 - p.rho)


def dual(p: FreeStableParams) -> FreeStableParams:
    """(alpha, rho) -> (1/alpha, alpha*rho); requires alpha >= 1/2."""
    if p.alpha < 0.5:
        raise DomainError(f"dual requires alpha >= 1/2, got alpha={p.alpha!r}")
    return FreeStableParams(1.0 / p.alpha, p.alpha_rho)


def x_star(p: FreeStableParams | float) -> float:
    """Matching point alpha (1 - alpha)^(1/alpha - 1) of the two density series."""
    a = p.alpha if isinstance(p, FreeStableParams) else float(p)
    if not 0.0 < a < 1.0:
        raise DomainError(f"x_star is defined for 0 < alpha < 1, got alpha={a!r}")
    return a * math.exp((1.0 / a - 1.0) * math.log1p(-a))


def voiculescu(p: FreeStableParams) -> VoiculescuCoefficient:
    phase = -complex(cos_pi(p.alpha_rho), sin_pi(p.alpha_rho))
    return VoiculescuCoefficient(phase=phase, exponent=1.0 - p.alpha)
