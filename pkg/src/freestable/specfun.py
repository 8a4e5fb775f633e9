"""Scalar special-function kernels.

Gamma-type functions are delegated to :mod:`scipy.special`; what lives here is
the pole handling and the exact argument reduction for ``sin(pi x)`` and
``cos(pi x)`` that the series coefficients depend on.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import PoleError

__all__ = [
    "log_gamma",
    "gamma",
    "rec_gamma",
    "log_abs_rec_gamma",
    "sin_pi",
    "cos_pi",
]


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z) for complex ``z``.

    The imaginary part is the continuous branch used by ``scipy.special.loggamma``
    (cut along the negative real axis), so ``log_gamma(z + 1) = log_gamma(z) + log(z)``.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log_gamma has a pole at z={z.real:g}")
    return complex(special.loggamma(z))


def gamma(z):
    """Gamma function for real or complex scalars; raises at the poles."""
    if isinstance(z, complex):
        if _is_nonpositive_integer(z):
            raise PoleError(f"gamma has a pole at z={z.real:g}")
        return complex(special.gamma(z))
    x = float(z)
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at x={x:g}")
    return float(special.gamma(x))


def rec_gamma(x):
    """1/Gamma(x); exactly zero at x = 0, -1, -2, ...

    Accepts scalars or arrays (real or complex).
    """
    out = special.rgamma(x)
    if np.ndim(out) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def log_abs_rec_gamma(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(log|1/Gamma(x)|, sign(1/Gamma(x)))`` for real arrays.

    At the poles of Gamma the sign is 0 and the log is ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.floor(x))
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = -special.gammaln(x)
        sg = special.gammasgn(x)
    # gammaln overflows at subnormal x, where 1/Gamma(x) = x to working precision
    tiny = (np.abs(x) < 1e-300) & ~pole
    if tiny.any():
        lg = np.where(tiny, np.log(np.abs(np.where(tiny, x, 1.0))), lg)
    lg = np.where(pole, -np.inf, lg)
    sg = np.where(pole, 0.0, sg)
    return lg, sg


def _reduce(x):
    # x = 2k + r with |r| <= 1; the subtraction is exact for doubles
    return x - 2.0 * np.round(0.5 * x)


def _sin_pi_scalar(x: float) -> float:
    if x == math.floor(x):
        return 0.0
    r = x - 2.0 * round(0.5 * x)
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    if r == 0.5:
        return 1.0
    if r == -0.5:
        return -1.0
    return math.sin(math.pi * r)


def _cos_pi_scalar(x: float) -> float:
    r = abs(x - 2.0 * round(0.5 * x))
    if r == 0.5:
        return 0.0
    if r == 0.0:
        return 1.0
    if r == 1.0:
        return -1.0
    if r < 0.5:
        return math.sin(math.pi * (0.5 - r))
    return -math.sin(math.pi * (r - 0.5))


def sin_pi(x):
    """sin(pi*x) with the reduction done on ``x``; exact zeros at integers."""
    if isinstance(x, (float, int)) and not isinstance(x, bool):
        return _sin_pi_scalar(float(x))
    xa = np.asarray(x, dtype=float)
    r = _reduce(xa)
    # fold into [-1/2, 1/2] using sin(pi (1 - r)) = sin(pi r)
    r = np.where(r > 0.5, 1.0 - r, r)
    r = np.where(r < -0.5, -1.0 - r, r)
    out = np.sin(np.pi * r)
    out = np.where(xa == np.floor(xa), 0.0, out)
    out = np.where(np.abs(r) == 0.5, np.sign(r), out)
    return float(out) if np.ndim(out) == 0 else out


def cos_pi(x):
    """cos(pi*x) with the reduction done on ``x``; exact zeros at half-integers."""
    if isinstance(x, (float, int)) and not isinstance(x, bool):
        return _cos_pi_scalar(float(x))
    xa = np.asarray(x, dtype=float)
    r = np.abs(_reduce(xa))
    out = np.where(r <= 0.5, np.sin(np.pi * (0.5 - r)), -np.sin(np.pi * (r - 0.5)))
    out = np.where(r == 0.5, 0.0, out)
    out = np.where(r == 0.0, 1.0, out)
    out = np.where(r == 1.0, -1.0, out)
    return float(out) if np.ndim(out) == 0 else out
