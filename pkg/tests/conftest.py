import math

import mpmath as mp
import numpy as np
import pytest

from freestable import make_params

mp.mp.dps = 30


def semicircle(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 2, np.sqrt(np.maximum(4 - x * x, 0.0)) / (2 * math.pi), 0.0)


def free_half_positive(y):
    """Density of the positive free 1/2-stable law (image of the semicircle under duality)."""
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.sqrt(np.maximum(4 * y - 1, 0.0)) / (2 * math.pi * y * y)
    return np.where(y >= 0.25, v, 0.0)


def levy(x):
    """Classical positive 1/2-stable density with characteristic exponent -(-iz)^(1/2)."""
    x = np.asarray(x, dtype=float)
    return x**-1.5 * np.exp(-1 / (4 * x)) / (2 * math.sqrt(math.pi))


def mp_free_mellin(alpha, rho, s):
    a, r, s = mp.mpf(alpha), mp.mpf(rho), mp.mpf(s)
    if s == 0:
        return r
    return mp.sin(mp.pi * r * s) / mp.pi * mp.gamma(s) * mp.gamma(1 - s / a) / mp.gamma(2 + s - s / a)


@pytest.fixture
def semicircle_params():
    return make_params(2.0, 0.5)


@pytest.fixture
def half_positive():
    return make_params(0.5, 1.0)
