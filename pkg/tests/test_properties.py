"""Invariants checked on randomly drawn admissible parameters."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from freestable import (
    cdf,
    cf,
    dual,
    make_params,
    mellin_classical,
    mellin_free,
    pdf,
    pdf_array,
    quantile,
    reflected,
)
from freestable.checks import has_dual
from freestable.inversion import density_oracle_array
from freestable.params import FreeStableParams

small = st.tuples(st.floats(0.05, 0.95), st.floats(0.0, 1.0))
large = st.floats(1.05, 2.0).flatmap(lambda a: st.tuples(st.just(a), st.floats(1 - 1 / a, 1 / a)))
params = st.one_of(small, large).map(lambda t: make_params(*t))
xs = st.floats(-50.0, 50.0, allow_nan=False)

# quantile tables cost about a second each, so draw from a fixed set
table_params = st.sampled_from([make_params(a, r) for a, r in ((0.3, 0.6), (0.8, 1.0), (1.4, 0.5), (2.0, 0.5))])

fast = settings(max_examples=60, deadline=None)


@fast
@given(params, xs)
def test_density_nonnegative_and_reflects(p: FreeStableParams, x):
    v = pdf(p, x)
    assert v >= 0.0 and math.isfinite(v)
    # exact up to the rounding of 1 - rho in the reflected parameters
    assert pdf(reflected(p), -x) == pytest.approx(v, rel=1e-12, abs=1e-15)


@fast
@given(params, st.lists(xs, min_size=2, max_size=8))
def test_series_agrees_with_oracle(p, pts):
    x = np.array(pts)
    a = pdf_array(p, x)
    b = density_oracle_array(p, x)[0]
    assert np.all(np.abs(a - b) <= 1e-8 * np.maximum(b, 1.0))


@fast
@given(params, st.floats(0.01, 100.0))
def test_duality(p, x):
    assume(has_dual(p))
    q = dual(p)
    lhs = pdf(p, x)
    rhs = x ** (-p.alpha - 1) * pdf(q, x ** (-p.alpha))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)


@fast
@given(params, st.floats(-3.0, 3.0), st.floats(0.01, 3.0))
def test_cdf_monotone_and_complementary(p, x, h):
    a, b = cdf(p, x), cdf(p, x + h)
    assert 0.0 <= a <= b + 1e-13 <= 1.0 + 1e-13
    assert a + cdf(reflected(p), -x) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(table_params, st.floats(1e-8, 1 - 1e-8))
def test_quantile_inverts_cdf(p, q):
    assert cdf(p, quantile(p, q)) == pytest.approx(q, abs=1e-10)


@fast
@given(params, st.floats(-0.95, 0.95))
def test_mellin_factorization(p, t):
    s = t * min(1.0, p.alpha)
    assume(abs(s) > 1e-6)
    want = math.gamma(2.0 + (1.0 - 1.0 / p.alpha) * s) * mellin_free(p, s)
    assert mellin_classical(p, s) == pytest.approx(want, rel=1e-12)


@fast
@given(params)
def test_mellin_total_mass(p):
    s = 1e-12
    total = mellin_free(p, s) + mellin_free(reflected(p), s)
    assert total == pytest.approx(1.0, abs=1e-8)
    assert mellin_free(p, 0.0) == pytest.approx(p.rho, abs=1e-15)


@fast
@given(params, st.floats(0.0, 5.0))
def test_cf_bounded_and_hermitian(p, z):
    v = cf(p, z)
    assert abs(v) <= 1.0 + 1e-9
    assert cf(p, -z) == pytest.approx(v.conjugate(), abs=1e-15)


@fast
@given(params)
def test_density_at_origin(p):
    assert pdf(p, 0.0) == pytest.approx(math.sin(math.pi * p.rho) / math.pi, abs=1e-12)
