import math

import pytest
from hypothesis import given, settings, strategies as st

from freestable import BpbParams, DomainError, dual, from_bpb, make_params, reflected, to_bpb, x_star
from freestable.params import voiculescu


@pytest.mark.parametrize("alpha, rho", [(0.5, 1.0), (0.5, 0.0), (1.5, 1 / 3), (1.5, 2 / 3), (2.0, 0.5)])
def test_admissible(alpha, rho):
    p = make_params(alpha, rho)
    assert (p.alpha, p.rho) == (alpha, rho)


@pytest.mark.parametrize("alpha, rho", [(1.5, 0.2), (1.0, 0.5), (2.0, 0.6), (0.0, 0.5), (2.5, 0.5), (0.5, 1.1), (0.5, -0.1)])
def test_inadmissible(alpha, rho):
    with pytest.raises(DomainError):
        make_params(alpha, rho)


def test_alpha_one_message():
    with pytest.raises(DomainError, match="alpha=1 not admissible"):
        make_params(1, 0.5)


def test_from_bpb_examples():
    assert from_bpb(BpbParams(1.5, 1.0)).rho == pytest.approx(1 / 3, abs=1e-15)
    assert from_bpb(BpbParams(1.5, 0.0)).rho == pytest.approx(2 / 3, abs=1e-15)
    assert from_bpb(BpbParams(0.5, 0.7)) == make_params(0.5, 0.7)


def test_to_bpb_examples():
    assert to_bpb(make_params(1.5, 1 / 3)).rho_tilde == pytest.approx(1.0, abs=1e-15)
    assert to_bpb(make_params(0.5, 0.7)).rho_tilde == 0.7
    assert to_bpb(make_params(2.0, 0.5)).rho_tilde == 0.0


def test_reflected():
    assert reflected(make_params(0.5, 0.7)).rho == pytest.approx(0.3)
    assert reflected(make_params(2.0, 0.5)) == make_params(2.0, 0.5)
    assert reflected(make_params(1.5, 1 / 3)).rho == pytest.approx(2 / 3)


def test_dual():
    assert dual(make_params(2.0, 0.5)) == make_params(0.5, 1.0)
    d = dual(make_params(1.5, 0.5))
    assert d.alpha == pytest.approx(2 / 3) and d.rho == pytest.approx(0.75)
    with pytest.raises(DomainError):
        dual(make_params(0.4, 0.5))


def test_x_star():
    assert x_star(0.5) == 0.25
    # alpha (1-alpha)^(1/alpha - 1) at alpha = 0.9
    assert x_star(0.9) == pytest.approx(0.9 * 0.1 ** (1 / 0.9 - 1), rel=1e-15)
    assert x_star(0.9) == pytest.approx(0.6968373144130143, rel=1e-15)
    with pytest.raises(DomainError):
        x_star(1.5)


def test_voiculescu_phase():
    v = voiculescu(make_params(2.0, 0.5))
    # semicircle: phi(z) = 1/z
    assert v(2.0 + 0j) == pytest.approx(0.5, abs=1e-15)


admissible = st.one_of(
    st.tuples(st.floats(0.01, 0.99), st.floats(0.0, 1.0)),
    st.floats(1.01, 2.0).flatmap(lambda a: st.tuples(st.just(a), st.floats(1 - 1 / a, 1 / a))),
)


@settings(max_examples=300, deadline=None)
@given(admissible)
def test_bpb_roundtrip(ar):
    a, r = ar
    p = make_params(a, r)
    if a < 2.0:
        assert from_bpb(to_bpb(p)).rho == pytest.approx(r, abs=1e-12)
    assert reflected(reflected(p)).rho == pytest.approx(r, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(admissible)
def test_dual_is_involution_when_defined(ar):
    p = make_params(*ar)
    try:
        d = dual(p)
    except DomainError:
        assert p.alpha < 1 and (p.alpha < 0.5 or p.alpha * p.rho < 1 - p.alpha - 1e-12)
        return
    dd = dual(d)
    assert dd.alpha == pytest.approx(p.alpha, rel=1e-14)
    assert dd.rho == pytest.approx(p.rho, abs=1e-12)
    assert math.isfinite(d.rho)
