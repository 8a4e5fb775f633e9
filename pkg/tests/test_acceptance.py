"""Acceptance suite: eleven end-to-end criteria at their stated tolerances.

Each test prints one PASS/FAIL line (visible with or without ``-s``) before
asserting.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from freestable import RngState, make_params, pdf_array, positive_moment
from freestable.checks import (
    admissible_grid,
    check_cauchy_factorization,
    check_cf_bessel,
    check_cf_consistency,
    check_classical_sampler,
    check_density_at_zero,
    check_duality,
    check_factorization_mellin,
    check_mellin_cf,
    check_mellin_quadrature,
    check_normalization,
    check_positivity,
    check_ratio_identity,
    has_dual,
    zero_grid,
)
from freestable.inversion import density_oracle_array

from conftest import free_half_positive, semicircle

GRID = admissible_grid()


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})")

    return emit


def _worst(cases):
    bad = max(cases, key=lambda c: c.metric / c.tolerance)
    return bad, all(c.passed for c in cases)


def test_01_semicircle_recovery(report):
    t0 = time.perf_counter()
    x = np.linspace(-2.5, 2.5, 201)
    err = float(np.max(np.abs(pdf_array(make_params(2.0, 0.5), x) - semicircle(x))))
    dt = time.perf_counter() - t0
    ok = err <= 1e-10 and dt < 1.0
    report(1, "semicircle density, 201 points", ok, f"max abs err {err:.2e} <= 1e-10, {dt:.2f} s < 1 s")
    assert ok


def test_02_positive_half_stable_closed_form(report):
    t0 = time.perf_counter()
    y = np.geomspace(0.26, 1e3, 201)
    want = free_half_positive(y)
    rel = float(np.max(np.abs(pdf_array(make_params(0.5, 1.0), y) - want) / want))
    dt = time.perf_counter() - t0
    ok = rel <= 1e-9 and dt < 1.0
    report(2, "positive 1/2-stable closed form, log grid", ok, f"max rel err {rel:.2e} <= 1e-9, {dt:.2f} s < 1 s")
    assert ok


def test_03_cross_method_agreement(report):
    t0 = time.perf_counter()
    x = np.linspace(-10.0, 10.0, 101)
    worst, where = 0.0, None
    for p in GRID:
        a = pdf_array(p, x, "series")
        b = density_oracle_array(p, x)[0]
        # combined absolute + relative criterion: |a - b| <= 1e-8 (1 + |b|)
        m = float(np.max(np.abs(a - b) / (1.0 + np.abs(b))))
        if m >= worst:
            worst, where = m, p
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 30.0
    report(3, f"series vs oracle, {len(GRID)} laws x 101 points", ok,
           f"worst {worst:.2e} <= 1e-8 at alpha={where.alpha:g}, rho={where.rho:.4g}; {dt:.1f} s < 30 s")
    assert ok


def test_04_duality(report):
    t0 = time.perf_counter()
    xs = np.geomspace(0.01, 100.0, 41)
    cases = [check_duality(p, xs) for p in GRID if has_dual(p)]
    bad, ok = _worst(cases)
    dt = time.perf_counter() - t0
    ok = ok and bad.metric <= 1e-9 and dt < 10.0
    report(4, f"duality residual over {len(cases)} laws", ok, f"worst {bad.metric:.2e} <= 1e-9 ({bad.id}); {dt:.1f} s < 10 s")
    assert ok


def test_05_positivity_and_normalization(report):
    t0 = time.perf_counter()
    pos = [check_positivity(p, 1e-6) for p in GRID]
    norm = [check_normalization(p, 1e-8) for p in GRID]
    bp, okp = _worst(pos)
    bn, okn = _worst(norm)
    dt = time.perf_counter() - t0
    ok = okp and okn and dt < 30.0
    report(5, "P(X > 0) = rho and total mass 1", ok,
           f"worst |mass+ - rho| {bp.metric:.2e} <= 1e-6, worst |mass - 1| {bn.metric:.2e} <= 1e-8; {dt:.1f} s < 30 s")
    assert ok


def test_06_mellin_closed_forms(report):
    quad = [check_mellin_quadrature(p, None, 1e-6) for p in GRID]
    fact = [check_factorization_mellin(p, None, 1e-12) for p in GRID]
    bq, okq = _worst(quad)
    bf, okf = _worst(fact)
    e = abs(positive_moment(make_params(2.0, 0.5), 1.0).value - 4.0 / (3.0 * math.pi))
    ok = okq and okf and e <= 1e-10
    report(6, "Mellin transforms", ok,
           f"quadrature {bq.metric:.2e} <= 1e-6, factorization {bf.metric:.2e} <= 1e-12, "
           f"semicircle E[X+] err {e:.2e} <= 1e-10")
    assert ok


def test_07_cf_consistency(report):
    cases = [check_cf_consistency(p, None, 1e-6) for p in GRID]
    bc, okc = _worst(cases)
    bessel = check_cf_bessel(None, 1e-8)
    ok = okc and bessel.passed
    report(7, "cf series vs Fourier quadrature, |z| <= 5", ok,
           f"worst {bc.metric:.2e} <= 1e-6 ({bc.id}); alpha=2 vs J1(2z)/z {bessel.metric:.2e} <= 1e-8")
    assert ok


def test_08_mellin_of_cf(report):
    cases = [check_mellin_cf(make_params(a, 0.5), (0.25, 0.5, 0.75), 1e-3) for a in (1.5, 2.0)]
    bad, ok = _worst(cases)
    report(8, "Mellin transform of the cf, s in {0.25, 0.5, 0.75}", ok, f"worst rel err {bad.metric:.2e} <= 1e-3 ({bad.id})")
    assert ok


@pytest.mark.slow
def test_09_monte_carlo(report):
    t0 = time.perf_counter()
    n = 100_000
    cases = [check_classical_sampler(make_params(a, r), RngState(9, (i,)), n) for i, (a, r) in enumerate(((0.5, 1.0), (2.0, 0.5)))]
    cases += check_ratio_identity(make_params(0.6, 0.4), make_params(0.6, 0.8), RngState(5), n)
    cases += [c for c in check_cauchy_factorization(make_params(0.5, 0.5), RngState(7), n) if c.id.endswith("/ks")]
    dt = time.perf_counter() - t0
    bad, ok = _worst(cases)
    ok = ok and dt < 180.0
    report(9, f"Monte Carlo KS at level 0.01, {len(cases)} tests, n=1e5", ok,
           f"worst D/D_crit {bad.metric / bad.tolerance:.2f} ({bad.id}); {dt:.1f} s < 180 s")
    assert ok


def test_10_density_at_zero(report):
    grid = zero_grid()
    cases = [check_density_at_zero(p, 1e-10) for p in grid]
    bad, ok = _worst(cases)
    ok = ok and len(grid) == 20 and any(p.alpha < 1 for p in grid) and any(p.alpha > 1 for p in grid)
    report(10, "density at 0 equals sin(pi rho)/pi, 20 laws", ok, f"worst {bad.metric:.2e} <= 1e-10")
    assert ok


@pytest.mark.slow
def test_11_full_check_suite(report):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "freestable", "check", "--suite", "all", "--seed", "42"],
        capture_output=True, text=True, timeout=600,
    )
    dt = time.perf_counter() - t0
    doc = json.loads(proc.stdout)
    ok = proc.returncode == 0 and doc["pass"] and dt <= 300.0
    report(11, "check --suite all --seed 42", ok, f"exit {proc.returncode}, {len(doc['cases'])} cases, {dt:.0f} s <= 300 s")
    assert ok
