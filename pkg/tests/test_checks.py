import json
import math

import numpy as np
import pytest
from scipy import stats

from freestable import RngState, make_params
from freestable.checks import (
    OUT_OF_SCOPE,
    SUITES,
    SuiteConfig,
    check_cauchy_factorization,
    check_cf_bessel,
    check_cf_consistency,
    check_density_at_zero,
    check_duality,
    check_factorization_mellin,
    check_mellin_cf,
    check_mellin_quadrature,
    check_normalization,
    check_positivity,
    check_ratio_identity,
    has_dual,
    ks_critical,
    run_suite,
    zero_grid,
)


def test_ks_critical_matches_limit_distribution():
    assert ks_critical(10_000) * 100 == pytest.approx(stats.kstwobign.ppf(0.99), rel=1e-4)
    assert ks_critical(100, 100) == pytest.approx(ks_critical(50))


def test_has_dual():
    assert has_dual(make_params(2.0, 0.5))
    assert has_dual(make_params(0.7, 0.5))
    assert not has_dual(make_params(0.5, 0.0))
    assert not has_dual(make_params(0.4, 1.0))


def test_duality_cases():
    xs = np.geomspace(0.01, 100, 21)
    assert check_duality(make_params(2.0, 0.5), xs, tol=1e-10).passed
    assert check_duality(make_params(1.5, 0.5), np.geomspace(0.01, 100, 41)).passed


def test_positivity_and_normalization():
    c = check_positivity(make_params(0.5, 0.5))
    assert c.passed and c.tolerance == 1e-6
    assert check_normalization(make_params(0.5, 1.0)).passed
    assert check_positivity(make_params(2.0, 0.5)).metric < 1e-12


def test_mellin_checks():
    assert check_mellin_quadrature(make_params(0.9, 0.3)).passed
    c = check_factorization_mellin(make_params(0.5, 0.7), np.linspace(-0.9, 0.45, 28))
    assert c.passed and c.tolerance == 1e-12
    assert check_factorization_mellin(make_params(1.5, 0.5), [1.2]).passed


def test_cauchy_factorization_closed_form_and_ks():
    cases = check_cauchy_factorization(make_params(0.5, 0.5), RngState(7), 100_000, s_values=(0.25,))
    closed, ks = cases
    assert closed.passed and closed.tolerance == 1e-10
    assert ks.passed


def test_cauchy_factorization_needs_small_alpha():
    (case,) = check_cauchy_factorization(make_params(1.5, 0.5), None)
    assert not case.passed


def test_ratio_identity():
    cases = check_ratio_identity(make_params(0.6, 0.4), make_params(0.6, 0.8), RngState(1), 100_000)
    assert [c.id.rsplit("/", 1)[1] for c in cases] == ["full", "cutoff"]
    assert all(c.passed for c in cases)
    same = check_ratio_identity(make_params(0.6, 0.4), make_params(0.6, 0.4), RngState(1), 20_000)
    assert all(c.passed for c in same)


def test_cf_checks():
    assert check_cf_bessel().passed
    assert check_cf_consistency(make_params(0.5, 1.0), [0.0, 0.1]).passed


def test_mellin_cf_checks():
    assert check_mellin_cf(make_params(2.0, 0.5), (1.0,), tol=1e-4).passed
    assert check_mellin_cf(make_params(1.5, 0.5), (0.5,)).passed


def test_zero_grid():
    grid = zero_grid()
    assert len(grid) == 20
    assert any(p.alpha < 1 for p in grid) and any(p.alpha > 1 for p in grid)
    assert all(check_density_at_zero(p).passed for p in grid[:4])


def _small_config(seed=42):
    return SuiteConfig(
        seed=seed,
        mc_n=5_000,
        grid=[make_params(0.7, 0.5)],
        zero_grid=[make_params(1.5, 0.5)],
        cf_grid=[],
        mellin_cf_grid=[],
        cauchy_grid=[make_params(0.5, 0.5)],
        ratio_pairs=[],
        classical_grid=[],
    )


def test_report_schema():
    report = run_suite("all", _small_config())
    d = json.loads(json.dumps(report.to_dict()))
    assert set(d) >= {"suite", "seed", "cases", "pass"}
    assert d["suite"] == "all" and d["seed"] == 42
    for c in d["cases"]:
        assert set(c) >= {"id", "paper_ref", "alpha", "rho", "metric", "tolerance", "pass"}
        assert isinstance(c["paper_ref"], str) and c["paper_ref"]
    assert [c["id"] for c in d["cases"]] == sorted(c["id"] for c in d["cases"])
    assert d["out_of_scope"] == list(OUT_OF_SCOPE)
    assert d["pass"] is True


def test_seed_changes_only_monte_carlo_metrics():
    a = {c.id: c.metric for c in run_suite("cauchy", _small_config(1)).cases}
    b = {c.id: c.metric for c in run_suite("cauchy", _small_config(2)).cases}
    for cid in a:
        if cid.endswith("/ks"):
            assert a[cid] != b[cid]
        else:
            assert a[cid] == b[cid]


def test_same_seed_is_deterministic():
    a = [c.metric for c in run_suite("cauchy", _small_config(3)).cases]
    b = [c.metric for c in run_suite("cauchy", _small_config(3)).cases]
    assert a == b


def test_empty_grid_passes_with_warning():
    cfg = SuiteConfig(grid=[], zero_grid=[])
    report = run_suite("duality", cfg)
    assert report.cases == () and report.passed
    assert report.warnings


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")
    assert "duality" in SUITES


def test_duality_subset():
    report = run_suite("duality")
    assert report.cases and all(c.id.startswith("duality/") for c in report.cases)
    assert report.passed
