import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import special

from freestable.cli import run

GOLDEN = Path(__file__).parent / "golden"


def cli(capsys, *args):
    code = run(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_pdf_semicircle_rows(capsys):
    code, out, _ = cli(capsys, "pdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,pdf"
    rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
    assert [r[0] for r in rows] == [-2, -1, 0, 1, 2]
    assert rows[2][1] == pytest.approx(0.3183098861837907, rel=1e-15)
    assert rows[1][1] == pytest.approx(math.sqrt(3) / (2 * math.pi), abs=1e-10)
    assert rows[0][1] == 0.0 and rows[4][1] == 0.0


@pytest.mark.parametrize("name, args", [
    ("pdf_semicircle.csv", ["pdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "5"]),
    ("mellin_half.csv", ["mellin", "--alpha", "0.5", "--rho", "0.7", "--min", "-0.5", "--max", "0.25", "--n", "4"]),
])
def test_golden_files(capsys, name, args):
    code, out, _ = cli(capsys, *args)
    assert code == 0
    assert out == (GOLDEN / name).read_text()


def test_seventeen_digits(capsys):
    _, out, _ = cli(capsys, "mellin", "--alpha", "2", "--rho", "0.5", "--s", "1")
    s, re_, im = out.splitlines()[1].split(",")
    assert re_ == format(float(re_), ".17g")
    assert len(re_.lstrip("0.").replace(".", "")) == 17
    assert float(re_) == pytest.approx(4 / (3 * math.pi), rel=1e-15)


def test_mellin_limit_is_rho(capsys):
    code, out, _ = cli(capsys, "mellin", "--alpha", "0.5", "--rho", "1", "--s", "0")
    assert code == 0
    assert out.splitlines() == ["s,mellin_re,mellin_im", "0,1,0"]


def test_cdf_and_cf(capsys):
    code, out, _ = cli(capsys, "cdf", "--alpha", "2", "--rho", "0.5", "--min", "-2", "--max", "2", "--n", "3")
    assert code == 0
    vals = [float(ln.split(",")[1]) for ln in out.splitlines()[1:]]
    assert vals == pytest.approx([0.0, 0.5, 1.0], abs=1e-12)
    code, out, _ = cli(capsys, "cf", "--alpha", "2", "--rho", "0.5", "--min", "0.5", "--max", "2", "--n", "4")
    assert out.splitlines()[0] == "z,cf_re,cf_im"
    for ln in out.splitlines()[1:]:
        z, re_, im = map(float, ln.split(","))
        assert re_ == pytest.approx(special.j1(2 * z) / z, abs=1e-12)
        assert abs(im) < 1e-15


def test_cf_methods_agree(capsys):
    base = ["cf", "--alpha", "0.7", "--rho", "0.6", "--min", "0", "--max", "3", "--n", "4"]
    _, a, _ = cli(capsys, *base, "--method", "series")
    _, b, _ = cli(capsys, *base, "--method", "fourier")
    for la, lb in zip(a.splitlines()[1:], b.splitlines()[1:]):
        va, vb = np.array(la.split(","), float), np.array(lb.split(","), float)
        assert np.max(np.abs(va - vb)) < 1e-6


def test_log_grid(capsys):
    _, out, _ = cli(capsys, "pdf", "--alpha", "0.5", "--rho", "1", "--min", "0.26", "--max", "1000",
                    "--n", "7", "--spacing", "log")
    x = [float(ln.split(",")[0]) for ln in out.splitlines()[1:]]
    assert x == pytest.approx(np.geomspace(0.26, 1000, 7), rel=1e-15)


def test_json_matches_csv(capsys):
    args = ["pdf", "--alpha", "1.5", "--rho", "0.4", "--min", "-3", "--max", "3", "--n", "7"]
    _, csv_out, _ = cli(capsys, *args)
    _, json_out, _ = cli(capsys, *args, "--format", "json")
    doc = json.loads(json_out)
    assert doc["metadata"] == {"alpha": 1.5, "rho": 0.4, "method": "auto", "tolerance": 1e-12, "version": "0.1.0"}
    assert doc["columns"] == ["x", "pdf"]
    csv_rows = [[float(v) for v in ln.split(",")] for ln in csv_out.splitlines()[1:]]
    assert doc["rows"] == csv_rows


def test_bpb_flag(capsys):
    _, a, _ = cli(capsys, "pdf", "--alpha", "1.5", "--rho", "1", "--bpb", "--min", "1", "--max", "1", "--n", "1")
    _, b, _ = cli(capsys, "pdf", "--alpha", "1.5", "--rho", str(1 / 3), "--min", "1", "--max", "1", "--n", "1")
    assert a == b


def test_sample_free_support_and_reproducible(capsys):
    args = ["sample", "--law", "free", "--alpha", "0.5", "--rho", "1", "--n", "3", "--seed", "1"]
    code, a, _ = cli(capsys, *args)
    assert code == 0
    vals = [float(v) for v in a.splitlines()]
    assert len(vals) == 3 and min(vals) >= 0.25
    _, b, _ = cli(capsys, *args)
    assert a == b


def test_sample_seed_from_environment(capsys, monkeypatch):
    _, a, _ = cli(capsys, "sample", "--alpha", "0.7", "--rho", "0.5", "--n", "5", "--seed", "123")
    monkeypatch.setenv("FREESTABLE_SEED", "123")
    _, b, _ = cli(capsys, "sample", "--alpha", "0.7", "--rho", "0.5", "--n", "5")
    assert a == b
    _, c, _ = cli(capsys, "sample", "--alpha", "0.7", "--rho", "0.5", "--n", "5", "--seed", "124")
    assert c != a
    monkeypatch.setenv("FREESTABLE_SEED", "x")
    code, _, err = cli(capsys, "sample", "--alpha", "0.7", "--rho", "0.5", "--n", "5")
    assert code == 2 and "seed" in err


def test_sample_classical_normal_variance(capsys):
    code, out, _ = cli(capsys, "sample", "--law", "classical", "--alpha", "2", "--rho", "0.5", "--n", "1e5", "--seed", "9")
    assert code == 0
    y = np.array(out.split(), dtype=float)
    assert y.size == 100_000
    # variance of the sample variance of a normal law is 2 sigma^4 / n
    assert abs(y.var() - 2.0) < 4 * math.sqrt(2 * 4.0 / y.size)


def test_alpha_one_rejected(capsys):
    code, out, err = cli(capsys, "pdf", "--alpha", "1", "--rho", "0.5")
    assert code == 2 and out == ""
    assert "alpha=1 not admissible" in err
    assert len(err.strip().splitlines()) == 1


@pytest.mark.parametrize("args", [
    ["pdf", "--alpha", "2", "--rho", "0.5", "--n", "0"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--n", "20000000"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--n", "2.5"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--tolerance", "1e-15"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--tolerance", "0.1"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--min", "0", "--max", "1", "--spacing", "log"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--min", "3", "--max", "1"],
    ["pdf", "--alpha", "2", "--rho", "0.5", "--method", "fourier"],
    ["pdf", "--alpha", "1.5", "--rho", "0.2"],
    ["pdf", "--rho", "0.5"],
    ["mellin", "--alpha", "0.5", "--rho", "0.5", "--s", "0.7"],
    ["sample", "--alpha", "0.5", "--rho", "0.5", "--n", "-3"],
])
def test_usage_and_domain_errors(capsys, args):
    code, out, err = cli(capsys, *args)
    assert code == 2
    assert out == ""
    assert err.startswith("freestable: ")


def test_malformed_flag_prints_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["pdf", "--alpha", "2", "--bogus"])
    assert exc.value.code == 2
    assert "usage:" in capsys.readouterr().err


def test_numerical_failure_names_point(capsys):
    # the pure series method has no convergent expansion at the edge x*
    code, out, err = cli(capsys, "pdf", "--alpha", "0.5", "--rho", "0.5", "--min", "0.2", "--max", "0.25",
                         "--n", "2", "--method", "series")
    assert code == 3 and out == ""
    assert "x=0.25" in err


def test_check_subset(capsys):
    code, out, _ = cli(capsys, "check", "--suite", "zero", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["suite"] == "zero" and doc["seed"] == 42 and doc["pass"] is True
    assert len(doc["cases"]) == 20
    assert all(c["id"].startswith("density_at_zero/") for c in doc["cases"])


def test_check_failure_exit_code(capsys, monkeypatch):
    from freestable import checks

    real = checks.check_density_at_zero

    def broken(p, tol=1e-10):
        case = real(p, tol)
        return checks.CheckCase(case.id, case.anchor, case.params, 1.0, case.tolerance)

    monkeypatch.setattr(checks, "check_density_at_zero", broken)
    code, out, err = cli(capsys, "check", "--suite", "zero")
    assert code == 1
    assert json.loads(out)["pass"] is False
    assert "failed" in err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    code, out, _ = cli(capsys, "pdf", "--alpha", "2", "--rho", "0.5", "--n", "3", "-o", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("x,pdf\n")


def test_console_entry_point_byte_identical():
    cmd = [sys.executable, "-m", "freestable", "sample", "--alpha", "1.5", "--rho", "0.5", "--n", "20", "--seed", "5"]
    env = dict(os.environ, LC_ALL="de_DE.UTF-8", LANG="de_DE.UTF-8")
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True, env=env).stdout
    assert a == b
    assert b"," not in a
    r = subprocess.run([sys.executable, "-m", "freestable", "pdf", "--alpha", "1", "--rho", "0.5"], capture_output=True)
    assert r.returncode == 2
