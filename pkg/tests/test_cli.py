import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mcleish.cli import main
from mcleish.sim import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dist_cdf_csv(capsys):
    code, out, _ = run(capsys, "dist", "cdf", "--nu", "1", "--mu", "2", "--sigma2", "4", "--x", "2,4", "--header")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "value"]
    assert float(rows[1][1]) == pytest.approx(0.5)
    # Laplacian CDF 1 - exp(-sqrt(2) z) / 2 at z = 1
    assert float(rows[2][1]) == pytest.approx(1 - 0.5 * math.exp(-math.sqrt(2)), rel=1e-12)


def test_dist_json_mgf_and_moment(capsys):
    code, out, _ = run(capsys, "dist", "mgf", "--nu", "2", "--s", "0.5", "--format", "json")
    assert code == 0
    # (1 - lam^2 s^2 / 4)^(-nu) with lam^2 = 1
    assert json.loads(out)["value"][0] == pytest.approx((1 - 0.25 / 4) ** -2)
    code, out, _ = run(capsys, "dist", "moment", "--nu", "2", "--k", "4")
    assert float(out.strip().split(",")[1]) == pytest.approx(3 * 1.5)


def test_dist_sample_requires_seed_and_is_reproducible(capsys, tmp_path):
    code, _, err = run(capsys, "dist", "sample", "--nu", "1", "--n", "5")
    assert code == 2 and json.loads(err)["code"]
    f = tmp_path / "s.csv"
    assert main(["dist", "sample", "--nu", "0.7", "--n", "50", "--seed", "3", "--out", str(f)]) == 0
    a = f.read_text()
    main(["dist", "sample", "--nu", "0.7", "--n", "50", "--seed", "3", "--out", str(f)])
    assert f.read_text() == a and len(a.splitlines()) == 50


def test_dist_complex_and_multivariate(capsys, tmp_path):
    code, out, _ = run(capsys, "dist", "pdf", "--nu", "1", "--complex", "--x", "0.5+0.5j")
    assert code == 0 and out.startswith("0.5+0.5j,")
    cov = tmp_path / "c.csv"
    cov.write_text("1,0.2\n0.2,1\n")
    code, out, _ = run(capsys, "dist", "cdf", "--nu", "2", "--cov-file", str(cov), "--x", "0,0")
    assert code == 0
    assert float(out.split(",")[1]) > 0.25


def test_fit_json(capsys, tmp_path):
    from mcleish.univariate import McLeishParams, sample
    f = tmp_path / "x.csv"
    np.savetxt(f, sample(McLeishParams(1.0, 0.0, 2.0), 200_000, 4))
    code, out, _ = run(capsys, "fit", "--input", str(f))
    d = json.loads(out)
    assert code == 0 and d["nu"] == pytest.approx(1.0, rel=0.15) and d["sigma2"] == pytest.approx(2.0, rel=0.03)


def test_allan_csv_schema(capsys, tmp_path):
    f = tmp_path / "t.bin"
    z = np.exp(0.5j * np.pi * np.arange(4000))
    np.c_[z.real, z.imag].astype("<f8").tofile(f)
    o = tmp_path / "a.csv"
    code, out, _ = run(capsys, "allan", "--input", str(f), "--input-format", "bin", "--complex", "--out", str(o))
    assert code == 0
    assert o.read_text().splitlines()[0] == "tau,allan,var_of_var,autocorr"
    assert json.loads(out)["uncertainty_class"] == "ConstantVariance"


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "bpsk", "--nu", "1", "--snr-db", "0:5:10",
                       "--trials", "10000", "--seed", "7", "--jobs", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_HEADER and len(rows) == 4


def test_sweep_analytic_unavailable_exit_code(capsys):
    code, _, err = run(capsys, "sweep", "--family", "mask", "--m", "4", "--nu", "1", "--snr-db", "0",
                       "--trials", "10000", "--seed", "1", "--detector", "MAP", "--priors", "0.1,0.2,0.3,0.4")
    assert code == 2 and json.loads(err)["code"] == "analytic_unavailable"


def test_verify_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(l.startswith("PASS ") for l in lines)


def test_bad_input_exit_codes(capsys):
    code, _, err = run(capsys, "dist", "pdf", "--nu", "-1", "--x", "0")
    assert code == 2 and json.loads(err)["code"] == "domain"
    code, _, err = run(capsys, "dist", "pdf", "--nu", "1", "--x", "abc")
    assert code == 2


def test_usage_error_via_entry_point():
    r = subprocess.run([sys.executable, "-m", "mcleish", "nosuch"], capture_output=True, text=True)
    assert r.returncode == 2
    assert json.loads(r.stderr.strip().splitlines()[-1])["code"] == "usage"
