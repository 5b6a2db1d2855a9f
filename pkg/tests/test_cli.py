import json
import subprocess
import sys

import pytest

from cuspcoeffs.builtin import get_form
from cuspcoeffs.cli import main
from cuspcoeffs.modform import newform_to_dict


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cusps_json(capsys):
    code, out = run(capsys, "cusps", "--level", "12", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["count"] == 6


def test_usage_errors_exit_2(capsys):
    assert main(["cusps"]) == 2
    assert main(["cusps", "--level", "12", "--conductor", "5"]) == 2
    assert main(["coeffs", "--form", "nosuchform", "--cusp", "0"]) == 2
    assert main([]) == 2


def test_modform_check(tmp_path, capsys):
    data = newform_to_dict(get_form("level11"))
    data["coefficients"] = data["coefficients"][:60]
    good = tmp_path / "good.json"
    good.write_text(json.dumps(data))
    code, _ = run(capsys, "modform", "check", str(good))
    assert code == 0
    data["coefficients"][5][1] = 3.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out = run(capsys, "modform", "check", str(bad))
    assert code == 1 and "multiplicativity" in out
    trunc = tmp_path / "trunc.json"
    trunc.write_text(good.read_text()[:100])
    assert main(["modform", "check", str(trunc)]) == 1


def test_coeffs_both_provenances(capsys):
    code, out = run(capsys, "coeffs", "--form", "level11", "--cusp", "0", "--nmax", "5", "--json")
    assert code == 0
    data = json.loads(out)
    text = json.dumps(data)
    assert "oracle" in text and "product_formula" in text


def test_formula_with_plot(tmp_path, capsys):
    png = tmp_path / "f.png"
    code, out = run(capsys, "formula", "--form", "level9chi", "--cusp", "1/3", "--plot", str(png))
    assert code == 0 and "PASS" in out
    assert png.stat().st_size > 1000


def test_al_voronoi_identity(capsys):
    assert run(capsys, "al", "--form", "level11", "--set", "11")[0] == 0
    assert run(capsys, "voronoi", "--form", "level11", "--twist", "1/3")[0] == 0
    assert run(capsys, "identity", "--form", "delta", "--twist", "1/2", "--y", "0.5")[0] == 0


def test_al_rejects_prime_not_dividing_level(capsys):
    assert main(["al", "--form", "level11", "--set", "5"]) == 2


def test_bounds_with_plot(tmp_path, capsys):
    png = tmp_path / "b.png"
    code, out = run(capsys, "bounds", "--form", "level11", "--cusp", "0", "--xmax", "2000", "--plot", str(png))
    assert code == 0 and png.exists()


def test_json_is_deterministic(capsys):
    argv = ["identity", "--form", "level11", "--twist", "1/3", "--y", "0.5", "--json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    prov = json.loads(first)["checks"][0]["provenance"]
    assert prov == {"direct": "input", "dual_coefficients": "product_formula", "hankel": "closed_form"}


def test_suite_quick_report(tmp_path):
    # a separate process, so the process pool starts cleanly
    out = tmp_path / "rep"
    proc = subprocess.run(
        [sys.executable, "-m", "cuspcoeffs", "suite", "--quick", "--report", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert (out / "report.json").exists() and (out / "residuals.png").exists()
    data = json.loads((out / "report.json").read_text())
    ids = [c["id"] for c in data["checks"]]
    assert ids == sorted(ids) and data["passed"]
