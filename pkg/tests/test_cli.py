import json

import pytest

from slcones.cli import main


def _json(path):
    return json.loads(path.read_text())


def test_verify_writes_report(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--grid", "8", "--out", str(out)]) == 0
    d = _json(out)
    assert d["schema_version"] == "1.0" and d["passed"] and d["grid"]["n_s"] == 8


def test_verify_three(tmp_path):
    out = tmp_path / "v3.json"
    assert main(["verify", "--three", "--grid", "5", "--out", str(out)]) == 0
    assert _json(out)["dimension"] == 3


def test_failed_tolerance_exits_one(tmp_path):
    assert main(["verify", "--grid", "6", "--tol", "1e-18", "--out", str(tmp_path / "v.json")]) == 1


@pytest.mark.parametrize("argv", [
    ["verify", "--b-level", "1.5"],
    ["verify", "--grid", "1"],
    ["nonsense"],
    ["mesh", "--n", "4"],
    ["torus-search", "--c-range", "1,0,0.1"],
    ["area", "--lattice", "1,2,2,4"],
    ["verify", "--three", "--alpha", "1,1,1"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# defaults\ntheta = 0.5\nb-level = 0.2\ngrid = 6\n")
    out = tmp_path / "v.json"
    assert main(["verify", "--config", str(cfg), "--b-level", "0.1", "--out", str(out)]) == 0
    d = _json(out)
    assert d["params"]["theta"] == 0.5 and d["params"]["B"] == 0.1 and d["grid"]["n_s"] == 6


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["verify", "--config", str(bad)]) == 2
    bad.write_text("grid = many\n")
    assert main(["verify", "--config", str(bad)]) == 2
    bad.write_text("no equals sign\n")
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_diagnose(tmp_path):
    out, csv, cj = tmp_path / "d.json", tmp_path / "c.csv", tmp_path / "c.json"
    code = main(["diagnose", "--points", "4", "--curve-samples", "32", "--out", str(out),
                 "--curve-csv", str(csv), "--curve-json", str(cj)])
    d = _json(out)
    assert code == (0 if d["passed"] else 1)
    assert d["classification"] == "superconformal" and "toda" in d["blocks"]
    assert csv.read_text().startswith("lambda_re")
    assert _json(cj)["kind"] == "spectral_curve"


def test_diagnose_isotropic_passes(tmp_path):
    out = tmp_path / "d.json"
    assert main(["diagnose", "--b-level", "0", "--c-level", "0", "--out", str(out)]) == 0
    assert "toda" in _json(out)["skipped"]


def test_mesh(tmp_path):
    out = tmp_path / "m.obj"
    assert main(["mesh", "--n", "8", "--projection", "re1,im2,re3", "--out", str(out)]) == 0
    assert sum(l.startswith("f ") for l in out.read_text().splitlines()) == 2 * 7 * 7
    out = tmp_path / "m.ply"
    assert main(["mesh", "--n", "6", "--points-only", "--out", str(out)]) == 0
    assert "element face 0" in out.read_text()
    assert main(["mesh", "--n", "6", "--projection", "re1,zz,re3", "--out", str(out)]) == 2


def test_area(tmp_path, capsys):
    assert main(["area", "--quadrature", "--lattice", "2,0,1,1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["relative_difference"] < 1e-6
    assert main(["area", "--b-level", "1", "--c-level", "-1", "--s-period", "3",
                 "--t-period", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["area"] == pytest.approx(2.0)
    assert main(["area", "--b-level", "1", "--c-level", "-1"]) == 2


def test_strand_trace(tmp_path, capsys):
    assert main(["strand-trace", "--coeffs", "1,-1,0", "--level", "0.2", "--samples", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("s,re_y1") and len(lines) == 6
    out = tmp_path / "t.csv"
    assert main(["strand-trace", "--strand", "z", "--span=-2,2", "--out", str(out)]) == 0
    assert out.read_text().startswith("# schema_version")
    assert main(["strand-trace", "--coeffs", "1,1,1", "--span", "0,5"]) == 1


def test_torus_search_resume(tmp_path):
    out, summ = tmp_path / "cat.jsonl", tmp_path / "s.csv"
    args = ["torus-search", "--case", "b", "--limit", "2", "--out", str(out)]
    assert main(args + ["--summary", str(summ)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and len(summ.read_text().splitlines()) == 3
    out.write_text(lines[0] + "\n" + lines[1][:25])
    assert main(args + ["--resume"]) == 0
    again = out.read_text().splitlines()
    assert len(again) == 2 and again[0] == lines[0]
    assert json.loads(again[1])["kind"] == "torus_candidate"
