import json
import subprocess
import sys

import pytest

from isodecomp import __version__
from isodecomp.cli import main
from isodecomp.poly import Poly, PolyVectorField, fields_to_json
from conftest import moser_oracle


@pytest.fixture
def r11(tmp_path):
    out = tmp_path / "r11.json"
    assert main(["catalog", "r11", "-o", str(out)]) == 0
    return tmp_path / "r11"


@pytest.fixture
def w22(tmp_path):
    out = tmp_path / "w.json"
    assert main(["catalog", "omega0", "--n", "2", "--N", "2", "-o", str(out)]) == 0
    return tmp_path / "w"


def files(stem):
    return {k: "%s.%s.json" % (stem, k) for k in ("L", "V", "F", "meta")} | {"form": "%s.json" % stem}


def test_catalog_writes_all_files(r11):
    f = files(r11)
    meta = json.load(open(f["meta"]))
    assert meta["expected"]["count_standard"] == 4
    assert json.load(open(f["form"]))["dimension"] == 11
    assert json.load(open(f["L"]))["ambient"] == 11
    # atomic writes leave no temp files behind
    assert not [p for p in r11.parent.iterdir() if p.name.endswith(".tmp")]


def test_analyze_r11(r11, tmp_path):
    f = files(r11)
    rep = tmp_path / "rep.json"
    assert main(["analyze", "--form", f["form"], "--L", f["L"], "--F", f["F"], "--budget", "100",
                 "-o", str(rep)]) == 0
    r = json.load(open(rep))
    assert r["version"] == __version__ and r["kernel_dim"] == 0
    assert r["count_standard"] == 4 and r["N_L"]["value_upper"] == 1
    assert "canonical" not in r
    assert set(r["inputs"]) == {"form", "L", "F"}


def test_reports_are_deterministic(w22, tmp_path):
    f = files(w22)
    outs = []
    for i in range(2):
        p = tmp_path / ("a%d.json" % i)
        assert main(["analyze", "--form", f["form"], "--L", f["L"], "--seed", "3", "--no-timings", "-o", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    r = json.loads(outs[0])
    assert r["canonical"]["checks"]["reconstruction_exact"]
    assert r["length"]["certified"] and r["length"]["upper"] == 5
    # timings only change the timings block
    p = tmp_path / "t.json"
    main(["analyze", "--form", f["form"], "--L", f["L"], "--seed", "3", "-o", str(p)])
    t = json.load(open(p))
    assert "timings" in t and t["report_digest"] == r["report_digest"]


def test_complement_nl_canonical(w22, tmp_path, capsys):
    f = files(w22)
    F = tmp_path / "F.json"
    assert main(["complement", "--form", f["form"], "--L", f["L"], "--V", f["V"], "--r", "2",
                 "--F-out", str(F)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert all(out["complement"]["checks"].values())
    assert main(["nl", "--form", f["form"], "--L", f["L"], "--F", str(F), "--budget", "20"]) == 0
    assert json.loads(capsys.readouterr().out)["N_L"]["certified_zero_gap"]
    assert main(["canonical", "--form", f["form"], "--L", f["L"], "--F", str(F)]) == 0
    assert json.loads(capsys.readouterr().out)["canonical"]["checks"]["reconstruction_exact"]


def test_error_exit_codes(w22, r11, tmp_path, capsys):
    f, g = files(w22), files(r11)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", "--form", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "parse_error" and err["exit_code"] == 2
    assert main(["analyze", "--form", str(tmp_path / "missing.json")]) == 2
    assert main(["isotropy", "--form", f["form"], "--L", f["L"], "--k", "3"]) == 3  # k >= degree
    assert main(["isotropy", "--form", f["form"], "--L", g["L"]]) == 3  # dimension mismatch
    assert main(["complement", "--form", f["form"], "--L", f["V"]]) == 3  # V is not maximal isotropic
    assert main(["canonical", "--form", g["form"], "--L", g["L"], "--F", g["F"], "--budget", "10"]) == 5
    capsys.readouterr()


def test_flatten_cli(tmp_path, capsys):
    W, _ = moser_oracle()
    form = tmp_path / "m.json"
    form.write_text(json.dumps(W.to_json()))
    assert main(["flatten", "--form", str(form), "--split", "x=1,2,3", "y=4,5,6", "--steps", "20",
                 "--samples", "4"]) == 0
    r = json.loads(capsys.readouterr().out)["flatten"]
    assert r["ok"] and r["max_error"] <= 1e-6
    assert main(["flatten", "--form", str(form), "--split", "x=1,2,3", "y=4,5,6", "--steps", "2",
                 "--samples", "3", "--tol", "1e-15"]) == 6
    assert main(["flatten", "--form", str(form), "--split", "x=1,2", "y=4,5,6"]) == 2


def test_involutive_cli(tmp_path, capsys):
    p = tmp_path / "fields.json"
    d1 = PolyVectorField.coordinate(3, 0)
    z1d2 = PolyVectorField.coordinate(3, 1, Poly.var(3, 0))
    p.write_text(json.dumps(fields_to_json([d1, z1d2])))
    assert main(["involutive", "--fields", str(p)]) == 0
    r = json.loads(capsys.readouterr().out)["involutive"]
    assert r["involutive"] is False and r["witness"]["pair"] == [1, 2]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "isodecomp", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
    res = subprocess.run([sys.executable, "-m", "isodecomp", "nonsense"], capture_output=True, text=True)
    assert res.returncode == 2
