import json
import subprocess
import sys

import pytest

from triagg import io
from triagg.cli import main
from triagg.strassen import strassen


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_and_verify_strassen(tmp_path, capsys):
    f = tmp_path / "s.json"
    code, out, _ = run(capsys, "gen", "--family", "strassen", "-o", f)
    assert code == 0 and json.loads(out)["t"] == 7
    for mode in ("exact", "brent", "random", "multiply"):
        code, out, _ = run(capsys, "verify", f, "--mode", mode)
        rep = json.loads(out)
        assert code == 0 and rep["result"] is True and rep["mode"] == mode
        assert "seconds" not in rep


def test_gen_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "--family", "new25", "--n0", 6)
    assert code == 0
    alg = io.parse(out)
    assert alg.t == 276 and alg.factored


def test_verify_failure_exit_code(tmp_path, capsys):
    S = strassen()
    doc = io.to_document(S)
    doc["U"][0][2] = "-1"
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", f, "--mode", "exact")
    assert code == 1 and json.loads(out)["result"] is False


def test_error_exit_codes(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--family", "new25", "--n0", 16)
    assert code == 4 and json.loads(err)["error"]
    code, _, err = run(capsys, "verify", tmp_path / "missing.json")
    assert code == 3 and json.loads(err)["error"] == "format"
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and json.loads(err)["error"] == "usage"
    f = tmp_path / "n.json"
    run(capsys, "gen", "--family", "new25", "--n0", 20, "-o", f)
    code, _, err = run(capsys, "verify", f, "--mode", "exact", "--budget", 100)
    assert code == 5 and json.loads(err)["error"] == "budget"


def test_files_and_reports_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--family", "new25", "--n0", 8, "-o", a)
    run(capsys, "gen", "--family", "new25", "--n0", 8, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    ra, rb = tmp_path / "ra.json", tmp_path / "rb.json"
    run(capsys, "verify", a, "--seed", 7, "--trials", 3, "--report", ra)
    run(capsys, "verify", b, "--seed", 7, "--trials", 3, "--report", rb)
    assert ra.read_bytes() == rb.read_bytes()
    wa, wb = tmp_path / "wa.json", tmp_path / "wb.json"
    run(capsys, "verify", a, "--seed", 7, "--trials", 3, "--write", wa)
    run(capsys, "verify", b, "--seed", 7, "--trials", 3, "--write", wb)
    assert wa.read_bytes() == wb.read_bytes()
    assert io.load(wa).verified["seed"] == 7


def test_export_import_roundtrip(tmp_path, capsys):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    run(capsys, "gen", "--family", "pan", "--n0", 6, "-o", a)
    assert run(capsys, "export", a, "-o", b)[0] == 0
    assert run(capsys, "import", b, "-o", c)[0] == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--bases", "44", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["ranks"][0]["t_new"] == 36110
    assert doc["optimal"]["new25"] == [44, 2.773203]
    code, out, _ = run(capsys, "analyze", "--bases", "44", "--coefficients", "20", "--json")
    coef = json.loads(out)["coefficients"][0]
    assert code == 0 and coef["q_W"] == 13189 and abs(coef["c"] - 8.418079) < 1e-6


def test_new25b_summary(tmp_path, capsys, replacement48):
    rep = tmp_path / "r.json"
    io.save(replacement48, rep)
    code, out, _ = run(capsys, "gen", "--family", "new25b", "--n0", 44, "--subst", rep, "-o", tmp_path / "c.json")
    s = json.loads(out)
    assert code == 0 and s["t"] == 1303676064 and s["blocks"] == 256036


def test_transforms_and_multiply(tmp_path, capsys):
    s = tmp_path / "s.json"
    run(capsys, "gen", "--family", "strassen", "-o", s)
    for cmd in (["compose", s, s], ["rotate", s], ["symmetrize", s], ["degroote", s, "--K", "[[1,1],[0,1]]"]):
        out = tmp_path / "o.json"
        assert run(capsys, *cmd, "-o", out)[0] == 0
        assert run(capsys, "verify", out, "--mode", "exact")[0] == 0
    code, out, _ = run(capsys, "multiply", s, "--levels", 3)
    assert code == 0 and json.loads(out)["matches_naive"] is True


def test_merge_kin(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--family", "pan", "--n0", 8, "-o", a)
    assert run(capsys, "merge-kin", a, "--targeted", "-o", b)[0] == 0
    alg = io.load(b)
    assert alg.t == io.load(a).t - 5


@pytest.mark.slow
def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "triagg", "gen", "--family", "strassen"], capture_output=True, text=True)
    assert res.returncode == 0 and io.parse(res.stdout).t == 7
