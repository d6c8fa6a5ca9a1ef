import csv
import io
import json
import subprocess
import sys

import pytest

from homdb.cli import EXIT_CONFIG, EXIT_OK, EXIT_PRECONDITION, EXIT_TOLERANCE, main, parse_grid

PW = ["--p", "0", "--P", "1,0,1", "--psi", "0"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid_order():
    z = parse_grid("0:1:2x0:2:3")
    assert list(z) == [0, 1, 1j, 1 + 1j, 2j, 1 + 2j]


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", *PW, "--grid", "0:3:4x0:0:1")
    assert code == EXIT_OK
    r = rows(out)
    assert len(r) == 4
    assert float(r[0]["re_A"]) == 1.0 and float(r[0]["re_B"]) == 0.0
    assert all(float(x["backend_residual"]) < 1e-12 for x in r)


def test_kernel(capsys):
    code, out, _ = run(capsys, "kernel", *PW, "--grid", "0:0:1x0:0:1")
    assert code == EXIT_OK
    assert float(rows(out)[0]["re_K"]) == pytest.approx(1.0, rel=1e-12)


def test_hamiltonian(capsys):
    code, out, _ = run(capsys, "hamiltonian", "--p", "1", "--P", "1,0,1", "--psi", "0", "--grid", "2:2:1x0:0:1")
    assert code == EXIT_OK
    r = rows(out)[0]
    assert (float(r["h11"]), float(r["h12"]), float(r["h22"])) == (4.0, 0.0, 0.25)
    code, _, _ = run(capsys, "hamiltonian", *PW, "--grid=-1:1:3x0:0:1")
    assert code == EXIT_PRECONDITION


def test_measure_forward_and_inverse(capsys):
    code, out, _ = run(capsys, "measure", *PW)
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec == {"exponent": 0.0, "mu_minus": pytest.approx(1.0), "mu_plus": pytest.approx(1.0)}
    code, out, _ = run(capsys, "measure", "--p", "0.5", "--mu-plus", "2", "--mu-minus", "0.5")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["params"]["P"][0] == 1.0 and rec["generator"]["P"][0] == 2.0


def test_canonicalize_identity_on_canonical_input(capsys):
    code, out, _ = run(capsys, "canonicalize", *PW)
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["approx"] == rec["input"] == rec["simeq"]


def test_weyl(capsys):
    code, out, _ = run(capsys, "weyl", *PW, "--grid", "0:1:2x1:1:1")
    assert code == EXIT_OK
    for r in rows(out):
        assert float(r["im_qH"]) == pytest.approx(1.0, abs=1e-9)
        assert float(r["im_qEC"]) == pytest.approx(1.0, abs=1e-9)
    code, _, _ = run(capsys, "weyl", *PW, "--grid", "0:1:2x0:0:1")
    assert code == EXIT_PRECONDITION


def test_crosscheck_pass_and_breach(capsys):
    code, out, _ = run(capsys, "crosscheck", "--p", "0.7", "--P", "1.3,0.4,0.8", "--psi", "-1.2")
    assert code == EXIT_OK
    rec = json.loads(out)
    assert rec["pass"] and rec["points"] == 121
    code, out, _ = run(capsys, "crosscheck", *PW, "--tol", "1e-30")
    assert code == EXIT_TOLERANCE
    assert json.loads(out)["pass"] is False


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"p": 0, "P": [1, 0, 1], "psi": 0, "w": "1j"}))
    code, out, _ = run(capsys, "kernel", "--config", str(cfg), "--grid", "0:0:1x1:1:1")
    assert code == EXIT_OK
    base = rows(out)[0]
    assert float(base["im_w"]) == 1.0
    code, out, _ = run(capsys, "measure", "--config", str(cfg), "--P", "1,0,4")
    assert json.loads(out)["mu_plus"] != pytest.approx(1.0)


@pytest.mark.parametrize("argv", [
    ["eval"],
    ["eval", "--p", "0", "--P", "1,2", "--psi", "0"],
    ["eval", *PW, "--grid", "0:1x0:1:1"],
    ["eval", "--p", "zero", "--P", "1,0,1", "--psi", "0"],
    ["eval", "--config", "/nonexistent.json"],
    ["frobnicate"],
])
def test_config_errors(capsys, argv):
    assert main(argv) == EXIT_CONFIG


def test_malformed_config_file(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["eval", "--config", str(cfg)]) == EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


def test_precondition_exit(capsys):
    code, _, err = run(capsys, "measure", "--p", "1", "--P", "1,1,1", "--psi", "2")
    assert code == EXIT_PRECONDITION and "precondition" in err


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["eval", "--p", "0.3", "--P", "1,0.2,0.7", "--psi", "1.1", "--grid=-3:3:7x-1:1:3"]
    assert main([*args, "--out", str(a)]) == EXIT_OK
    assert main([*args, "--out", str(b)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 22


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "homdb", "measure", *PW], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["exponent"] == 0.0
