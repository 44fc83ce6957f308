import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from turankit.cli import fmt_float, main
from turankit.polyeval import eval_q_quotient
from turankit.schemes import jacobi_scheme


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eval_legendre_p4_at_zero(capsys):
    code, out, _ = run(["eval", "--family", '{"family":"jacobi","alpha":0}', "--kind", "p",
                        "--x", "0", "--n", "4"], capsys)
    assert code == 0
    assert float(rows(out)[-1]["p"]) == 0.375


def test_eval_at_one_is_column_of_ones(capsys):
    _, out, _ = run(["eval", "--family", "jacobi:1.5", "--x", "1", "--n", "20"], capsys)
    assert np.allclose([float(r["p"]) for r in rows(out)], 1.0, rtol=1e-12)


def test_eval_q_matches_quotient(capsys):
    _, out, _ = run(["eval", "--family", "jacobi:0.3", "--kind", "q", "--x", "0.5", "--n", "10"], capsys)
    got = np.array([float(r["q"]) for r in rows(out)])
    assert got == pytest.approx(eval_q_quotient(jacobi_scheme(0.3), 10, 0.5).values, rel=1e-11)


@pytest.mark.parametrize("kind", ["p", "P", "q", "qtilde", "Q"])
def test_eval_all_kinds(kind, capsys):
    code, out, _ = run(["eval", "--family", "jacobi:0", "--kind", kind, "--x", "0.2,-0.4", "--n", "5"],
                       capsys)
    assert code == 0 and len(rows(out)) == 12


@pytest.mark.parametrize("args, code", [
    (["verify", "thm2", "--family", "jacobi:0"], 0),
    (["verify", "thm2", "--family", "jacobi:-0.75"], 2),
    (["verify", "fund", "--family", "remark28:0.05"], 0),
    (["verify", "thm2a", "--family", "jacobi:-0.75"], 1),
    (["verify", "thm2a", "--family", "jacobi:-0.75", "--constant", "derived"], 0),
    (["verify", "prop29", "--family", "jacobi:0"], 0),
    (["verify", "lb", "--family", "jacobi:1"], 0),
    (["verify", "thm41", "--family", "qultra:0.25,0.5", "--n-max", "50"], 0),
    (["verify", "cor12", "--family", "jacobi:2", "--n-max", "50"], 0),
    (["verify", "perturbed", "--family", "perturbed:0.6", "--n-max", "50"], 0),
    (["verify", "sandwich", "--family", "jacobi:0.5"], 0),
    (["verify", "positivity", "--family", "jacobi:-0.75"], 0),
    (["verify", "prop21", "--family", "jacobi:2"], 0),
    (["verify", "turanturan", "--family", "qultra:0.5,0.25"], 0),
])
def test_verify_exit_codes(args, code, capsys):
    assert run(args, capsys)[0] == code


@pytest.mark.parametrize("args", [
    ["verify", "thm2", "--family", "{bad json"],
    ["verify", "thm2", "--family", "nosuch:1"],
    ["verify", "cor12", "--family", "qultra:0.25,0.5"],
    ["verify", "thm2", "--family", "jacobi:0", "--n-max", "1"],
    ["verify", "thm2", "--family", "jacobi:0", "--grid", "2"],
    ["verify", "thm2", "--family", "jacobi:0", "--tol", "-1"],
    ["eval", "--family", "jacobi:0", "--x", "abc"],
])
def test_usage_errors(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 3 and "error" in err


def test_argparse_errors_use_usage_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nosuch", "--family", "jacobi:0"])
    assert exc.value.code == 3


def test_verify_json_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(["verify", "thm2", "--family", "jacobi:0", "--format", "json",
                           "--out", str(out)], capsys)
    assert code == 0 and "pass" in stdout
    rep = json.loads(out.read_text())
    assert rep["status"] == "pass" and rep["constant"]["value"] == pytest.approx(0.6)


def test_scan_shape(capsys):
    _, out, _ = run(["scan", "--family", "jacobi:0", "--n-max", "10", "--grid", "101"], capsys)
    lines = out.splitlines()
    assert lines[0] == "n,x,delta,normalized"
    assert len(lines) == 1 + 1010


def test_scan_staircase_row_is_nonmonotone(capsys):
    _, out, _ = run(["scan", "--family", "remark28:0.05", "--n-max", "3", "--grid", "401",
                     "--spacing", "uniform"], capsys)
    r = [(float(d["x"]), float(d["normalized"])) for d in rows(out) if d["n"] == "3"]
    f = np.array([v for x, v in r if 0 < x < 1])
    steps = np.sign(np.diff(f))
    assert (steps < 0).any() and (steps > 0).any()


def test_density_chebyshev_u(capsys):
    _, out, _ = run(["density", "--family", "constant:0.5", "--n", "40"], capsys)
    r = rows(out)
    x = np.array([float(d["x"]) for d in r])
    g = np.array([float(d["g"]) for d in r])
    assert list(r[0]) == ["x", "g", "g_2n", "bound"]
    assert np.max(np.abs(g - 2 / np.pi * np.sqrt(1 - x * x))) < 1e-12


def test_families_listing(capsys):
    code, out, _ = run(["families", "--format", "json"], capsys)
    assert code == 0 and "jacobi" in json.loads(out)


def test_output_is_byte_identical_across_thread_counts(tmp_path):
    outs = []
    for threads in ("1", "4"):
        path = tmp_path / f"scan{threads}.csv"
        subprocess.run([sys.executable, "-m", "turankit", "scan", "--family", "qultra:0.5,0.25",
                        "--n-max", "20", "--grid", "501", "--out", str(path)],
                       check=True, env={"TURANKIT_THREADS": threads, "PATH": ""})
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("v, text", [(0.375, "3.7500000000000000e-01"), (-0.0, "0.0000000000000000e+00"),
                                     (float("nan"), "nan"), (1 / 3, "3.3333333333333331e-01")])
def test_float_format(v, text):
    assert fmt_float(v) == text
