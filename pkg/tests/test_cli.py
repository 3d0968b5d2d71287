import json

import numpy as np
import pytest

from markov_opcalc import fixtures as fx
from markov_opcalc.cli import main, parse_symbol
from markov_opcalc.matrixcore import matrix_from_dict, matrix_to_dict


def _write(tmp_path, name, M):
    p = tmp_path / name
    p.write_text(json.dumps(matrix_to_dict(np.asarray(M, dtype=complex))))
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_selftest(capsys):
    code, rep = _run(capsys, ["selftest", "--seed", "7", "--trials", "3"])
    assert code == 0 and rep["ok"]
    assert rep["seed"] == 7 and rep["tool"] == "markov-opcalc"
    assert all(r["ok"] for r in rep["result"]["checks"])


def test_apply_jordan(tmp_path, capsys):
    m = _write(tmp_path, "j.json", fx.jordan(-1.0, 2))
    code, rep = _run(capsys, ["apply", "--symbol", "atoms:1,1", "--matrix", m])
    assert code == 0
    F = matrix_from_dict(rep["result"]["matrix"])
    assert np.allclose(F, [[-0.5, 0.25], [0, -0.5]], atol=1e-12)
    assert "refused" in rep["result"]["oracle_differences"]["eig"]
    assert rep["certificates"][0]["kind"] == "V0b"


def test_apply_writes_out(tmp_path, capsys):
    m = _write(tmp_path, "d.json", np.diag([-1.0, -2.0]))
    out = tmp_path / "r.json"
    assert main(["apply", "--symbol", "example1a:0.5,1", "--matrix", m, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ok"] and rep["orders"]["used"] >= 1


def test_malformed_json_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["apply", "--symbol", "example1a", "--matrix", str(p)]) == 2
    assert "malformed" in capsys.readouterr().err


def test_bad_symbol_exit_2(tmp_path):
    m = _write(tmp_path, "d.json", np.diag([-1.0]))
    assert main(["apply", "--symbol", "nosuch:1", "--matrix", m]) == 2
    assert main(["apply", "--symbol", "atoms:1,x", "--matrix", m]) == 2


def test_spectrum_on_support_exit_2(tmp_path):
    m = _write(tmp_path, "d.json", np.diag([0.5]))
    assert main(["apply", "--symbol", "example1a:0.5,1", "--matrix", m]) == 2


def test_argparse_error_exit_2():
    assert main(["apply", "--oracle", "bogus"]) == 2
    assert main([]) == 2


def test_fixtures_command(tmp_path):
    out = tmp_path / "f.json"
    assert main(["fixtures", "--kind", "diag", "--params", '{"values": [-1, -2]}',
                 "--out", str(out)]) == 0
    assert out.read_text() == fx.dumps(fx.make_fixture("diag", {"values": [-1, -2]}, 0))
    assert main(["fixtures", "--kind", "diag", "--params", "[1]"]) == 2
    assert main(["fixtures", "--kind", "jordan", "--params", '{"size": 0}']) == 2


def test_certify(tmp_path, capsys):
    m = _write(tmp_path, "d.json", np.diag([3.0]))
    code, rep = _run(capsys, ["certify", "--matrix", m, "--interval", "0,1"])
    assert code == 0 and rep["result"]["certificate"]["M_A"] == pytest.approx(0.5, rel=1e-5)


@pytest.mark.parametrize("bound", ["thm1", "thm2", "thm3"])
def test_perturb_pair(tmp_path, capsys, bound):
    a = _write(tmp_path, "a.json", np.diag([-1.0, -2.0]))
    b = _write(tmp_path, "b.json", np.diag([-1.1, -2.0]))
    code, rep = _run(capsys, ["perturb", "--symbol", "example1a", "--A", a, "--B", b,
                              "--bound", bound, "--ideal", "trace"])
    assert code == 0 and rep["result"]["reports"][0]["holds"]


def test_perturb_thm2_precondition_exit_2(tmp_path, rng):
    a = _write(tmp_path, "a.json", fx.random_normal(3, rng))
    b = _write(tmp_path, "b.json", fx.random_normal(3, rng))
    assert main(["perturb", "--symbol", "example1a", "--A", a, "--B", b, "--bound", "thm2"]) == 2


def test_perturb_suite(capsys):
    code, rep = _run(capsys, ["perturb", "--suite", "--trials", "4", "--seed", "3"])
    assert code == 0
    assert set(rep["result"]["suite"]) == {"thm1", "thm3", "cor1", "cor2", "cor4"}


def test_frechet_fd(tmp_path, capsys, rng):
    a = _write(tmp_path, "a.json", fx.random_normal(3, rng))
    b = _write(tmp_path, "b.json", rng.standard_normal((3, 3)))
    code, rep = _run(capsys, ["frechet", "--symbol", "example1b:0.5,1", "--A", a,
                              "--direction", b, "--fd-check"])
    assert code == 0 and rep["result"]["fd_check"]["slope"] >= 1.9


def test_taylor_radius_exit_2(tmp_path, capsys):
    a = _write(tmp_path, "a.json", np.diag([-0.5]))
    b = _write(tmp_path, "b.json", np.diag([1.0]))
    assert main(["taylor", "--symbol", "example1a", "--A", a, "--B", b, "--z", "0.6,0"]) == 2
    code, rep = _run(capsys, ["taylor", "--symbol", "example1a", "--A", a, "--B", b,
                              "--z", "0.2,0.1"])
    assert code == 0 and rep["result"]["direct_difference"] < 1e-9


def test_trace_shift_csv(tmp_path, capsys):
    a = _write(tmp_path, "a.json", np.diag([-1.0, -3.0]))
    b = _write(tmp_path, "b.json", np.diag([-2.0, -3.0]))
    csv_path = tmp_path / "xi.csv"
    code, rep = _run(capsys, ["trace-shift", "--symbol", "atoms:1.5,1@1,2", "--A", a, "--B", b,
                              "--csv", str(csv_path)])
    assert code == 0 and rep["result"]["agree"]
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "re_z,im_z,re_xi,im_xi"
    assert len(lines) == rep["orders"]["contour_nodes"] + 1


def test_trace_shift_bad_contour(tmp_path):
    a = _write(tmp_path, "a.json", np.diag([-1.0]))
    assert main(["trace-shift", "--symbol", "example1a", "--A", a, "--B", a,
                 "--contour", "triangle:1"]) == 2


def test_parse_symbol_json_file(tmp_path):
    from markov_opcalc.symbols import example1b
    p = tmp_path / "s.json"
    p.write_text(json.dumps(example1b(0.25, 2.0).to_dict()))
    f = parse_symbol(str(p))
    assert f.interval == (0.0, 2.0)
