import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from ahg.cli import main, read_report


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def report(*argv):
    code, text = run(*argv)
    assert code == 0, text
    return read_report(text)


def model(models_dir, name):
    return str(models_dir / name)


def test_gale(models_dir):
    rep = report("gale", "--model", model(models_dir, "table2x2.json"))
    assert rep["snf_diagonal"] == [1, 1, 1]
    assert rep["gale"] in ([[1, -1, -1, 1]], [[-1, 1, 1, -1]])


def test_fiber_zero(models_dir):
    rep = report("fiber", "--model", model(models_dir, "zero.json"))
    assert rep["size"] == 1 and rep["points"] == [[0, 0, 0]]


def test_fiber_csv(models_dir):
    code, text = run("fiber", "--model", model(models_dir, "small.json"), "--format", "csv")
    assert code == 0
    assert text.split() == ["1,3,0", "2,1,1"]


def test_z_exact(models_dir):
    rep = report("z", "--model", model(models_dir, "small.json"))
    assert rep["Z"] == Fraction(2, 3) and rep["mode"] == "exact"


def test_moments_round_trip(models_dir):
    rep = report("moments", "--model", model(models_dir, "table2x2_odds.json"))
    D = 227713625
    assert rep["eta"] == [Fraction(x, D) for x in (6595942429, 1601748071, 1829461696, 903101804)]


def test_moments_float(models_dir):
    rep = report("moments", "--model", model(models_dir, "table2x2.json"), "--mode", "float")
    assert rep["eta"] == pytest.approx([27.75, 8.25, 9.25, 2.75], abs=1e-9)


def test_deterministic(models_dir):
    a = run("moments", "--model", model(models_dir, "table2x2_odds.json"), "--mode", "float")
    b = run("moments", "--model", model(models_dir, "table2x2_odds.json"), "--mode", "float")
    assert a == b


def test_polytope(models_dir):
    rep = report("polytope", "--model", model(models_dir, "small.json"))
    assert rep["dim"] == 1
    assert rep["newton_relint"] is False and rep["transportation_relint"] is True
    hull = report("polytope", "--model", model(models_dir, "table2x3.json"), "--coords", "0", "5")
    assert hull["hull"] == [[5, 0], [10, 0], [12, 2], [12, 7]]


def test_ips(models_dir):
    rep = report("ips", "--model", model(models_dir, "table2x2_odds.json"))
    assert rep["converged"] is True
    assert rep["m"] == pytest.approx([28.936572, 7.063428, 8.063428, 3.936572], abs=1e-5)


def test_mle(models_dir):
    rep = report("mle", "--model", model(models_dir, "ex4.json"), "--trace")
    assert rep["converged"] is True
    assert rep["eta_achieved"][4:] == pytest.approx([52, 6, 97], abs=1e-3)
    assert rep["trace"][0]["iteration"] == 0


def test_approx_z(models_dir):
    rep = report("approx-z", "--model", model(models_dir, "ex65.json"))
    assert rep["k"] == 9
    assert rep["exact_logZ"] == pytest.approx(-568.0127, abs=1e-3)
    assert rep["approx_logZ"] == pytest.approx(-569.8179, abs=5e-3)
    rep = report("approx-z", "--model", model(models_dir, "ex65.json"), "--k", "200", "--no-exact")
    assert rep["exact_logZ"] is None
    assert rep["approx_logZ"] == pytest.approx(-26598.9446, abs=5e-3)


def test_fd(models_dir):
    rep = report("fd", "--model", model(models_dir, "fd_example.json"))
    assert rep["F_D"] == Fraction(4781986125, 512)
    assert rep["member"] is True and rep["eta_member"] is True


def test_cap_from_environment(models_dir, monkeypatch):
    monkeypatch.setenv("AHG_FIBER_CAP", "10")
    code, text = run("fiber", "--model", model(models_dir, "table2x2.json"))
    assert code == 1
    assert json.loads(text)["error"] == "FiberTooLarge"


def test_domain_error(models_dir, tmp_path):
    f = tmp_path / "empty.json"
    f.write_text(json.dumps({"A": [[1, 1, 1], [0, 1, 2]], "beta": [1, 3], "p": [1, 1, 1]}))
    code, text = run("z", "--model", str(f))
    assert code == 1 and json.loads(text)["error"] == "EmptyFiber"
    f.write_text(json.dumps({"A": [[1, -1]], "beta": [0]}))
    code, text = run("z", "--model", str(f))
    assert code == 1 and json.loads(text)["error"] == "InvalidMatrix"


@pytest.mark.parametrize(
    "content",
    ["not json", json.dumps({"A": [[1, 1]], "beta": [2], "u": [1, 1]}), json.dumps({"beta": [1]})],
)
def test_usage_errors(tmp_path, content):
    f = tmp_path / "bad.json"
    f.write_text(content)
    code, text = run("z", "--model", str(f))
    assert code == 2
    assert json.loads(text)["error"] == "UsageError"


def test_missing_file_and_bad_command(tmp_path):
    assert run("z", "--model", str(tmp_path / "nope.json"))[0] == 2
    assert run("frobnicate", "--model", "x")[0] == 2
    assert run("ips", "--model", "x", "--max-iter", "0")[0] == 2


def test_console_entry_point(models_dir):
    res = subprocess.run(
        [sys.executable, "-m", "ahg.cli", "z", "--model", model(models_dir, "small.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["Z"] == "2/3"
