import csv
import io
import json
import math
import subprocess
import sys

import pytest

from freeaw.aw_functional import power_kernel_closed_form
from freeaw.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    return meta, list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_eval_power_kernel(capsys):
    code, out, _ = run(capsys, "eval", "--a", "0.3", "--b", "0.4", "--c", "0.5", "--kernel", "power:0.2:1")
    assert code == 0
    rec = json.loads(out)
    assert rec["value_re"] == pytest.approx(power_kernel_closed_form((0.3, 0.4, 0.5), 0.2).real, rel=1e-12)
    assert rec["meta"]["tool"] == "freeaw" and rec["meta"]["command"] == "eval"


def test_eval_constant_polynomial(capsys):
    code, out, _ = run(capsys, "eval", "--a", "0.3+0.2j", "--b", "0.3-0.2j", "--kernel", "cheb:1", "--method", "contour")
    assert code == 0
    assert json.loads(out)["value_re"] == pytest.approx(1.0, abs=1e-12)


def test_eval_invalid_kernel_domain(capsys):
    code, out, err = run(capsys, "eval", "--a", "2.0", "--kernel", "power:0.6:1")
    assert code == 2 and out == ""
    rec = json.loads(err)
    assert rec["command"] == "eval" and rec["error"] == "DomainError"


def test_eval_bad_kernel_spec(capsys):
    code, _, err = run(capsys, "eval", "--a", "0.3", "--kernel", "bogus:1")
    assert code == 2
    assert "reason" in json.loads(err)


@pytest.mark.parametrize("suite", ["reduction", "closed-form"])
def test_check_suites_pass(capsys, suite):
    code, out, err = run(capsys, "check", suite, "--trials", "10")
    assert code == 0
    _, rows = read_csv(out)
    assert rows and all(r["status"] == "PASS" for r in rows)
    assert "passed" in err


def test_check_swap_depth_three(capsys):
    code, out, _ = run(capsys, "check", "swap", "--d", "3", "--trials", "2")
    assert code == 0


def test_phase_diagram_csv(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--a", "0.4", "--N", "100", "--c1", "0.5,2", "--c2", "0.5,2")
    assert code == 0
    meta, rows = read_csv(out)
    assert meta["params"]["N"] == 100
    regions = {(float(r["c1"]), float(r["c2"])): r["region"] for r in rows}
    assert regions == {
        (0.5, 0.5): "MaxCurrent",
        (0.5, 2.0): "HighDensity",
        (2.0, 0.5): "LowDensity",
        (2.0, 2.0): "Coexistence",
    }
    coex = next(r for r in rows if r["region"] == "Coexistence")
    assert float(coex["rho_low"]) == pytest.approx(0.25) and float(coex["rho_high"]) == pytest.approx(4.0)
    assert coex["rho_predicted"] == ""


def test_phase_diagram_range_grid(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--N", "20", "--c1", "0.2:1.8:3", "--c2", "0.5")
    _, rows = read_csv(out)
    assert code == 0 and [float(r["c1"]) for r in rows] == pytest.approx([0.2, 1.0, 1.8])


def test_phase_diagram_rejects_grid_outside_range(capsys):
    code, _, _ = run(capsys, "phase-diagram", "--a", "0.4", "--c1", "3.0", "--c2", "0.5")
    assert code == 2


def test_phase_diagram_thread_independent(capsys, monkeypatch):
    args = ["phase-diagram", "--N", "30", "--c1", "0.5,1.5", "--c2", "0.5,1.5"]
    monkeypatch.setenv("FREEAW_THREADS", "1")
    _, one, _ = run(capsys, *args)
    monkeypatch.setenv("FREEAW_THREADS", "3")
    _, three, _ = run(capsys, *args)
    assert one == three


def test_simulate_reproducible(capsys):
    args = ["simulate", "--N", "1", "--a", "0.5", "--c1", "0.5", "--c2", "0.5", "--samples", "20000", "--cap", "20", "--seed", "3"]
    code, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert code == 0 and first == second
    assert json.loads(first)["tv"] < 0.03


def test_poisson_and_series(capsys):
    code, out, _ = run(capsys, "poisson", "--scaling", "b", "--lambda", "2", "--t", "1.2", "--N", "2000")
    rec = json.loads(out)
    assert code == 0 and rec["rel_dev"] < 0.02
    code, out, _ = run(capsys, "series", "--z", "0.05", "--t", "1", "--a", "0.3", "--c1", "0.5", "--c2", "0.4")
    assert code == 0 and json.loads(out)["rel_err"] < 1e-8


def test_laplace(capsys):
    code, out, _ = run(capsys, "laplace", "--a", "0.4", "--c1", "0.5", "--c2", "0.5", "--N", "100")
    rec = json.loads(out)
    assert code == 0 and rec["region"] == "MaxCurrent"
    assert rec["limit"] == pytest.approx(math.exp(4 / 3))


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "series", "--z", "0.01", "--t", "1", "--a", "0.3", "--c1", "0.5", "--c2", "0.4", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["terms"] == 60


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "freeaw", "eval", "--a", "0.3", "--kernel", "cheb:1"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value_re"] == pytest.approx(1.0)
