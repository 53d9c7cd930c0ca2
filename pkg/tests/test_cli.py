import csv
import io
import json
import subprocess
import sys

import pytest

from flexmatch.cli import run_cli
from flexmatch.variational import eta_pair


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "--budget", "0.6", "--alpha", "1", "--alpha-f", "5")
    assert code == 0
    data = json.loads(out)
    e = eta_pair(0.6, 1.0, 5.0)
    assert data["eta_os"] == e.eta_os and data["eta_ts"] == e.eta_ts and data["adv_os"] == e.adv_os
    assert set(data["t_star"]) == {"os", "ts"} and data["verdict"] == "TS"
    assert data["config"]["seed"] == 0 and data["config"]["budget"] == 0.6


def test_eval_custom_and_degenerate(capsys):
    code, out, _ = run(capsys, "eval", "--budget", "0.6", "--alpha", "1", "--alpha-f", "5", "--side", "custom:0.2,0.4")
    assert code == 0 and "custom" in json.loads(out)
    code, out, _ = run(capsys, "eval", "--budget", "0.5", "--alpha", "0", "--alpha-f", "0")
    data = json.loads(out)
    assert code == 0 and data["adv_os"] is None and data["eta_ts"] == 0.0


@pytest.mark.parametrize("argv", [
    ("eval", "--budget", "0.5", "--alpha", "2", "--alpha-f", "1"),
    ("eval", "--alpha", "1", "--alpha-f", "2"),
    ("eval", "--budget", "1.5", "--alpha", "1", "--alpha-f", "2"),
    ("simulate", "--budget", "0.5", "--alpha", "1", "--alpha-f", "2", "--side", "sideways"),
    ("limits", "--budget", "1.0", "--alpha", "0.5"),
    ("validate", "--only", "12"),
    ("nonsense",),
])
def test_parameter_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--budget", "0.6", "--alpha", "0", "--alpha-f", "2.5", "--side", "one",
                       "--n", "2000", "--trials", "3", "--seed", "7")
    data = json.loads(out)
    assert code == 0 and data["config"]["seed"] == 7
    assert set(data) >= {"mean", "std_err", "formula", "abs_gap"}
    assert data["abs_gap"] == abs(data["mean"] - data["formula"]) and data["abs_gap"] < 0.03


def test_csv_output_with_sidecar(capsys, tmp_path):
    out_path = tmp_path / "sim.csv"
    code, _, _ = run(capsys, "simulate", "--budget", "0.5", "--alpha", "0.5", "--alpha-f", "2", "--n", "500",
                     "--trials", "2", "--format", "csv", "--out", str(out_path))
    assert code == 0
    [row] = list(csv.DictReader(out_path.read_text().splitlines()))
    meta = json.loads((tmp_path / "sim.csv.meta.json").read_text())
    assert meta["seed"] == 0 and meta["n"] == 500
    assert abs(float(row["mean"]) - float(row["formula"])) == pytest.approx(float(row["abs_gap"]), abs=1e-15)


def test_sweep_csv(capsys):
    code, out, err = run(capsys, "sweep", "--budgets", "0.5,1.0", "--alpha-grid", "0.5:1:2", "--alpha-f-grid", "1:3:2",
                         "--grid-n", "51")
    assert code == 0 and err.startswith("# config ")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["budget", "alpha", "alpha_f", "eta_os", "eta_ts", "adv_os", "verdict", "fmz_admissible"]
    assert len(rows) == 1 + 2 * 4
    assert all(r[6] != "TS" for r in rows[1:] if r[0] == "1")


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--budget", "0.5", "--alpha-grid", "0.5:1:2", "--alpha-f-grid", "1:3:2",
                       "--grid-n", "51", "--format", "json")
    data = json.loads(out)
    assert code == 0 and len(data["cells"]) == 4 and data["config"]["seed"] == 0


def test_limits_and_bounds(capsys):
    code, out, _ = run(capsys, "limits", "--budget", "0.5", "--alpha", "1")
    data = json.loads(out)
    assert code == 0 and data["u_os"] > 0 and data["y_star"] is not None and data["z"] is not None
    code, out, _ = run(capsys, "limits", "--budget", "0.5", "--alpha", "3")
    data = json.loads(out)
    assert code == 0 and data["u_ts"] == 0.0 and data["y_star"] is None
    code, out, _ = run(capsys, "bounds", "--budget", "0.5", "--alpha", "0.05", "--alpha-f", "40")
    data = json.loads(out)
    assert code == 0 and data["u_fmz"] == 1 - 0.5 * 2.718281828459045 ** -0.1 and data["admissible"] is True


def test_rde(capsys, tmp_path):
    pop = tmp_path / "pop.txt"
    code, out, _ = run(capsys, "rde", "--budget", "0.6", "--alpha", "0", "--alpha-f", "2.5", "--pop-size", "5000",
                       "--iters", "50", "--root-samples", "50000", "--dump-pop", str(pop))
    data = json.loads(out)
    assert code == 0 and data["abs_gap"] < 0.02 and pop.exists()


def test_validate_single_criterion(capsys, tmp_path):
    report = tmp_path / "v.json"
    code, out, _ = run(capsys, "validate", "--only", "3", "--out", str(report))
    assert code == 0 and out.startswith("[PASS]") and " 3. " in out
    assert json.loads(report.read_text())["results"][0]["passed"] is True


def test_json_round_trip(capsys, tmp_path):
    path = tmp_path / "e.json"
    run(capsys, "eval", "--budget", "0.3", "--alpha", "0.5", "--alpha-f", "4", "--out", str(path))
    first = json.loads(path.read_text())
    cfg = first["config"]
    code, out, _ = run(capsys, "eval", "--budget", str(cfg["budget"]), "--alpha", str(cfg["alpha"]),
                       "--alpha-f", str(cfg["alpha_f"]), "--grid-n", str(cfg["grid_n"]))
    second = json.loads(out)
    first["config"].pop("out")
    second["config"].pop("out")
    assert second == first


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "flexmatch", "eval", "--alpha", "2", "--alpha-f", "1",
                          "--budget", "0.5"], capture_output=True, text=True)
    assert res.returncode == 2 and "parameter error" in res.stderr
