import json
import subprocess
import sys

import pytest

from roam.cli import main
from roam.instance import save_instance


@pytest.fixture
def four_file(tmp_path, four):
    path = tmp_path / "four.json"
    save_instance(four, path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out


def test_solve(capsys, four_file):
    code, out = run(capsys, "solve", "--instance", four_file)
    assert code == 0
    data = json.loads(out.out)
    assert data["assortment"] == [0, 2, 4]
    assert data["value"] == pytest.approx(36.0)
    code, out = run(capsys, "solve", "--instance", four_file, "--method", "brute")
    assert json.loads(out.out)["method"] == "brute"


def test_eval(capsys, four_file):
    code, out = run(capsys, "eval", "--instance", four_file, "--assortment", "0,4")
    assert json.loads(out.out)["value"] == pytest.approx(30.0)
    code, out = run(capsys, "eval", "--instance", four_file, "--assortment", "4", "--best")
    data = json.loads(out.out)
    assert data["kind"] == "best" and data["assortment"] == [0, 4]


def test_pareto(capsys, four_file):
    code, out = run(capsys, "pareto", "--instance", four_file, "--grid", "5")
    pts = json.loads(out.out)
    assert pts[-1]["worst"] == pytest.approx(36.0)


def test_gen_and_min_eta(capsys, tmp_path):
    path = str(tmp_path / "g.json")
    code, out = run(capsys, "gen", "--kind", "nested", "--n", "5", "--m", "3", "--k", "6", "--seed", "4", "-o", path)
    assert code == 0 and json.loads(out.out)["M"] == 3
    code, out = run(capsys, "min-eta", "--instance", path)
    assert json.loads(out.out)["min_eta"] == pytest.approx(0.0, abs=1e-9)


def test_oracle(capsys, four_file):
    code, out = run(capsys, "oracle", "--instance", four_file)
    assert code == 0
    assert json.loads(out.out)["passed"]


def test_experiment(capsys, tmp_path):
    path = str(tmp_path / "e.csv")
    code, out = run(capsys, "experiment", "--name", "fig1_2", "--reps", "3", "-o", path)
    assert code == 0 and json.loads(out.out)["rows"] == 3


def test_relabeled_input_keeps_file_labels(capsys, tmp_path):
    raw = {
        "n": 3,
        "revenues": [30, 10, 20],
        "past_assortments": [[0, 1, 2, 3]],
        "sales": [{"assortment": 0, "freq": {"0": 0.1, "1": 0.2, "2": 0.3, "3": 0.4}}],
        "eta": 0,
        "norm": "linf",
    }
    path = tmp_path / "r.json"
    path.write_text(json.dumps(raw))
    code, out = run(capsys, "eval", "--instance", str(path), "--assortment", "0,1")
    assert json.loads(out.out)["assortment"] == [0, 1]
    code, out = run(capsys, "eval", "--instance", str(path), "--assortment", "0,9")
    assert code == 2 and "unknown product" in out.err


def test_errors_exit_with_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1}')
    code, out = run(capsys, "solve", "--instance", str(bad))
    assert code == 2
    assert out.err.startswith("roam:")
    code, out = run(capsys, "solve", "--instance", str(tmp_path / "missing.json"))
    assert code == 2


def test_console_module_runs(four_file):
    proc = subprocess.run([sys.executable, "-m", "roam.cli", "solve", "--instance", four_file],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["assortment"] == [0, 2, 4]
