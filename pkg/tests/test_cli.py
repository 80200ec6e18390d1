import json
import math

import numpy as np
import pytest

from proxcenter.cli import EXIT_CAP, EXIT_ERROR, EXIT_OK, main
from proxcenter.problem import load_problem
from proxcenter.runs import read_trace


@pytest.fixture
def kkt_file(tmp_path):
    path = tmp_path / "kkt.json"
    assert main(["generate", "--family", "kkt", "--m", "4", "--M", "2", "--n1", "2", "--seed", "3",
                 "--out", str(path)]) == EXIT_OK
    return path


def test_generate_writes_a_loadable_instance(kkt_file):
    p, doc = load_problem(kkt_file)
    assert p.dims == [4, 4] and p.n_eq == 2
    assert doc["spec"]["family"] == "kkt" and doc["spec"]["seed"] == 3
    assert "known_optimum" in doc


@pytest.mark.parametrize("family,extra", [("random", []), ("network", ["--n2", "2"]), ("mpc", ["--horizon", "2"])])
def test_generate_each_family(tmp_path, family, extra):
    path = tmp_path / f"{family}.json"
    assert main(["generate", "--family", family, "--m", "3", "--M", "2", "--n1", "1", *extra, "--out", str(path)]) == 0
    load_problem(path)


def test_solve_pcm_prints_a_certificate(kkt_file, tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    assert main(["solve", str(kkt_file), "--eps", "0.01", "--trace", str(trace)]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "certified" and out["gap_surrogate"] <= 0.01
    _, doc = load_problem(kkt_file)
    rho = float(np.linalg.norm(doc["known_optimum"]["multiplier"]))
    err = out["objective"] - out["known_optimum"]
    assert -rho * math.hypot(out["eq_violation"], out["ineq_violation"]) - 1e-10 <= err <= out["gap_surrogate"]
    assert read_trace(trace)[-1]["k"] == out["iterations"] - 1


def test_solve_variants(kkt_file, capsys):
    for flags in (["--variant", "xbar", "--exact-dual"], ["--q", "ball:5"]):
        assert main(["solve", str(kkt_file), "--eps", "0.05", *flags]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["status"] == "certified"
    assert main(["solve", str(kkt_file), "--eps", "0.05", "--q", "ball:0.1", "--adaptive-radius"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["restarts"] >= 1


def test_solve_cap_exit_code(kkt_file):
    assert main(["solve", str(kkt_file), "--eps", "1e-5", "--max-iter", "20"]) == EXIT_CAP
    assert main(["solve", str(kkt_file), "--method", "dsm", "--max-iter", "20"]) == EXIT_CAP


def test_solve_dsm_early_stop(kkt_file, capsys):
    assert main(["solve", str(kkt_file), "--method", "dsm", "--eps", "0.3", "--max-iter", "50000",
                 "--step-rule", "diminishing"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["method"] == "dsm"


def test_errors_exit_one(kkt_file, tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.json")]) == EXIT_ERROR
    assert main(["solve", str(kkt_file), "--q", "orthant"]) == EXIT_ERROR
    assert main(["solve", str(kkt_file), "--q", "box"]) == EXIT_ERROR
    assert main(["solve", str(kkt_file), "--eps", "-1"]) == EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_verify(kkt_file, capsys):
    assert main(["verify", str(kkt_file)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_bench(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--grid", "3:2:0.1", "--n1", "2", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == capsys.readouterr().out
    assert main(["bench", "--grid", "0:2:0.1"]) == EXIT_ERROR
    assert main(["bench", "--grid", "3:2"]) == EXIT_ERROR
