import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from celer_lasso import (DesignMatrix, LassoProblem, dual_value, lambda_max, preprocess,
                         primal_value, synthesize)
import oracles
from celer_lasso.cli import (EXIT_GAP, EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main, parse_synthetic,
                             verify_solution)

SYN = ["--synthetic", "n=60,p=400,s=8"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_certified_and_recomputable(tmp_path, capsys):
    out_file = tmp_path / "sol.json"
    code, out, _ = run(["solve", "--synthetic", "n=100,p=2000,s=20", "--lambda-ratio", "0.05",
                        "--solver", "celer", "--eps", "1e-6", "--out", str(out_file),
                        "--verify"], capsys)
    assert code == EXIT_OK
    summary = json_lines(out)[0]
    assert summary["gap"] <= 1e-6
    payload = json.loads(out_file.read_text())
    # recompute from the saved pair on the same preprocessed data
    X, y, _ = synthesize(100, 2000, 20, seed=0)
    X, y, _ = preprocess(X, y, min_nnz=3, unit_norm_cols=True, center_y=True, unit_norm_y=True)
    prob = LassoProblem(X, y, 0.05 * lambda_max(X, y))
    beta = np.zeros(payload["beta"]["n_features"])
    beta[payload["beta"]["indices"]] = payload["beta"]["values"]
    gap = primal_value(prob, beta) - dual_value(prob, np.array(payload["theta"]))
    assert abs(gap - payload["gap"]) <= 1e-12
    assert payload["support_size"] == np.count_nonzero(beta)


def test_ratio_one_gives_zero(capsys):
    code, out, _ = run(["solve", *SYN, "--lambda-ratio", "1.0"], capsys)
    assert code == EXIT_OK
    res = json_lines(out)[0]
    assert res["support_size"] == 0 and res["gap"] == 0.0


@pytest.mark.parametrize("argv", [
    ["solve", "--data", "/nonexistent/file.svm"],
    ["solve", "--csv", "/nonexistent/file.csv"],
    ["solve", "--synthetic", "n=10,p=5"],
    ["solve", "--synthetic", "n=ten,p=5,s=2"],
    ["solve", *SYN, "--lambda-ratio", "0"],
    ["solve", *SYN, "--lambda", "-1"],
    ["solve", *SYN, "--growth", "cubic"],
    ["sweep", *SYN, "--sweep", "mu=1,2"],
    ["sweep", *SYN, "--sweep", "K="],
])
def test_input_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_INPUT
    assert "error" in err


def test_malformed_svmlight_names_line(tmp_path, capsys):
    path = tmp_path / "bad.svm"
    path.write_text("1 1:1 2:2\n1 3:1 2:1\n")
    code, _, err = run(["solve", "--data", str(path)], capsys)
    assert code == EXIT_INPUT
    assert "line 2" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2


def test_gap_not_met_exit_1(capsys):
    code, out, _ = run(["solve", *SYN, "--solver", "cd", "--eps", "1e-14",
                        "--max-epochs", "3"], capsys)
    assert code == EXIT_GAP
    assert json_lines(out)[0]["stop_reason"] == "max-epochs"


def test_verify_detects_tampering(tmp_path):
    X = DesignMatrix(np.eye(2))
    prob = LassoProblem(X, np.array([3.0, 1.0]), 2.0)
    payload = {"beta": {"indices": [0], "values": [1.0], "n_features": 2},
               "theta": [1.0, 0.5], "gap": 0.0, "support_size": 1}
    assert verify_solution(prob, payload) == []
    assert verify_solution(prob, dict(payload, gap=1e-9))
    assert verify_solution(prob, dict(payload, support_size=2))
    assert verify_solution(prob, dict(payload, theta=[3.0, 0.0]))


def test_verify_exit_code(tmp_path, capsys, monkeypatch):
    import celer_lasso.cli as cli
    monkeypatch.setattr(cli, "verify_solution", lambda prob, payload: ["forced mismatch"])
    code, _, err = run(["solve", *SYN, "--verify"], capsys)
    assert code == EXIT_VERIFY
    assert "forced mismatch" in err


@pytest.mark.parametrize("solver", ["cd", "ista"])
def test_inner_trace_schema(tmp_path, capsys, solver):
    trace = tmp_path / "t.csv"
    code, _, _ = run(["solve", *SYN, "--solver", solver, "--screen", "--eps", "1e-5",
                      "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    rows = read_csv(trace)
    assert list(rows[0]) == ["epoch", "gap_res", "gap_accel", "gap_selected", "n_screened"]
    assert float(rows[-1]["gap_selected"]) <= 1e-5


def test_celer_trace_schema(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    code, _, _ = run(["solve", *SYN, "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    rows = read_csv(trace)
    assert list(rows[0]) == ["t", "g_t", "p_t", "support_size", "inner_epochs",
                             "coord_updates_cumulative"]
    assert float(rows[-1]["g_t"]) <= 1e-6


def test_bit_identical_outputs(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.json"
        trace = tmp_path / f"t{k}.csv"
        run(["solve", *SYN, "--seed", "3", "--out", str(path), "--trace", str(trace)], capsys)
        outs.append((path.read_bytes(), trace.read_bytes()))
    assert outs[0] == outs[1]


def test_seed_changes_synthetic_data(tmp_path, capsys):
    a = json_lines(run(["solve", *SYN, "--seed", "1"], capsys)[1])[0]
    b = json_lines(run(["solve", *SYN, "--seed", "2"], capsys)[1])[0]
    assert a["gap"] != b["gap"]


def test_csv_input(tmp_path, capsys):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((20, 6))
    y = A @ [1, 0, 0, -1, 0, 0] + 0.1 * rng.standard_normal(20)
    path = tmp_path / "d.csv"
    np.savetxt(path, np.column_stack([A, y]), delimiter=",",
               header="a,b,c,d,e,f,y", comments="")
    code, out, _ = run(["solve", "--csv", str(path), "--lambda-ratio", "0.3", "--eps", "1e-10"],
                       capsys)
    assert code == EXIT_OK
    assert json_lines(out)[0]["gap"] <= 1e-10


def test_svmlight_input(tmp_path, capsys):
    rng = np.random.default_rng(1)
    lines = []
    for _ in range(30):
        feats = sorted(rng.choice(np.arange(1, 41), 6, replace=False))
        lines.append(f"{rng.standard_normal():.6f} " +
                     " ".join(f"{j}:{rng.standard_normal():.6f}" for j in feats))
    path = tmp_path / "d.svm"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(["solve", "--data", str(path), "--solver", "cd", "--lambda-ratio", "0.2"],
                       capsys)
    assert code == EXIT_OK


def test_path_celer_beats_cd(tmp_path, capsys):
    totals = {}
    for solver in ("celer", "cd"):
        out_file = tmp_path / f"{solver}.jsonl"
        code, out, _ = run(["path", *SYN, "--grid", "10", "--solver", solver,
                            "--out", str(out_file)], capsys)
        assert code == EXIT_OK
        lines = json_lines(out_file.read_text())
        assert len(lines) == 11
        assert all(r["gap"] <= 1e-6 for r in lines[:-1])
        assert lines[-1]["all_certified"] and lines[-1]["complete"]
        totals[solver] = lines[-1]["total_coord_updates"]
    assert totals["celer"] < totals["cd"]


def test_path_single_point(capsys):
    code, out, _ = run(["path", *SYN, "--grid", "1"], capsys)
    lines = json_lines(out)
    assert code == EXIT_OK
    assert len(lines) == 2 and lines[0]["support_size"] == 0


def test_path_100_points_certified(capsys):
    code, out, _ = run(["path", *SYN, "--grid", "100"], capsys)
    lines = json_lines(out)
    assert code == EXIT_OK and len(lines) == 101
    assert lines[-1]["all_certified"]


def test_gap_trace(tmp_path, capsys):
    trace = tmp_path / "g.csv"
    code, _, _ = run(["gap-trace", "--synthetic", "n=100,p=2000,s=20", "--lambda-ratio", "0.05",
                      "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    rows = read_csv(trace)
    gap_res = np.array([float(r["gap_res"]) for r in rows])
    gap_acc = np.array([float(r["gap_accel"]) for r in rows])
    gap_sel = np.array([float(r["gap_selected"]) for r in rows])
    subopt = np.array([float(r["subopt"]) for r in rows])
    epochs = np.array([int(r["epoch"]) for r in rows])
    assert epochs[np.argmax(gap_acc <= 1e-6)] <= epochs[np.argmax(gap_res <= 1e-6)]
    assert np.all(gap_sel <= np.minimum(gap_res, gap_acc) + 1e-15)
    assert np.all(gap_res >= subopt - 1e-13)


def test_gap_trace_oracle_failure(capsys):
    code, _, err = run(["gap-trace", *SYN, "--max-epochs", "2"], capsys)
    assert code == EXIT_GAP
    assert "oracle" in err


def test_sweep_K(tmp_path, capsys):
    trace = tmp_path / "s.csv"
    code, out, _ = run(["sweep", *SYN, "--lambda-ratio", "0.05", "--sweep", "K=3,5,7,10",
                        "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    runs = json_lines(out)
    assert [r["value"] for r in runs] == ["3", "5", "7", "10"]
    assert all(r["stop_reason"] == "gap-met" for r in runs)
    its = [r["iterations"] for r in runs]
    assert max(its) <= 2 * min(its)
    rows = read_csv(trace)
    assert list(rows[0]) == ["param", "value", "epoch", "metric"]


def test_sweep_f(capsys):
    code, out, _ = run(["sweep", *SYN, "--sweep", "f=1,10,100"], capsys)
    assert code == EXIT_OK
    assert all(r["gap"] <= 1e-6 for r in json_lines(out))


def test_sweep_growth(tmp_path, capsys):
    trace = tmp_path / "s.csv"
    code, out, _ = run(["sweep", *SYN, "--lambda-ratio", "0.05", "--p-init", "2",
                        "--sweep", "growth=prune,doubling,geometric:4,linear:10,linear:50",
                        "--trace", str(trace)], capsys)
    assert code == EXIT_OK
    assert len(json_lines(out)) == 5
    rows = read_csv(trace)
    prune = [int(r["metric"]) for r in rows if r["value"] == "prune"]
    assert prune[0] == 2
    X, y, _ = synthesize(60, 400, 8, seed=0)
    X, y, _ = preprocess(X, y, min_nnz=3, unit_norm_cols=True, center_y=True, unit_norm_y=True)
    beta_hat, _ = oracles.fista(X.toarray(), y, 0.05 * lambda_max(X, y))
    assert max(prune) >= np.count_nonzero(beta_hat)


def test_parse_synthetic():
    assert parse_synthetic("n=5,p=7,s=2") == {"n": 5, "p": 7, "s": 2, "snr": 3.0}
    assert parse_synthetic("n=5,p=7,s=2,snr=10")["snr"] == 10.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "celer_lasso", "solve", *SYN, "--lambda-ratio",
                           "1.0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["support_size"] == 0
