import json
import subprocess
import sys

import pytest

from corset.cli import main
from corset.data import load_sparse
from corset.evaluate import predict_dataset
from corset.learner import LearnerConfig, RuleSetModel, fit


@pytest.fixture
def toy(tmp_path):
    data = tmp_path / "d.txt"
    assert main(["generate", "--out", str(data), "--records", "200", "--features", "20", "--labels", "20",
                 "--rules", "5", "--noise", "0", "--seed", "3"]) == 0
    return tmp_path, data


def test_generate_writes_truth_sidecar(toy):
    tmp, data = toy
    truth = json.loads((tmp / "d.txt.truth.json").read_text())
    assert truth["seed"] == 3 and len(truth["rules"]) == 5
    assert len(load_sparse(data)) == 200


def test_train_save_load_predict_round_trip(toy, capsys):
    tmp, data = toy
    model = tmp / "m.json"
    assert main(["train", str(data), "--model", str(model), "--max-rules", "5", "--pool-size", "100",
                 "--threads", "1", "--seed", "2"]) == 0
    ds = load_sparse(data)
    in_memory = fit(ds, LearnerConfig(max_rules=5, pool_size=100, seed=2))
    loaded = RuleSetModel.load(model)
    assert loaded.rules == in_memory.rules
    assert len(loaded.rules) <= 5
    out = tmp / "pred.txt"
    capsys.readouterr()
    assert main(["predict", str(data), "--model", str(model), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    want = predict_dataset(in_memory.rules, ds)
    assert [set(map(int, l.split())) for l in lines] == [set(p) for p in want]


def test_threads_do_not_change_model(toy):
    tmp, data = toy
    for n in ("1", "3"):
        assert main(["train", str(data), "--model", str(tmp / f"m{n}.json"), "--max-rules", "5",
                     "--pool-size", "80", "--threads", n]) == 0
    assert RuleSetModel.load(tmp / "m1.json").rules == RuleSetModel.load(tmp / "m3.json").rules


def test_evaluate_perfect_model(toy, capsys):
    tmp, data = toy
    truth = json.loads((tmp / "d.txt.truth.json").read_text())
    RuleSetModel([(frozenset(r["head"]), frozenset(r["tail"])) for r in truth["rules"]]).save(tmp / "p.json")
    assert main(["evaluate", str(data), "--model", str(tmp / "p.json"), "--json", str(tmp / "r.json")]) == 0
    assert json.loads((tmp / "r.json").read_text())["micro_f1"] == 1.0
    assert "micro_f1" in capsys.readouterr().out


def test_train_json_report_has_seed(toy):
    tmp, data = toy
    assert main(["train", str(data), "--model", str(tmp / "m.json"), "--tau", "0.01", "--pool-size", "50",
                 "--seed", "9", "--split", "0.7,0.3", "--truth", str(tmp / "d.txt.truth.json"),
                 "--json", str(tmp / "r.json")]) == 0
    rep = json.loads((tmp / "r.json").read_text())
    assert rep["seed"] == 9 and "test_micro_f1" in rep and "recovery" in rep


def test_stats(toy, capsys):
    _, data = toy
    assert main(["stats", str(data)]) == 0
    assert "instances" in capsys.readouterr().out


def test_samplers_emit_tsv(toy, capsys):
    tmp, data = toy
    truth = json.loads((tmp / "d.txt.truth.json").read_text())
    tail = ",".join(map(str, truth["rules"][0]["tail"]))
    capsys.readouterr()
    assert main(["sample-tails", str(data), "-n", "300", "--seed", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "tail\tcount\tfrequency"
    assert sum(int(l.split("\t")[1]) for l in out[1:]) == 300
    assert main(["sample-heads", str(data), "--tail", tail, "-n", "200", "--variant", "gh"]) == 0
    assert capsys.readouterr().out.startswith("head\tcount")


def test_sampler_output_is_seeded(toy, capsys):
    _, data = toy
    runs = []
    for _ in range(2):
        main(["sample-tails", str(data), "-n", "100", "--seed", "5"])
        runs.append(capsys.readouterr().out)
    assert runs[0] == runs[1]


def test_sweep_lambda_rows(toy, capsys):
    tmp, data = toy
    capsys.readouterr()
    assert main(["sweep-lambda", str(data), "--max-rules", "3", "--pool-size", "40", "--lambdas", "0.1,10",
                 "--json", str(tmp / "s.json")]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].split("\t")[:3] == ["lambda", "avg_pairwise_overlap", "micro_f1"]
    assert [r.split("\t")[0] for r in rows[1:]] == ["0.1", "10"]
    assert json.loads((tmp / "s.json").read_text())["seed"] == 0


def test_convert_dense(tmp_path):
    (tmp_path / "x.csv").write_text("1,10\n2,20\n3,30\n")
    (tmp_path / "y.txt").write_text("0\n1\n0 1\n")
    assert main(["convert", str(tmp_path / "x.csv"), str(tmp_path / "y.txt"), "--out", str(tmp_path / "o.txt"),
                 "--percentile", "50"]) == 0
    assert len(load_sparse(tmp_path / "o.txt")) == 3


def test_module_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 2\n0 | 9\n")
    assert main(["stats", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert main(["stats", str(tmp_path / "missing.txt")]) == 1


def test_usage_error_exit_code(toy):
    tmp, data = toy
    with pytest.raises(SystemExit) as e:
        main(["train", str(data), "--model", "m", "--tau", "0.1", "--max-rules", "3"])
    assert e.value.code == 2


def test_console_entry_point(toy):
    _, data = toy
    r = subprocess.run([sys.executable, "-m", "corset.cli", "stats", str(data)], capture_output=True, text=True)
    assert r.returncode == 0 and "instances" in r.stdout
    r = subprocess.run([sys.executable, "-m", "corset.cli", "nope"], capture_output=True, text=True)
    assert r.returncode == 2
