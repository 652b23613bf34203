import subprocess
import sys

import numpy as np
import pytest

from small_learner.cli import main, parse_grid, UsageError
from small_learner.model import load
from small_learner.synthetic import desk_instance

FAST = ["--iters", "150"]


@pytest.fixture
def csv_file(tmp_path):
    d = desk_instance(seed=3)
    path = tmp_path / "desk.csv"
    lines = [",".join(d.feature_names) + ",label"]
    for x, y in zip(d.features, d.labels):
        lines.append(",".join(repr(float(v)) for v in x) + f",{int(y)}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def trained(tmp_path, csv_file):
    model = tmp_path / "m.json"
    assert main(["train", "--data", str(csv_file), "--model", str(model), *FAST]) == 0
    return model


def test_train_writes_model_and_trace(tmp_path, csv_file, capsys):
    model = tmp_path / "m.json"
    assert main(["train", "--data", str(csv_file), "--model", str(model), *FAST]) == 0
    out = capsys.readouterr().out
    assert "train accuracy" in out and "wall time" in out and "distinct" in out
    m = load(model)
    assert max(np.count_nonzero(m.W, axis=1)) <= 3
    trace = model.with_name("m.json.trace.tsv").read_text().splitlines()
    assert trace[0].startswith("iteration") and len(trace) == 2


def test_train_is_byte_deterministic(tmp_path, csv_file, trained):
    again = tmp_path / "again.json"
    main(["train", "--data", str(csv_file), "--model", str(again), *FAST])
    assert again.read_bytes() == trained.read_bytes()


def test_train_bundled_breast_cancer(tmp_path):
    model = tmp_path / "bc.json"
    assert main(["train", "--data", "bundled:breast_cancer", "--model", str(model),
                 "--k", "3", "--p", "2", "--seed", "0", "--iters", "300"]) == 0
    assert np.count_nonzero(load(model).W, axis=1).max() <= 3


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--model", str(tmp_path / "m.json")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["train", "--data", "x.csv", "--model", "m.json", "--gradient-mode", "nope"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["cv", "--data", "x.csv", "--grid", "gamma=1"])
    assert exc.value.code == 2
    assert not (tmp_path / "m.json").exists()


def test_runtime_error_exit_1_and_no_model(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,label\n1,1\nfoo,-1\n")
    model = tmp_path / "m.json"
    assert main(["train", "--data", str(bad), "--model", str(model)]) == 1
    assert "row 3" in capsys.readouterr().err
    assert not model.exists()


def test_predict_rows(tmp_path, csv_file, trained):
    out = tmp_path / "pred.tsv"
    assert main(["predict", "--model", str(trained), "--data", str(csv_file), "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 1 + 60
    m = load(trained)
    first = rows[1].split("\t")
    assert int(first[1]) in (-1, 1) and len(first) == 4 + m.p


def test_predict_surface(tmp_path, csv_file, trained):
    out = tmp_path / "surface.tsv"
    assert main(["predict", "--model", str(trained), "--data", str(csv_file), "--out", str(out),
                 "--surface", "f0,f1", "--surface-steps", "7"]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "f0\tf1\tscore" and len(rows) == 1 + 49


def test_eval_and_mismatch(tmp_path, csv_file, trained, capsys):
    assert main(["eval", "--model", str(trained), "--data", str(csv_file), "--format", "rows"]) == 0
    acc = float(capsys.readouterr().out.splitlines()[1].split("\t")[1])
    assert 0 <= acc <= 1
    other = tmp_path / "other.csv"
    text = csv_file.read_text().replace("f9,label", "zz,label", 1)
    other.write_text(text)
    assert main(["eval", "--model", str(trained), "--data", str(other)]) == 1
    err = capsys.readouterr().err
    assert "missing f9" in err and "unexpected zz" in err


def test_explain_bounded(trained, capsys):
    assert main(["explain", "--model", str(trained)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert sum(1 for ln in lines if ln.startswith("  ")) <= 6


def test_cv_and_bench(tmp_path, csv_file, capsys):
    assert main(["cv", "--data", str(csv_file), "--grid", "alpha=0.1,0.01", "--folds", "3", *FAST]) == 0
    assert "best:" in capsys.readouterr().out
    out = tmp_path / "bench.tsv"
    assert main(["bench", "--data", str(csv_file), "--grid", "alpha=0.01", "--c-grid", "0.01",
                 "--splits", "2", "--format", "rows", "--out", str(out), *FAST]) == 0
    rows = [r.split("\t") for r in out.read_text().splitlines()]
    assert rows[0][:2] == ["dataset", "method"]
    assert [r[1] for r in rows[1:]] == ["SMaLL", "L1L", "ENL"]
    for r in rows[1:]:
        assert float(r[5]) == pytest.approx(100 * float(r[2]) / float(r[4]))


def test_inputs_not_mutated(tmp_path, csv_file, trained):
    before = csv_file.read_bytes(), trained.read_bytes()
    main(["eval", "--model", str(trained), "--data", str(csv_file)])
    main(["predict", "--model", str(trained), "--data", str(csv_file), "--out", str(tmp_path / "p")])
    assert (csv_file.read_bytes(), trained.read_bytes()) == before


def test_parse_grid():
    assert parse_grid("alpha=0.1,0.01;lambda=1") == {"alpha": (0.1, 0.01), "lam": (1.0,)}
    with pytest.raises(UsageError):
        parse_grid("alpha")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "small_learner", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "train" in r.stdout
    r = subprocess.run([sys.executable, "-m", "small_learner", "explain"], capture_output=True, text=True)
    assert r.returncode == 2
