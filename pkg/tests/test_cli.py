import json
from pathlib import Path

import numpy as np
import pytest

from gdtree.cli import main
from gdtree.data import load_csv
from gdtree.model_io import load_model

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
XOR_CSV = str(DATA_DIR / "xor_grid.csv")


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def trained_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "xor.json"
    code = run("train", "--data", XOR_CSV, "--target", "target",
               "--depth", "2", "--seed", "3", "--epochs", "300",
               "--patience", "100", "--model", str(path))
    assert code == 0
    return path


class TestTrain:
    def test_writes_model_and_reports_accuracy(self, trained_model, capsys):
        bundle = load_model(trained_model)
        assert bundle.tree.n_classes == 2
        assert bundle.train_config.depth == 2

    def test_xor_training_accuracy(self, trained_model):
        bundle = load_model(trained_model)
        ds = load_csv(XOR_CSV, "target")
        pred = bundle.predict(ds)
        assert float(np.mean(pred == ds.y)) >= 0.95

    def test_missing_target_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            run("train", "--data", XOR_CSV)
        assert info.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_seed_determinism_byte_identical_models(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            code = run("train", "--data", XOR_CSV, "--target", "target",
                       "--depth", "2", "--seed", "11", "--epochs", "40",
                       "--patience", "40", "--model", str(path))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unreadable_data_is_runtime_error(self, tmp_path):
        assert run("train", "--data", str(tmp_path / "nope.csv"),
                   "--target", "y", "--model", str(tmp_path / "m.json")) == 1


class TestPredict:
    def test_round_trip_matches_in_process_predictions(self, trained_model, tmp_path):
        out = tmp_path / "preds.csv"
        code = run("predict", "--model", str(trained_model),
                   "--data", XOR_CSV, "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "prediction,prob_0,prob_1"
        assert len(lines) == 401  # row count in == row count out

        bundle = load_model(trained_model)
        ds = load_csv(XOR_CSV, "target")
        probs = bundle.predict_proba(ds)
        file_probs = np.array([[float(c) for c in line.split(",")[1:]]
                               for line in lines[1:]])
        np.testing.assert_array_equal(file_probs, probs)  # bit-identical

    def test_schema_mismatch_names_columns(self, trained_model, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("x1,zz\n0.1,0.2\n")
        assert run("predict", "--model", str(trained_model),
                   "--data", str(bad)) == 1
        err = capsys.readouterr().err
        assert "x2" in err and "zz" in err

    def test_unseen_rows_still_predicted(self, trained_model, tmp_path):
        wild = tmp_path / "wild.csv"
        wild.write_text("x1,x2\n-5.0,99.0\n0.5,0.5\n")
        out = tmp_path / "o.csv"
        assert run("predict", "--model", str(trained_model),
                   "--data", str(wild), "--out", str(out)) == 0
        assert len(out.read_text().splitlines()) == 3


class TestEvaluate:
    def test_reports_metrics(self, trained_model, capsys):
        assert run("evaluate", "--model", str(trained_model),
                   "--data", XOR_CSV, "--target", "target") == 0
        out = capsys.readouterr().out
        assert "macro F1" in out and "accuracy" in out


class TestBenchmark:
    def test_single_dataset_run(self, tmp_path, capsys):
        out_dir = tmp_path / "results"
        code = run("benchmark", "--data", XOR_CSV, "--target", "target",
                   "--learners", "cart", "--trials", "2", "--seed", "1",
                   "--out", str(out_dir))
        assert code == 0
        assert (out_dir / "report.csv").exists()
        assert (out_dir / "report.txt").exists()
        trials = [json.loads(line)
                  for line in (out_dir / "trials.jsonl").read_text().splitlines()]
        assert len(trials) == 2

    def test_data_list_file(self, tmp_path):
        listing = tmp_path / "list.json"
        listing.write_text(json.dumps(
            [{"name": "xor", "path": XOR_CSV, "target": "target"}]))
        code = run("benchmark", "--data-list", str(listing), "--learners", "cart",
                   "--trials", "1", "--out", str(tmp_path / "r"))
        assert code == 0
        csv_text = (tmp_path / "r" / "report.csv").read_text()
        # one trial -> stdev column is zero
        row = csv_text.splitlines()[1].split(",")
        assert row[0] == "cart" and float(row[4]) == 0.0

    def test_unknown_learner_is_usage_error(self, capsys):
        assert run("benchmark", "--data", XOR_CSV, "--target", "target",
                   "--learners", "forest") == 2
        assert "unknown learner" in capsys.readouterr().err

    def test_missing_dataset_flags_usage_error(self):
        assert run("benchmark", "--learners", "cart") == 2
