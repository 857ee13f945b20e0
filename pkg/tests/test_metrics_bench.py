import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdtree.bench import TrialResult, aggregate_report, run_benchmark
from gdtree.data import Dataset
from gdtree.metrics import competition_ranks, macro_f1, mean_reciprocal_rank
from gdtree.synth import banknote_like
from gdtree.training import TrainConfig


class TestMacroF1:
    def test_perfect_predictions(self):
        y = np.array([0, 1, 2, 1, 0])
        assert macro_f1(y, y, 3) == 1.0

    def test_symmetric_half_confusion(self):
        # per class: TP=1, FP=1, FN=1 -> F1 = 0.5 each
        pred = np.array([0, 0, 1, 1])
        true = np.array([0, 1, 1, 0])
        assert macro_f1(pred, true, 2) == pytest.approx(0.5)

    def test_single_class_predictor_on_balanced_set(self):
        pred = np.zeros(10, dtype=int)
        true = np.array([0, 1] * 5)
        assert macro_f1(pred, true, 2) == pytest.approx(1 / 3)

    def test_absent_class_counts_zero(self):
        pred = np.array([0, 1])
        true = np.array([0, 1])
        assert macro_f1(pred, true, 3) == pytest.approx(2 / 3)

    @given(st.integers(2, 5), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_class_relabeling(self, c, seed):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, c, size=60)
        true = rng.integers(0, c, size=60)
        perm = rng.permutation(c)
        assert macro_f1(perm[pred], perm[true], c) == pytest.approx(
            macro_f1(pred, true, c), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            macro_f1(np.array([]), np.array([]), 2)


class TestMrr:
    def test_always_first(self):
        assert mean_reciprocal_rank([1, 1, 1]) == 1.0

    def test_examples(self):
        assert mean_reciprocal_rank([1, 2]) == pytest.approx(0.75)
        assert mean_reciprocal_rank([2, 4]) == pytest.approx(0.375)

    def test_competition_ranking_shares_lower_rank(self):
        assert competition_ranks([0.9, 0.9, 0.5]) == [1, 1, 3]
        assert competition_ranks([0.1, 0.3, 0.2]) == [3, 1, 2]

    def test_domain(self):
        with pytest.raises(ValueError):
            mean_reciprocal_rank([])
        with pytest.raises(ValueError):
            mean_reciprocal_rank([0])


def toy_dataset(seed=0, n=80):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] + 0.3 * rng.normal(size=n) > 0).astype(np.int64)
    return Dataset.from_arrays(X, y, n_classes=2)


class TestRunBenchmark:
    def test_single_learner_three_trials(self):
        report = run_benchmark(
            [("toy", toy_dataset())], ["cart"], trials=3, seed=1)
        assert len(report.trials) == 3
        cell = report.cells[("cart", "toy")]
        f1s = [t.macro_f1 for t in report.trials]
        assert cell.mean_f1 == pytest.approx(np.mean(f1s))
        assert cell.std_f1 == pytest.approx(np.std(f1s, ddof=1))
        assert cell.rank == 1

    def test_tied_learners_both_rank_one(self):
        results = []
        for learner in ("gdt", "cart"):
            for ds in ("d1", "d2"):
                results.append(TrialResult(learner, ds, 0, 0, 0.8, 0.8, 5, 0.9, 0.1))
        report = aggregate_report(["d1", "d2"], ["gdt", "cart"], results)
        assert report.cells[("gdt", "d1")].rank == 1
        assert report.cells[("cart", "d1")].rank == 1
        assert report.mrr["gdt"] == 1.0 and report.mrr["cart"] == 1.0

    def test_single_trial_stdev_zero(self):
        report = run_benchmark([("toy", toy_dataset())], ["cart"], trials=1, seed=0)
        assert report.cells[("cart", "toy")].std_f1 == 0.0

    def test_failures_are_recorded_not_fatal(self, monkeypatch):
        import gdtree.bench as bench_mod

        calls = {"n": 0}
        real = bench_mod._fit_cart

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("boom")
            return real(*args, **kwargs)

        monkeypatch.setattr(bench_mod, "_fit_cart", flaky)
        report = run_benchmark([("toy", toy_dataset())], ["cart"], trials=3, seed=0)
        cell = report.cells[("cart", "toy")]
        assert cell.n_ok == 2
        assert "boom" in cell.error
        assert sum(1 for t in report.trials if t.error) == 1

    def test_aggregate_matches_bruteforce_recomputation(self):
        report = run_benchmark(
            [("toy", toy_dataset()), ("toy2", toy_dataset(seed=5))],
            ["cart"], trials=4, seed=2)
        for ds in ("toy", "toy2"):
            rows = [t for t in report.trials if t.dataset == ds]
            cell = report.cells[("cart", ds)]
            assert cell.mean_f1 == pytest.approx(np.mean([t.macro_f1 for t in rows]))
            assert cell.train_test_gap == pytest.approx(
                np.mean([t.train_macro_f1 - t.macro_f1 for t in rows]))

    def test_gdt_and_cart_end_to_end_tiny(self):
        cfg = TrainConfig(depth=2, epochs=40, patience=20, restarts=1)
        report = run_benchmark(
            [("toy", toy_dataset(n=120))], ["gdt", "cart"], trials=2, seed=3,
            gdt_configs={"toy": cfg})
        for learner in ("gdt", "cart"):
            cell = report.cells[(learner, "toy")]
            assert cell.n_ok == 2
            assert 0.0 <= cell.mean_f1 <= 1.0
            assert cell.mean_tree_size >= 1
        ranks = {report.cells[(m, "toy")].rank for m in ("gdt", "cart")}
        assert 1 in ranks

    def test_report_writers(self):
        report = run_benchmark([("toy", toy_dataset())], ["cart"], trials=2, seed=4)
        csv_text = report.to_csv_text()
        assert csv_text.splitlines()[0].startswith("learner,dataset,")
        assert "cart,toy" in csv_text
        table = report.to_table_text()
        assert "MRR" in table and "cart" in table
        lines = [json.loads(line) for line in report.trials_jsonl().splitlines()]
        assert len(lines) == 2 and lines[0]["learner"] == "cart"

    def test_unknown_learner_rejected(self):
        with pytest.raises(ValueError):
            run_benchmark([("toy", toy_dataset())], ["mystery"], trials=1)

    def test_smote_trigger_respected_in_pipeline(self):
        ds = banknote_like()
        assert not __import__("gdtree").should_rebalance(ds.y, ds.n_classes)
