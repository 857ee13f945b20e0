"""Benchmark runner: repeated trials of each learner over each dataset.

Every trial re-splits the data with a trial-derived seed, fits the
preprocessing on the training rows only, rebalances with SMOTE when the
dataset-level trigger holds, fits each learner, and scores the held-out test
rows.  Aggregates report mean +- sample stdev per cell, per-dataset
competition ranks on mean macro F1, and each learner's mean reciprocal rank.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import cart
from .data import Dataset, PreprocessModel, should_rebalance, smote_rebalance, split_dataset
from .metrics import accuracy, competition_ranks, macro_f1, mean_reciprocal_rank
from .training import TrainConfig, train
from .tree import count_nodes

LEARNERS = ("gdt", "cart")


@dataclass
class TrialResult:
    learner: str
    dataset: str
    trial: int
    seed: int
    macro_f1: float
    accuracy: float
    tree_size: int
    train_macro_f1: float
    fit_seconds: float
    error: str | None = None


@dataclass
class CellStats:
    n_ok: int
    mean_f1: float
    std_f1: float
    mean_accuracy: float
    mean_tree_size: float
    mean_train_f1: float
    train_test_gap: float
    mean_fit_seconds: float
    rank: int | None
    error: str | None


@dataclass
class BenchmarkReport:
    learners: list[str]
    datasets: list[str]
    trials: list[TrialResult]
    cells: dict          # (learner, dataset) -> CellStats
    mean_f1: dict        # learner -> mean over datasets
    mrr: dict            # learner -> mean reciprocal rank

    def to_csv_text(self) -> str:
        cols = ["learner", "dataset", "trials_ok", "macro_f1_mean", "macro_f1_std",
                "accuracy_mean", "tree_size_mean", "train_macro_f1_mean",
                "train_test_gap", "fit_seconds_mean", "rank", "error"]
        lines = [",".join(cols)]
        for learner in self.learners:
            for ds in self.datasets:
                cell = self.cells[(learner, ds)]
                lines.append(",".join([
                    learner, ds, str(cell.n_ok),
                    _fmt(cell.mean_f1), _fmt(cell.std_f1), _fmt(cell.mean_accuracy),
                    _fmt(cell.mean_tree_size), _fmt(cell.mean_train_f1),
                    _fmt(cell.train_test_gap), _fmt(cell.mean_fit_seconds),
                    "" if cell.rank is None else str(cell.rank),
                    cell.error or "",
                ]))
        return "\n".join(lines) + "\n"

    def to_table_text(self) -> str:
        header = ["dataset"] + [f"{m} (rank)" for m in self.learners]
        rows = [header]
        for ds in self.datasets:
            row = [ds]
            for learner in self.learners:
                cell = self.cells[(learner, ds)]
                if cell.n_ok == 0:
                    row.append("FAILED")
                else:
                    rank = f" ({cell.rank})" if cell.rank is not None else ""
                    row.append(f"{cell.mean_f1:.3f} +- {cell.std_f1:.3f}{rank}")
            rows.append(row)
        rows.append(["mean F1"] + [_fmt(self.mean_f1.get(m)) for m in self.learners])
        rows.append(["MRR"] + [_fmt(self.mrr.get(m)) for m in self.learners])
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
            for r in rows
        ) + "\n"

    def trials_jsonl(self) -> str:
        return "\n".join(json.dumps(asdict(t)) for t in self.trials) + "\n"


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and not np.isfinite(v)) else f"{v:.6g}"


def _fit_gdt(train_ds, val_ds, cfg: TrainConfig, seed: int, rebalance: bool):
    if rebalance:
        Xs, ys = smote_rebalance(train_ds.X, train_ds.y, seed=seed)
        train_ds = Dataset.from_arrays(Xs, ys, n_classes=train_ds.n_classes,
                                       feature_names=train_ds.feature_names)
    report = train(train_ds, replace(cfg, seed=seed), val_ds)
    return report.tree


def _fit_cart(train_ds, val_ds, cfg: cart.CartConfig, seed: int, rebalance: bool):
    X = np.vstack([train_ds.X, val_ds.X])
    y = np.concatenate([train_ds.y, val_ds.y])
    if rebalance:
        X, y = smote_rebalance(X, y, seed=seed)
    return cart.build(X, y, train_ds.n_classes, cfg)


def run_benchmark(datasets, learners, trials: int, seed: int = 0,
                  gdt_configs: dict | None = None,
                  cart_configs: dict | None = None) -> BenchmarkReport:
    """datasets: list of (name, Dataset) pairs; learners: subset of LEARNERS."""
    for learner in learners:
        if learner not in LEARNERS:
            raise ValueError(f"unknown learner {learner!r}; choose from {LEARNERS}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gdt_configs = gdt_configs or {}
    cart_configs = cart_configs or {}

    results: list[TrialResult] = []
    for name, ds in datasets:
        rebalance = should_rebalance(ds.y, ds.n_classes)
        for trial in range(trials):
            trial_seed = seed + trial
            idx = split_dataset(ds, trial_seed)
            pre, train_t = PreprocessModel.fit_transform(ds.select(idx.train))
            val_t = pre.transform(ds.select(idx.val))
            test_t = pre.transform(ds.select(idx.test))
            X_train_full = np.vstack([train_t.X, val_t.X])
            y_train_full = np.concatenate([train_t.y, val_t.y])

            for learner in learners:
                t0 = time.perf_counter()
                try:
                    if learner == "gdt":
                        cfg = gdt_configs.get(name) or TrainConfig(depth=7)
                        tree = _fit_gdt(train_t, val_t, cfg, trial_seed, rebalance)
                    else:
                        cfg = cart_configs.get(name) or cart.CartConfig()
                        tree = _fit_cart(train_t, val_t, cfg, trial_seed, rebalance)
                    elapsed = time.perf_counter() - t0
                    test_pred = tree.predict(test_t.X)
                    train_pred = tree.predict(X_train_full)
                    results.append(TrialResult(
                        learner=learner, dataset=name, trial=trial, seed=trial_seed,
                        macro_f1=macro_f1(test_pred, test_t.y, ds.n_classes),
                        accuracy=accuracy(test_pred, test_t.y),
                        tree_size=count_nodes(tree),
                        train_macro_f1=macro_f1(train_pred, y_train_full, ds.n_classes),
                        fit_seconds=elapsed,
                    ))
                except Exception as exc:  # one failed trial must not sink the run
                    results.append(TrialResult(
                        learner=learner, dataset=name, trial=trial, seed=trial_seed,
                        macro_f1=float("nan"), accuracy=float("nan"), tree_size=0,
                        train_macro_f1=float("nan"), fit_seconds=0.0,
                        error=f"{type(exc).__name__}: {exc}",
                    ))

    return aggregate_report([n for n, _ in datasets], list(learners), results)


def aggregate_report(dataset_names, learners, results) -> BenchmarkReport:
    cells = {}
    for learner in learners:
        for ds in dataset_names:
            ok = [r for r in results
                  if r.learner == learner and r.dataset == ds and r.error is None]
            errors = [r.error for r in results
                      if r.learner == learner and r.dataset == ds and r.error]
            if ok:
                f1s = np.array([r.macro_f1 for r in ok])
                std = float(f1s.std(ddof=1)) if len(ok) > 1 else 0.0
                cells[(learner, ds)] = CellStats(
                    n_ok=len(ok),
                    mean_f1=float(f1s.mean()),
                    std_f1=std,
                    mean_accuracy=float(np.mean([r.accuracy for r in ok])),
                    mean_tree_size=float(np.mean([r.tree_size for r in ok])),
                    mean_train_f1=float(np.mean([r.train_macro_f1 for r in ok])),
                    train_test_gap=float(np.mean([r.train_macro_f1 - r.macro_f1 for r in ok])),
                    mean_fit_seconds=float(np.mean([r.fit_seconds for r in ok])),
                    rank=None,
                    error="; ".join(errors) if errors else None,
                )
            else:
                cells[(learner, ds)] = CellStats(
                    n_ok=0, mean_f1=float("nan"), std_f1=float("nan"),
                    mean_accuracy=float("nan"), mean_tree_size=float("nan"),
                    mean_train_f1=float("nan"), train_test_gap=float("nan"),
                    mean_fit_seconds=float("nan"), rank=None,
                    error="; ".join(errors) if errors else "no successful trials",
                )

    # per-dataset competition ranks on mean macro F1
    rank_lists: dict = {learner: [] for learner in learners}
    for ds in dataset_names:
        scored = [m for m in learners if cells[(m, ds)].n_ok > 0]
        ranks = competition_ranks([cells[(m, ds)].mean_f1 for m in scored])
        for learner, rank in zip(scored, ranks):
            cells[(learner, ds)].rank = rank
            rank_lists[learner].append(rank)

    mean_f1 = {}
    mrr = {}
    for learner in learners:
        scores = [cells[(learner, ds)].mean_f1 for ds in dataset_names
                  if cells[(learner, ds)].n_ok > 0]
        mean_f1[learner] = float(np.mean(scores)) if scores else None
        mrr[learner] = mean_reciprocal_rank(rank_lists[learner]) if rank_lists[learner] else None

    return BenchmarkReport(
        learners=list(learners), datasets=list(dataset_names),
        trials=results, cells=cells, mean_f1=mean_f1, mrr=mrr,
    )
