"""Command-line interface: train, predict, evaluate, benchmark.

Exit codes: 0 success, 1 runtime error, 2 usage error.  Set GDTREE_LOG to
DEBUG/INFO/WARNING to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, cart, presets
from .data import (
    Dataset,
    PreprocessModel,
    load_csv,
    load_csv_features,
    should_rebalance,
    smote_rebalance,
    split_dataset,
)
from .losses import LossConfig
from .metrics import accuracy, macro_f1
from .model_io import ModelBundle, load_model, save_model
from .training import TrainConfig, train

log = logging.getLogger("gdtree")


class UsageError(Exception):
    """Bad flag combinations detected after argparse."""


def _loss_config(args) -> LossConfig:
    return LossConfig(
        kind=args.loss,
        focal_gamma=args.focal_gamma,
        poly_enabled=args.poly_epsilon is not None,
        poly_epsilon=args.poly_epsilon if args.poly_epsilon is not None else 2.0,
    )


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        depth=args.depth,
        lr_index=args.lr_index,
        lr_values=args.lr_values,
        lr_leaf=args.lr_leaf,
        loss=_loss_config(args),
        epochs=args.epochs,
        batch_size=args.batch_size,
        patience=args.patience,
        restarts=args.restarts,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    data = load_csv(args.data, args.target)
    cfg = _train_config(args)
    idx = split_dataset(data, args.seed)
    pre, train_t = PreprocessModel.fit_transform(data.select(idx.train))
    val_t = pre.transform(data.select(idx.val))
    test_t = pre.transform(data.select(idx.test))

    fit_data = train_t
    if should_rebalance(data.y, data.n_classes):
        log.info("minority share below the rebalance trigger; applying SMOTE")
        Xs, ys = smote_rebalance(train_t.X, train_t.y, seed=args.seed)
        fit_data = Dataset.from_arrays(Xs, ys, n_classes=train_t.n_classes,
                                       feature_names=train_t.feature_names)

    report = train(fit_data, cfg, val_t)
    tree = report.tree
    train_acc = accuracy(tree.predict(train_t.X), train_t.y)
    val_f1 = macro_f1(tree.predict(val_t.X), val_t.y, data.n_classes)
    test_f1 = macro_f1(tree.predict(test_t.X), test_t.y, data.n_classes)

    bundle = ModelBundle(params=report.params, tree=tree, preprocess=pre,
                         train_config=cfg, report_summary=report.summary_dict())
    save_model(args.model, bundle)
    print(f"model written to {args.model}")
    print(f"train accuracy:      {train_acc:.4f}")
    print(f"validation macro F1: {val_f1:.4f}")
    print(f"test macro F1:       {test_f1:.4f}")
    print(f"tree size:           {report.tree_size}")
    print(f"fit seconds:         {report.fit_seconds:.2f}")
    return 0


def _check_schema(bundle: ModelBundle, data: Dataset) -> None:
    expected = set(bundle.preprocess.feature_names)
    present = set(data.feature_names)
    missing = sorted(expected - present)
    extra = sorted(present - expected
                   - {bundle.preprocess.target_name}
                   - set(bundle.preprocess.dropped_columns))
    if missing or extra:
        raise ValueError(
            f"input schema mismatch: missing columns {missing}, unexpected columns {extra}")


def cmd_predict(args) -> int:
    bundle = load_model(args.model)
    data = load_csv_features(args.data)
    _check_schema(bundle, data)
    probs = bundle.predict_proba(data)
    pred = np.argmax(probs, axis=1)
    class_names = bundle.preprocess.class_names
    out_path = args.out or "predictions.csv"
    with open(out_path, "w") as fh:
        header = ["prediction"] + [f"prob_{c}" for c in class_names]
        fh.write(",".join(header) + "\n")
        for i in range(probs.shape[0]):
            cells = [class_names[pred[i]]] + [repr(float(v)) for v in probs[i]]
            fh.write(",".join(cells) + "\n")
    print(f"wrote {probs.shape[0]} predictions to {out_path}")
    return 0


def cmd_evaluate(args) -> int:
    bundle = load_model(args.model)
    data = load_csv(args.data, args.target or bundle.preprocess.target_name)
    _check_schema(bundle, data)
    if data.class_names != bundle.preprocess.class_names:
        raise ValueError(
            f"label set mismatch: model has {bundle.preprocess.class_names}, "
            f"data has {data.class_names}")
    pred = bundle.predict(data)
    f1 = macro_f1(pred, data.y, data.n_classes)
    acc = accuracy(pred, data.y)
    print(f"macro F1: {f1:.4f}")
    print(f"accuracy: {acc:.4f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"macro_f1": f1, "accuracy": acc, "n_rows": data.n_rows}, fh)
    return 0


def _load_benchmark_datasets(args):
    specs = []
    if args.data_list:
        with open(args.data_list) as fh:
            entries = json.load(fh)
        for e in entries:
            specs.append((e["name"], e["path"], e["target"]))
    elif args.data:
        if not args.target:
            raise UsageError("--target is required with --data")
        specs.append((Path(args.data).stem, args.data, args.target))
    else:
        raise UsageError("benchmark needs --data-list or --data/--target")
    return [(name, load_csv(path, target)) for name, path, target in specs]


def cmd_benchmark(args) -> int:
    learners = [m.strip() for m in args.learners.split(",") if m.strip()]
    for learner in learners:
        if learner not in bench.LEARNERS:
            raise UsageError(
                f"unknown learner {learner!r}; choose from {', '.join(bench.LEARNERS)}")
    datasets = _load_benchmark_datasets(args)

    gdt_configs, cart_configs = {}, {}
    for name, _ in datasets:
        gdt_cfg = presets.gdt_preset(name) or TrainConfig(depth=args.depth)
        gdt_configs[name] = replace(gdt_cfg, seed=args.seed)
        cart_configs[name] = presets.cart_preset(name) or cart.CartConfig()

    report = bench.run_benchmark(datasets, learners, args.trials, args.seed,
                                 gdt_configs, cart_configs)
    out_dir = Path(args.out or "benchmark-results")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(report.to_csv_text())
    (out_dir / "report.txt").write_text(report.to_table_text())
    (out_dir / "trials.jsonl").write_text(report.trials_jsonl())
    print(report.to_table_text(), end="")
    print(f"reports written to {out_dir}/")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdtree",
        description="Hard axis-aligned decision trees trained with gradient descent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_train_flags(p):
        p.add_argument("--depth", type=int, default=7, help="tree depth")
        p.add_argument("--lr-index", type=float, default=0.05)
        p.add_argument("--lr-values", type=float, default=0.05)
        p.add_argument("--lr-leaf", type=float, default=0.1)
        p.add_argument("--loss", choices=["ce", "focal"], default="ce")
        p.add_argument("--focal-gamma", type=float, default=3.0)
        p.add_argument("--poly-epsilon", type=float, default=None,
                       help="enable the Poly-1 loss term with this epsilon")
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--epochs", type=int, default=1000)
        p.add_argument("--patience", type=int, default=200)
        p.add_argument("--restarts", type=int, default=3)

    p_train = sub.add_parser("train", help="fit a model on a CSV and save it")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--target", required=True)
    p_train.add_argument("--model", default="model.json")
    p_train.add_argument("--seed", type=int, default=0)
    add_common_train_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="predict classes for a feature CSV")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", default=None)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a model against a labeled CSV")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--target", default=None)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("benchmark", help="compare learners over datasets")
    p_bench.add_argument("--data-list", default=None,
                         help="JSON file: [{name, path, target}, ...]")
    p_bench.add_argument("--data", default=None)
    p_bench.add_argument("--target", default=None)
    p_bench.add_argument("--learners", default="gdt,cart")
    p_bench.add_argument("--trials", type=int, default=10)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--depth", type=int, default=7,
                         help="depth for datasets without a preset")
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GDTREE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:
        log.debug("traceback", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
