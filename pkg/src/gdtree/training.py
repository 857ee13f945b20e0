"""Mini-batch gradient-descent training of dense trees.

Straight-through hard forward passes, per-matrix Adam learning rates, a
moving average over the most recent parameter checkpoints, early stopping on
the hard-mode validation loss of the averaged weights, and random restarts
with the best restart selected by validation loss.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .grad import loss_and_gradients
from .losses import LossConfig, batch_loss
from .ops import ForwardMode, GradTriple
from .tree import (
    DenseTreeParams,
    MAX_DEPTH,
    VanillaTree,
    count_nodes,
    prune_zero_branches,
    to_vanilla,
    tree_pass,
)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDivergedError(RuntimeError):
    """Raised when a non-finite loss shows up during training."""

    def __init__(self, restart: int, epoch: int):
        super().__init__(f"training diverged at restart {restart}, epoch {epoch}")
        self.restart = restart
        self.epoch = epoch


@dataclass
class TrainConfig:
    depth: int
    lr_index: float = 0.05      # learning rate for the feature-selection logits
    lr_values: float = 0.05     # learning rate for the thresholds
    lr_leaf: float = 0.1        # learning rate for the leaf logits
    loss: LossConfig = field(default_factory=LossConfig)
    epochs: int = 1000
    batch_size: int = 64
    patience: int = 200
    restarts: int = 3
    swa_window: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")
        for name in ("lr_index", "lr_values", "lr_leaf"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 1 or self.batch_size < 1 or self.restarts < 1 or self.swa_window < 1:
            raise ValueError("epochs, batch_size, restarts and swa_window must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.patience > self.epochs:
            raise ValueError("patience must not exceed epochs")

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "lr_index": self.lr_index,
            "lr_values": self.lr_values,
            "lr_leaf": self.lr_leaf,
            "loss": self.loss.to_dict(),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "patience": self.patience,
            "restarts": self.restarts,
            "swa_window": self.swa_window,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["loss"] = LossConfig.from_dict(d["loss"])
        return cls(**d)


@dataclass
class AdamState:
    """First/second moment estimates per parameter matrix plus a step counter."""

    m_select: np.ndarray
    v_select: np.ndarray
    m_thresh: np.ndarray
    v_thresh: np.ndarray
    m_leaf: np.ndarray
    v_leaf: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params: DenseTreeParams) -> "AdamState":
        return cls(
            np.zeros_like(params.select_logits), np.zeros_like(params.select_logits),
            np.zeros_like(params.thresholds), np.zeros_like(params.thresholds),
            np.zeros_like(params.leaf_logits), np.zeros_like(params.leaf_logits),
        )


def init_params(depth: int, n_features: int, n_classes: int,
                rng: np.random.Generator) -> DenseTreeParams:
    """Uniform initialization with fan-based bounds.

    Selection logits and thresholds draw from U(+-sqrt(6 / (2^(2d-1) + n))),
    leaf logits from U(+-sqrt(6 / (2^(2d) + c))).
    """
    if depth < 1 or n_features < 1 or n_classes < 2:
        raise ValueError("need depth >= 1, n_features >= 1, n_classes >= 2")
    m, n_leaves = 2 ** depth - 1, 2 ** depth
    bound_internal = np.sqrt(6.0 / (2 ** (2 * depth - 1) + n_features))
    bound_leaf = np.sqrt(6.0 / (2 ** (2 * depth) + n_classes))
    return DenseTreeParams(
        depth, n_features, n_classes,
        rng.uniform(-bound_internal, bound_internal, size=(m, n_features)),
        rng.uniform(-bound_internal, bound_internal, size=(m, n_features)),
        rng.uniform(-bound_leaf, bound_leaf, size=(n_leaves, n_classes)),
    )


def adam_step(params: DenseTreeParams, state: AdamState, grads: GradTriple,
              lr_index: float, lr_values: float, lr_leaf: float):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    t = state.t + 1
    bc1 = 1.0 - ADAM_BETA1 ** t
    bc2 = 1.0 - ADAM_BETA2 ** t

    def upd(theta, m, v, g, lr):
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {theta.shape}")
        m = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g
        v = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g
        theta = theta - lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
        return theta, m, v

    I, mi, vi = upd(params.select_logits, state.m_select, state.v_select,
                    grads.d_select_logits, lr_index)
    T, mt, vt = upd(params.thresholds, state.m_thresh, state.v_thresh,
                    grads.d_thresholds, lr_values)
    L, ml, vl = upd(params.leaf_logits, state.m_leaf, state.v_leaf,
                    grads.d_leaf_logits, lr_leaf)
    new_params = DenseTreeParams(params.depth, params.n_features, params.n_classes, I, T, L)
    return new_params, AdamState(mi, vi, mt, vt, ml, vl, t)


def swa_average(checkpoints: list[DenseTreeParams]) -> DenseTreeParams:
    """Elementwise mean of parameter checkpoints."""
    if not checkpoints:
        raise ValueError("swa_average requires at least one checkpoint")
    first = checkpoints[0]
    return DenseTreeParams(
        first.depth, first.n_features, first.n_classes,
        np.mean([p.select_logits for p in checkpoints], axis=0),
        np.mean([p.thresholds for p in checkpoints], axis=0),
        np.mean([p.leaf_logits for p in checkpoints], axis=0),
    )


@dataclass
class RestartHistory:
    train_losses: list[float]
    val_losses: list[float]
    best_epoch: int      # 1-based
    best_val_loss: float

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
        }


@dataclass
class FitReport:
    histories: list[RestartHistory]
    best_restart: int
    best_epoch: int
    best_val_loss: float
    fit_seconds: float
    params: DenseTreeParams
    tree: VanillaTree          # hardened and pruned
    train_accuracy: float
    val_accuracy: float
    tree_size: int

    def summary_dict(self) -> dict:
        """JSON-friendly summary; excludes wall-clock so files stay
        byte-identical across reruns with the same seed."""
        return {
            "best_restart": self.best_restart,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "train_accuracy": self.train_accuracy,
            "val_accuracy": self.val_accuracy,
            "tree_size": self.tree_size,
            "histories": [h.to_dict() for h in self.histories],
        }


def _minibatches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(train_data: Dataset, cfg: TrainConfig, val_data: Dataset | None = None) -> FitReport:
    """Fit a dense tree; returns the best checkpoint across restarts.

    ``train_data`` must already be preprocessed (numeric, finite).  When
    ``val_data`` is omitted, a seed-derived 20% slice of ``train_data`` is
    held out for early stopping.
    """
    t0 = time.perf_counter()
    if val_data is None:
        n = train_data.n_rows
        rng = np.random.default_rng(cfg.seed)
        perm = rng.permutation(n)
        n_val = max(1, int(n * 0.2))
        val_data = train_data.select(perm[:n_val])
        train_data = train_data.select(perm[n_val:])

    X, y = train_data.X, train_data.y
    X_val, y_val = val_data.X, val_data.y
    classes_present = np.unique(y)
    if classes_present.size < 2:
        raise ValueError("training split must contain at least 2 classes")
    n_features, n_classes = train_data.n_features, train_data.n_classes

    best = None  # (val_loss, restart, epoch, params, history)
    histories: list[RestartHistory] = []

    for restart in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + restart)
        params = init_params(cfg.depth, n_features, n_classes, rng)
        state = AdamState.zeros_like(params)
        checkpoints: list[DenseTreeParams] = []
        train_losses: list[float] = []
        val_losses: list[float] = []
        r_best_loss, r_best_epoch, r_best_params = np.inf, 0, None

        for epoch in range(1, cfg.epochs + 1):
            loss_sum = 0.0
            for batch in _minibatches(X.shape[0], cfg.batch_size, rng):
                loss, _, grads = loss_and_gradients(
                    params, X[batch], y[batch], cfg.loss, ForwardMode.HARD)
                if not np.isfinite(loss):
                    raise TrainingDivergedError(restart, epoch)
                loss_sum += loss * batch.size
                try:
                    params, state = adam_step(
                        params, state, grads, cfg.lr_index, cfg.lr_values, cfg.lr_leaf)
                except ValueError as exc:  # non-finite parameters after the update
                    raise TrainingDivergedError(restart, epoch) from exc
            train_losses.append(loss_sum / X.shape[0])

            checkpoints.append(params)
            if len(checkpoints) > cfg.swa_window:
                checkpoints.pop(0)
            averaged = swa_average(checkpoints)
            val_probs = tree_pass(averaged, X_val, ForwardMode.HARD)
            val_loss = batch_loss(val_probs, y_val, cfg.loss)
            if not np.isfinite(val_loss):
                raise TrainingDivergedError(restart, epoch)
            val_losses.append(val_loss)

            if val_loss < r_best_loss:
                r_best_loss, r_best_epoch, r_best_params = val_loss, epoch, averaged
            if epoch - r_best_epoch >= cfg.patience:
                break

        histories.append(RestartHistory(train_losses, val_losses, r_best_epoch, r_best_loss))
        if best is None or r_best_loss < best[0]:
            best = (r_best_loss, restart, r_best_epoch, r_best_params)

    best_loss, best_restart, best_epoch, best_params = best
    tree = prune_zero_branches(to_vanilla(best_params), X)
    train_acc = float((tree.predict(X) == y).mean())
    val_acc = float((tree.predict(X_val) == y_val).mean())
    return FitReport(
        histories=histories,
        best_restart=best_restart,
        best_epoch=best_epoch,
        best_val_loss=float(best_loss),
        fit_seconds=time.perf_counter() - t0,
        params=best_params,
        tree=tree,
        train_accuracy=train_acc,
        val_accuracy=val_acc,
        tree_size=count_nodes(tree),
    )
