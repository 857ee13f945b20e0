"""Greedy binary CART learner used as the comparison baseline.

Exhaustive scan over midpoints of consecutive distinct sorted values per
feature, impurity decrease as the split criterion (Gini or entropy), grown
recursively under depth and sample-count constraints.  Emits the same
pointer-style trees as the gradient learner: ``x[f] >= threshold`` goes left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import TreeLeaf, TreeNode, VanillaTree

CRITERIA = ("gini", "entropy")
_GAIN_TIE_TOL = 1e-12


@dataclass
class CartConfig:
    max_depth: int = 9
    criterion: str = "gini"
    min_samples_leaf: int = 1
    min_samples_split: int = 2

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "criterion": self.criterion,
            "min_samples_leaf": self.min_samples_leaf,
            "min_samples_split": self.min_samples_split,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CartConfig":
        return cls(**d)


def impurity(class_counts, criterion: str = "gini") -> float:
    """Gini (1 - sum p^2) or entropy (-sum p log2 p) of a count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    total = counts.sum()
    if total < 1:
        raise ValueError("impurity of an empty node is undefined")
    p = counts / total
    if criterion == "gini":
        return float(1.0 - np.sum(p * p))
    if criterion == "entropy":
        nz = p[p > 0]
        return float(-np.sum(nz * np.log2(nz)))
    raise ValueError(f"criterion must be one of {CRITERIA}")


def _children_impurity(counts_left, counts_right, criterion):
    """Weighted child impurities for whole candidate arrays at once."""
    n_left = counts_left.sum(axis=1)
    n_right = counts_right.sum(axis=1)
    n = n_left + n_right
    with np.errstate(invalid="ignore", divide="ignore"):
        if criterion == "gini":
            imp_l = 1.0 - np.sum((counts_left / n_left[:, None]) ** 2, axis=1)
            imp_r = 1.0 - np.sum((counts_right / n_right[:, None]) ** 2, axis=1)
        else:
            pl = counts_left / n_left[:, None]
            pr = counts_right / n_right[:, None]
            imp_l = -np.sum(np.where(pl > 0, pl * np.log2(np.where(pl > 0, pl, 1.0)), 0.0), axis=1)
            imp_r = -np.sum(np.where(pr > 0, pr * np.log2(np.where(pr > 0, pr, 1.0)), 0.0), axis=1)
    return (n_left * imp_l + n_right * imp_r) / n


def best_split(X: np.ndarray, y: np.ndarray, n_classes: int, cfg: CartConfig):
    """Best (feature, threshold, gain) by exhaustive midpoint scan, or None.

    Gain is the impurity decrease; ties break toward the lower feature index,
    then the lower threshold.  Splits leaving a child under min_samples_leaf
    are skipped; None is returned when no split has positive gain.
    """
    n = y.shape[0]
    if n < cfg.min_samples_split:
        return None
    parent_counts = np.bincount(y, minlength=n_classes)
    parent = impurity(parent_counts, cfg.criterion)
    best = None  # (gain, feature, threshold)

    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1.0
        prefix = np.cumsum(onehot, axis=0)

        cut = np.flatnonzero(xs[:-1] < xs[1:])  # split between i and i+1
        if cut.size == 0:
            continue
        n_low = cut + 1                         # x <  midpoint -> right child
        n_high = n - n_low                      # x >= midpoint -> left child
        ok = (n_low >= cfg.min_samples_leaf) & (n_high >= cfg.min_samples_leaf)
        cut = cut[ok]
        if cut.size == 0:
            continue
        counts_right = prefix[cut]
        counts_left = parent_counts[None, :] - counts_right
        child = _children_impurity(counts_left, counts_right, cfg.criterion)
        gains = parent - child
        i_best = int(np.argmax(gains))          # first max -> lowest threshold
        gain = float(gains[i_best])
        if gain <= _GAIN_TIE_TOL:
            continue
        thr = float((xs[cut[i_best]] + xs[cut[i_best] + 1]) / 2.0)
        if best is None or gain > best[0] + _GAIN_TIE_TOL:
            best = (gain, f, thr)
        # equal-gain candidates keep the earlier (lower) feature index

    if best is None:
        return None
    gain, f, thr = best
    return f, thr, gain


def build(X: np.ndarray, y: np.ndarray, n_classes: int, cfg: CartConfig) -> VanillaTree:
    """Grow a tree by recursive greedy splitting."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training set must be a non-empty 2-D array")

    def leaf(ys) -> TreeLeaf:
        counts = np.bincount(ys, minlength=n_classes).astype(np.float64)
        return TreeLeaf(counts / counts.sum())

    def grow(Xs, ys, depth):
        if depth >= cfg.max_depth or ys.shape[0] < cfg.min_samples_split \
                or np.unique(ys).size == 1:
            return leaf(ys)
        found = best_split(Xs, ys, n_classes, cfg)
        if found is None:
            return leaf(ys)
        f, thr, _ = found
        mask = Xs[:, f] >= thr
        return TreeNode(f, thr, grow(Xs[mask], ys[mask], depth + 1),
                        grow(Xs[~mask], ys[~mask], depth + 1))

    return VanillaTree(root=grow(X, y, 0), n_features=X.shape[1], n_classes=n_classes)
