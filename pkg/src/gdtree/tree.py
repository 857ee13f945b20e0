"""Dense balanced-tree representation and its pointer-style counterpart.

A dense tree of depth ``d`` over ``n`` features and ``c`` classes is three
matrices: feature-selection logits and per-feature thresholds for the
``2^d - 1`` internal nodes (breadth-first order), and class logits for the
``2^d`` leaves.  Splits test ``x[f] >= threshold``; samples passing the test
follow the left child (lower leaf ids).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from . import backend
from .ops import ForwardMode, entmax15, hardmax_st, sigmoid, softmax

MAX_DEPTH = 12  # 2^12 leaves; keeps the dense matrices in sane memory


# ---------------------------------------------------------------------------
# routing calculus
# ---------------------------------------------------------------------------

def node_index(leaf: int, level: int, depth: int) -> int:
    """Breadth-first id of the ancestor of ``leaf`` at ``level`` (1-based)."""
    _check_leaf_level(leaf, level, depth)
    return 2 ** (level - 1) + leaf // 2 ** (depth - (level - 1)) - 1


def path_bit(leaf: int, level: int, depth: int) -> int:
    """0 if ``leaf`` sits in the left subtree of its level-``level`` ancestor,
    1 for the right subtree."""
    _check_leaf_level(leaf, level, depth)
    return (leaf // 2 ** (depth - level)) % 2


def _check_leaf_level(leaf: int, level: int, depth: int) -> None:
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_DEPTH}], got {depth}")
    if not 0 <= leaf < 2 ** depth:
        raise ValueError(f"leaf id {leaf} out of range for depth {depth}")
    if not 1 <= level <= depth:
        raise ValueError(f"level {level} out of range for depth {depth}")


@dataclass(frozen=True)
class LeafRouting:
    """Precomputed ancestor ids and branch bits for every (leaf, level)."""

    node_index: np.ndarray  # (2^d, d) int64
    path_bit: np.ndarray    # (2^d, d) int64


@lru_cache(maxsize=None)
def routing_tables(depth: int) -> LeafRouting:
    n_leaves = 2 ** depth
    idx = np.empty((n_leaves, depth), dtype=np.int64)
    bits = np.empty((n_leaves, depth), dtype=np.int64)
    for leaf in range(n_leaves):
        for level in range(1, depth + 1):
            idx[leaf, level - 1] = node_index(leaf, level, depth)
            bits[leaf, level - 1] = path_bit(leaf, level, depth)
    idx.setflags(write=False)
    bits.setflags(write=False)
    return LeafRouting(idx, bits)


# ---------------------------------------------------------------------------
# dense representation
# ---------------------------------------------------------------------------

@dataclass
class DenseTreeParams:
    """Trainable matrices of a balanced tree."""

    depth: int
    n_features: int
    n_classes: int
    select_logits: np.ndarray  # (2^d - 1, n)
    thresholds: np.ndarray     # (2^d - 1, n)
    leaf_logits: np.ndarray    # (2^d, c)

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}], got {self.depth}")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        m, n_leaves = self.n_internal, self.n_leaves
        for name, a, shape in (
            ("select_logits", self.select_logits, (m, self.n_features)),
            ("thresholds", self.thresholds, (m, self.n_features)),
            ("leaf_logits", self.leaf_logits, (n_leaves, self.n_classes)),
        ):
            a = np.asarray(a, dtype=np.float64)
            if a.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, a)

    @property
    def n_internal(self) -> int:
        return 2 ** self.depth - 1

    @property
    def n_leaves(self) -> int:
        return 2 ** self.depth

    def copy(self) -> "DenseTreeParams":
        return DenseTreeParams(
            self.depth, self.n_features, self.n_classes,
            self.select_logits.copy(), self.thresholds.copy(), self.leaf_logits.copy(),
        )

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "select_logits": self.select_logits.ravel().tolist(),
            "thresholds": self.thresholds.ravel().tolist(),
            "leaf_logits": self.leaf_logits.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DenseTreeParams":
        depth, n, c = d["depth"], d["n_features"], d["n_classes"]
        m, n_leaves = 2 ** depth - 1, 2 ** depth
        return cls(
            depth, n, c,
            np.array(d["select_logits"], dtype=np.float64).reshape(m, n),
            np.array(d["thresholds"], dtype=np.float64).reshape(m, n),
            np.array(d["leaf_logits"], dtype=np.float64).reshape(n_leaves, c),
        )


# ---------------------------------------------------------------------------
# split functions
# ---------------------------------------------------------------------------

def split_soft(x: np.ndarray, iota_row: np.ndarray, tau_row: np.ndarray) -> float:
    """Soft split value: sigmoid of the mixed feature-minus-threshold gap."""
    x, iota_row, tau_row = (np.asarray(v, dtype=np.float64) for v in (x, iota_row, tau_row))
    if not (x.shape == iota_row.shape == tau_row.shape):
        raise ValueError("x, iota_row and tau_row must have equal lengths")
    return float(sigmoid(float(iota_row @ x - iota_row @ tau_row)))


def split_hard(x: np.ndarray, iota_row: np.ndarray, tau_row: np.ndarray) -> float:
    """Rounded soft split.  Evaluated via the sign of the pre-activation so the
    boundary matches a ``>=`` threshold test exactly (sigmoid(0) = 0.5 rounds up)."""
    x, iota_row, tau_row = (np.asarray(v, dtype=np.float64) for v in (x, iota_row, tau_row))
    if not (x.shape == iota_row.shape == tau_row.shape):
        raise ValueError("x, iota_row and tau_row must have equal lengths")
    gap = float(iota_row @ x - iota_row @ tau_row)
    return 1.0 if gap >= 0.0 else 0.0


def leaf_indicator(x: np.ndarray, leaf: int, params: DenseTreeParams,
                   mode: ForwardMode = ForwardMode.HARD) -> float:
    """Membership weight of one sample in one leaf: the product over levels of
    the split value (left branches) or its complement (right branches)."""
    if not 0 <= leaf < params.n_leaves:
        raise ValueError(f"leaf id {leaf} out of range")
    x = np.asarray(x, dtype=np.float64)
    P = entmax15(params.select_logits)
    Q = hardmax_st(P) if mode is ForwardMode.HARD else P
    prod = 1.0
    for level in range(1, params.depth + 1):
        r = node_index(leaf, level, params.depth)
        if mode is ForwardMode.HARD:
            s = split_hard(x, Q[r], params.thresholds[r])
        else:
            s = split_soft(x, Q[r], params.thresholds[r])
        bit = path_bit(leaf, level, params.depth)
        prod *= s if bit == 0 else 1.0 - s
    return prod


# ---------------------------------------------------------------------------
# batched tree pass
# ---------------------------------------------------------------------------

def tree_pass(params: DenseTreeParams, X: np.ndarray,
              mode: ForwardMode = ForwardMode.HARD) -> np.ndarray:
    """Class probabilities for a batch: softmax over the indicator-weighted
    leaf logits, computed with batched matrix kernels."""
    Z = tree_logits(params, X, mode)
    return softmax(Z, axis=1)


def tree_logits(params: DenseTreeParams, X: np.ndarray,
                mode: ForwardMode = ForwardMode.HARD) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise ValueError(
            f"X must have shape (batch, {params.n_features}), got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    routing = routing_tables(params.depth)
    P = backend.entmax_rows(params.select_logits)
    Q = hardmax_st(P) if mode is ForwardMode.HARD else P
    *_, Z = backend.forward(
        Q, params.thresholds, params.leaf_logits, X,
        routing.node_index, routing.path_bit, mode is ForwardMode.HARD,
    )
    return Z


# ---------------------------------------------------------------------------
# pointer-style trees
# ---------------------------------------------------------------------------

@dataclass
class TreeLeaf:
    distribution: np.ndarray  # (c,) class probabilities


@dataclass
class TreeNode:
    feature_index: int
    threshold: float
    left: Union["TreeNode", TreeLeaf]   # taken when x[feature] >= threshold
    right: Union["TreeNode", TreeLeaf]  # taken when x[feature] <  threshold


@dataclass
class VanillaTree:
    """Plain decision tree with per-leaf class distributions.

    Not necessarily balanced.  Traversal convention: a sample moves to the
    left child iff its value on the node's feature is >= the node threshold.
    """

    root: Union[TreeNode, TreeLeaf]
    n_features: int
    n_classes: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"X must have shape (batch, {self.n_features})")
        out = np.empty((X.shape[0], self.n_classes))
        for i in range(X.shape[0]):
            node = self.root
            while isinstance(node, TreeNode):
                node = node.left if X[i, node.feature_index] >= node.threshold else node.right
            out[i] = node.distribution
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def depth(self) -> int:
        def rec(node):
            if isinstance(node, TreeLeaf):
                return 0
            return 1 + max(rec(node.left), rec(node.right))

        return rec(self.root)

    # -- serialization ------------------------------------------------------

    FORMAT_VERSION = 1

    def to_dict(self) -> dict:
        nodes: list[dict] = []
        leaves: list[dict] = []

        def rec(node) -> dict:
            if isinstance(node, TreeLeaf):
                leaves.append({"distribution": node.distribution.tolist()})
                return {"leaf": len(leaves) - 1}
            me = {
                "feature_index": int(node.feature_index),
                "threshold": float(node.threshold),
            }
            nodes.append(me)
            slot = len(nodes) - 1
            me["left"] = rec(node.left)
            me["right"] = rec(node.right)
            return {"node": slot}

        rec(self.root)
        return {
            "format_version": self.FORMAT_VERSION,
            "depth": self.depth(),
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "nodes": nodes,
            "leaves": leaves,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VanillaTree":
        if d.get("format_version") != cls.FORMAT_VERSION:
            raise ValueError(f"unsupported tree format_version {d.get('format_version')!r}")
        leaves = [TreeLeaf(np.array(v["distribution"], dtype=np.float64)) for v in d["leaves"]]

        def build(ref: dict):
            if "leaf" in ref:
                return leaves[ref["leaf"]]
            spec = d["nodes"][ref["node"]]
            return TreeNode(
                feature_index=spec["feature_index"],
                threshold=spec["threshold"],
                left=build(spec["left"]),
                right=build(spec["right"]),
            )

        root = build({"node": 0} if d["nodes"] else {"leaf": 0})
        return cls(root=root, n_features=d["n_features"], n_classes=d["n_classes"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "VanillaTree":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def to_vanilla(params: DenseTreeParams) -> VanillaTree:
    """Harden dense parameters into an equivalent plain tree.

    Per internal node the feature is the argmax of the entmax-transformed
    selection row (ties to the lowest index), the threshold is that feature's
    entry of the threshold row, and each leaf stores the softmax of its logits.
    """
    # same entmax implementation as tree_pass, so feature choices never diverge
    P = backend.entmax_rows(params.select_logits)
    features = np.argmax(P, axis=1)

    def build(node_id: int, level: int):
        if level == params.depth:
            leaf = node_id - params.n_internal
            return TreeLeaf(softmax(params.leaf_logits[leaf]))
        f = int(features[node_id])
        return TreeNode(
            feature_index=f,
            threshold=float(params.thresholds[node_id, f]),
            left=build(2 * node_id + 1, level + 1),
            right=build(2 * node_id + 2, level + 1),
        )

    return VanillaTree(root=build(0, 0), n_features=params.n_features,
                       n_classes=params.n_classes)


def prune_zero_branches(tree: VanillaTree, X_train: np.ndarray) -> VanillaTree:
    """Drop every branch that receives no training samples.

    A node whose left (right) child sees zero rows of ``X_train`` is replaced
    by its right (left) child, bottom-up.  Predictions on ``X_train`` are
    unchanged and the node count never increases.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    if X_train.ndim != 2 or X_train.shape[0] == 0:
        raise ValueError("X_train must be a non-empty 2-D array")
    if X_train.shape[1] != tree.n_features:
        raise ValueError(f"X_train must have {tree.n_features} columns")

    def rec(node, X):
        if isinstance(node, TreeLeaf):
            return TreeLeaf(node.distribution.copy())
        mask = X[:, node.feature_index] >= node.threshold
        n_left = int(mask.sum())
        if n_left == 0:
            return rec(node.right, X)
        if n_left == X.shape[0]:
            return rec(node.left, X)
        return TreeNode(node.feature_index, node.threshold,
                        rec(node.left, X[mask]), rec(node.right, X[~mask]))

    return VanillaTree(root=rec(tree.root, X_train),
                       n_features=tree.n_features, n_classes=tree.n_classes)


def count_nodes(tree: VanillaTree) -> int:
    """Total node count, internal nodes plus leaves."""

    def rec(node) -> int:
        if isinstance(node, TreeLeaf):
            return 1
        return 1 + rec(node.left) + rec(node.right)

    return rec(tree.root)
