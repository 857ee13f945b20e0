"""Reverse-mode differentiation of the fixed graph: tree pass -> softmax -> loss.

The graph is small and known ahead of time, so instead of a general tape the
forward pass stores the handful of intermediates the hand-derived backward
pass needs.  Straight-through semantics: in hard mode the discrete values
(one-hot feature choice, 0/1 splits) flow forward and through the indicator
products, while gradients pass the hardmax and the rounding unchanged and the
local sigmoid/entmax derivatives are taken at their soft outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .losses import LossConfig, logits_loss_and_grad
from .ops import ForwardMode, GradTriple, entmax15_vjp, hardmax_st
from .tree import DenseTreeParams, routing_tables


@dataclass
class TreeCache:
    """Intermediates of one batched forward pass."""

    params: DenseTreeParams
    mode: ForwardMode
    X: np.ndarray
    P: np.ndarray      # entmax of the selection logits, (m, n)
    Q: np.ndarray      # mixing weights used forward (hardened in hard mode)
    S: np.ndarray      # soft split values, (B, m)
    terms: np.ndarray  # per-level branch factors, (B, n_leaves, d)
    ind: np.ndarray    # leaf indicators, (B, n_leaves)
    Z: np.ndarray      # leaf-logit mixtures, (B, c)


def forward_cached(params: DenseTreeParams, X: np.ndarray,
                   mode: ForwardMode) -> TreeCache:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise ValueError(f"X must have shape (batch, {params.n_features}), got {X.shape}")
    routing = routing_tables(params.depth)
    P = backend.entmax_rows(params.select_logits)
    Q = hardmax_st(P) if mode is ForwardMode.HARD else P
    _, S, _, terms, ind, Z = backend.forward(
        Q, params.thresholds, params.leaf_logits, X,
        routing.node_index, routing.path_bit, mode is ForwardMode.HARD,
    )
    return TreeCache(params, mode, X, P, Q, S, terms, ind, Z)


def backward_from_cache(cache: TreeCache, dZ: np.ndarray) -> GradTriple:
    routing = routing_tables(cache.params.depth)
    dQ, dT, dL = backend.backward(
        cache.Q, cache.params.thresholds, cache.X, cache.S,
        cache.terms, cache.ind, cache.params.leaf_logits,
        routing.node_index, routing.path_bit, np.asarray(dZ, dtype=np.float64),
    )
    dI = entmax15_vjp(cache.P, dQ)
    return GradTriple(dI, dT, dL)


def loss_and_gradients(params: DenseTreeParams, X: np.ndarray, y: np.ndarray,
                       loss_cfg: LossConfig, mode: ForwardMode):
    """One fused training step evaluation: mean loss, probabilities, gradients."""
    cache = forward_cached(params, X, mode)
    loss, probs, dZ = logits_loss_and_grad(cache.Z, y, loss_cfg)
    grads = backward_from_cache(cache, dZ)
    return loss, probs, grads
