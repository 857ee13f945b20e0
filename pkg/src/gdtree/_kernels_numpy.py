"""Pure-numpy implementations of the batched tree kernels.

These are the fallback path when the numba backend is disabled or
unavailable.  The numba kernels in ``_kernels_numba`` compute the same
quantities; hard-mode routing decisions and leaf logits are bit-identical
across the two backends, soft-mode values agree to rounding error.
"""

from __future__ import annotations

import numpy as np

ENTMAX_MAX_ITER = 60


def entmax_rows(Z: np.ndarray) -> np.ndarray:
    """Row-wise 1.5-entmax by vectorized bisection, then renormalization."""
    half = Z / 2.0
    zmax = half.max(axis=1)
    k = Z.shape[1]
    lo = zmax - 1.0
    hi = zmax - 1.0 / np.sqrt(k)
    # run the full budget: the bracket narrows to ~1e-18, far below the
    # 1e-8 tolerance promise, keeping the map smooth for finite differences
    for _ in range(ENTMAX_MAX_ITER):
        mid = 0.5 * (lo + hi)
        total = np.sum(np.maximum(half - mid[:, None], 0.0) ** 2, axis=1)
        ge = total >= 1.0
        lo = np.where(ge, mid, lo)
        hi = np.where(ge, hi, mid)
    tau = 0.5 * (lo + hi)
    P = np.maximum(half - tau[:, None], 0.0) ** 2
    P /= P.sum(axis=1, keepdims=True)
    return P


def _sigmoid(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ex = np.exp(a[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def forward(Q, T, L, X, node_idx, path_bits, hard):
    """Batched tree pass up to (not including) the final softmax.

    Q : (m, n) mixing weights per internal node (one-hot rows in hard mode)
    T : (m, n) per-feature thresholds
    L : (n_leaves, c) leaf class logits
    X : (B, n) inputs
    node_idx, path_bits : (n_leaves, d) routing tables
    Returns (A, S, Shat, terms, ind, Z).
    """
    A = X @ Q.T - (Q * T).sum(axis=1)[None, :]
    S = _sigmoid(A)
    # hard split: rounding the logistic equals testing the pre-activation sign
    Shat = (A >= 0.0).astype(np.float64) if hard else S
    G = Shat[:, node_idx]  # (B, n_leaves, d)
    terms = np.where(path_bits[None, :, :] == 0, G, 1.0 - G)
    ind = terms.prod(axis=2)
    Z = ind @ L
    return A, S, Shat, terms, ind, Z


def backward(Q, T, X, S, terms, ind, L, node_idx, path_bits, dZ):
    """Reverse pass from dZ = d(loss)/d(leaf logits input) to parameter grads.

    Straight-through nodes pass gradients unchanged; the sigmoid derivative is
    evaluated at the soft activations S.  Returns (dQ, dT, dL) where dQ is the
    gradient with respect to the post-entmax mixing weights.
    """
    B, m = S.shape
    n_leaves, d = node_idx.shape

    dL = ind.T @ dZ
    dInd = dZ @ L.T  # (B, n_leaves)

    # leave-one-out products over the depth axis (safe with exact zeros)
    prefix = np.ones_like(terms)
    if d > 1:
        np.cumprod(terms[:, :, :-1], axis=2, out=prefix[:, :, 1:])
    suffix = np.ones_like(terms)
    if d > 1:
        suffix[:, :, :-1] = np.cumprod(terms[:, :, :0:-1], axis=2)[:, :, ::-1]
    signed = dInd[:, :, None] * prefix * suffix * (1.0 - 2.0 * path_bits)[None, :, :]

    # scatter into nodes: at depth j the leaves sharing an ancestor form
    # contiguous blocks, so the scatter is a reshape-sum per level
    dShat = np.zeros_like(S)
    for j in range(1, d + 1):
        level_nodes = 1 << (j - 1)
        block = n_leaves // level_nodes
        seg = signed[:, :, j - 1].reshape(B, level_nodes, block).sum(axis=2)
        dShat[:, level_nodes - 1 : 2 * level_nodes - 1] += seg

    da = dShat * S * (1.0 - S)
    col = da.sum(axis=0)
    dT = -Q * col[:, None]
    dQ = da.T @ X - col[:, None] * T
    return dQ, dT, dL
