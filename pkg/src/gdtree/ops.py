"""Elementwise and simplex operations used by the tree forward/backward pass.

The hard operations (``hardmax_st``, ``round_st``) are straight-through: their
forward value is discrete, while the gradient contract is the identity.  The
backward engine realizes this by routing upstream gradients past them
unchanged, equivalent to subtracting a stop-gradient residual ``soft - hard``
from the soft value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

ENTMAX_MAX_ITER = 60  # bisection on a unit-width bracket: ~1e-18 final width
PROB_FLOOR = 1e-12  # probabilities are clamped to [floor, 1-floor] before logs


class ForwardMode(Enum):
    """HARD applies the discrete corrections in the forward pass; SOFT runs
    the fully differentiable surrogate (no hardmax, no rounding)."""

    HARD = "hard"
    SOFT = "soft"


@dataclass
class GradTriple:
    """Gradients of the batch loss with respect to the three parameter
    matrices of a dense tree."""

    d_select_logits: np.ndarray
    d_thresholds: np.ndarray
    d_leaf_logits: np.ndarray


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")


def entmax15(logits: np.ndarray) -> np.ndarray:
    """1.5-entmax: map logits to a (possibly sparse) probability vector.

    Solves ``p_i = max(z_i/2 - tau, 0)^2`` with ``sum(p) = 1`` by bisection on
    ``tau`` (absolute tolerance 1e-8, at most 60 iterations), then renormalizes
    so the simplex constraint holds to machine precision.  Accepts a single
    vector or a matrix of row vectors.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.size == 0:
        raise ValueError("entmax15 requires a non-empty input")
    _check_finite(z, "entmax15 input")
    single = z.ndim == 1
    if single:
        z = z[None, :]
    if z.ndim != 2:
        raise ValueError("entmax15 expects a vector or a matrix of rows")

    half = z / 2.0
    zmax = half.max(axis=1)
    k = z.shape[1]
    lo = zmax - 1.0                      # sum of squares >= 1 here
    hi = zmax - 1.0 / np.sqrt(k)         # sum of squares <= 1 here
    # the full iteration budget narrows the bracket to ~1e-18, far below
    # the 1e-8 tolerance promise; a smooth map matters for finite differences
    for _ in range(ENTMAX_MAX_ITER):
        mid = 0.5 * (lo + hi)
        total = np.sum(np.maximum(half - mid[:, None], 0.0) ** 2, axis=1)
        ge = total >= 1.0
        lo = np.where(ge, mid, lo)
        hi = np.where(ge, hi, mid)
    tau = 0.5 * (lo + hi)
    p = np.maximum(half - tau[:, None], 0.0) ** 2
    p /= p.sum(axis=1, keepdims=True)
    return p[0] if single else p


def entmax15_vjp(output: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product of ``entmax15`` at a computed output.

    Uses the support-restricted Jacobian ``J = diag(s) - s s^T / sum(s)`` with
    ``s_i = sqrt(p_i)`` on the support and 0 elsewhere.  Works on single
    vectors or matrices of rows.
    """
    p = np.asarray(output, dtype=np.float64)
    g = np.asarray(upstream, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: output {p.shape} vs upstream {g.shape}")
    single = p.ndim == 1
    if single:
        p, g = p[None, :], g[None, :]
    s = np.sqrt(p)
    ssum = s.sum(axis=1, keepdims=True)
    dot = (s * g).sum(axis=1, keepdims=True)
    out = s * g - s * (dot / ssum)
    return out[0] if single else out


def hardmax_st(logits: np.ndarray) -> np.ndarray:
    """One-hot vector at the argmax; ties go to the lowest index.

    Straight-through: the gradient contract is the identity.
    """
    v = np.asarray(logits, dtype=np.float64)
    _check_finite(v, "hardmax_st input")
    single = v.ndim == 1
    if single:
        v = v[None, :]
    out = np.zeros_like(v)
    out[np.arange(v.shape[0]), np.argmax(v, axis=1)] = 1.0
    return out[0] if single else out


def round_st(s):
    """Round to the nearest integer with the half point rounding up, so the
    hard split agrees with a ``>=`` threshold test at the boundary.

    Straight-through: the gradient contract is the identity.
    """
    a = np.asarray(s, dtype=np.float64)
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError("round_st expects values in [0, 1]")
    out = np.where(a >= 0.5, 1.0, 0.0)
    return float(out) if np.isscalar(s) or a.ndim == 0 else out


def sigmoid(x):
    """Logistic function 1 / (1 + exp(-x))."""
    a = np.asarray(x, dtype=np.float64)
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ex = np.exp(a[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if np.isscalar(x) or a.ndim == 0 else out


def sigmoid_grad(y):
    """Derivative of the logistic function expressed via its output y."""
    return y * (1.0 - y)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shift-invariant softmax along ``axis``."""
    a = np.asarray(z, dtype=np.float64)
    shifted = a - a.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)
