"""Classification losses over predicted class distributions.

Cross-entropy, optionally scaled by a focal factor ``(1 - p_true)^gamma`` to
down-weight easy samples, optionally augmented by a Poly-1 term
``epsilon * (1 - p_true)``.  Probabilities are clamped away from 0 and 1
before any logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import PROB_FLOOR, softmax

LOSS_KINDS = ("ce", "focal")


@dataclass
class LossConfig:
    kind: str = "ce"
    focal_gamma: float = 3.0
    poly_enabled: bool = False
    poly_epsilon: float = 2.0

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {self.kind!r}")
        if not np.isfinite(self.focal_gamma) or self.focal_gamma < 0:
            raise ValueError("focal_gamma must be finite and >= 0")
        if not np.isfinite(self.poly_epsilon):
            raise ValueError("poly_epsilon must be finite")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "focal_gamma": self.focal_gamma,
            "poly_enabled": self.poly_enabled,
            "poly_epsilon": self.poly_epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LossConfig":
        return cls(**d)


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)


def _true_class_prob(pred, label) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    if not 0 <= int(label) < pred.shape[-1]:
        raise ValueError(f"label {label} out of range for {pred.shape[-1]} classes")
    return float(_clamp(pred[int(label)]))


def cross_entropy(pred, label) -> float:
    """Negative log-probability of the true class."""
    return -float(np.log(_true_class_prob(pred, label)))


def focal_cross_entropy(pred, label, gamma: float = 3.0) -> float:
    """Cross-entropy scaled by (1 - p_true)^gamma; gamma = 0 recovers plain CE."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    p = _true_class_prob(pred, label)
    return (1.0 - p) ** gamma * -float(np.log(p))


def poly_adjust(base_loss: float, pred, label, epsilon: float) -> float:
    """Poly-1 adjustment: add epsilon * (1 - p_true) to an already computed loss."""
    p = _true_class_prob(pred, label)
    return float(base_loss) + epsilon * (1.0 - p)


def per_sample_loss(pred, label, cfg: LossConfig) -> float:
    if cfg.kind == "focal":
        loss = focal_cross_entropy(pred, label, cfg.focal_gamma)
    else:
        loss = cross_entropy(pred, label)
    if cfg.poly_enabled:
        loss = poly_adjust(loss, pred, label, cfg.poly_epsilon)
    return loss


def batch_loss(preds: np.ndarray, labels: np.ndarray, cfg: LossConfig) -> float:
    """Mean per-sample loss over a batch of predicted distributions."""
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels)
    if preds.shape[0] != labels.shape[0]:
        raise ValueError("preds and labels must have equal length")
    if preds.shape[0] == 0:
        raise ValueError("batch_loss requires a non-empty batch")
    return _batch_losses(preds, labels, cfg).mean()


def _batch_losses(preds: np.ndarray, labels: np.ndarray, cfg: LossConfig) -> np.ndarray:
    if labels.min() < 0 or labels.max() >= preds.shape[1]:
        raise ValueError("labels out of range")
    pt = _clamp(preds[np.arange(preds.shape[0]), labels])
    losses = -np.log(pt)
    if cfg.kind == "focal":
        losses = (1.0 - pt) ** cfg.focal_gamma * losses
    if cfg.poly_enabled:
        losses = losses + cfg.poly_epsilon * (1.0 - pt)
    return losses


def logits_loss_and_grad(Z: np.ndarray, labels: np.ndarray, cfg: LossConfig):
    """Mean loss of softmax(Z) and its gradient with respect to Z.

    The gradient carries the 1/batch factor of the mean reduction, so it can
    be fed straight into the tree backward pass.
    """
    Z = np.asarray(Z, dtype=np.float64)
    labels = np.asarray(labels)
    B = Z.shape[0]
    if B == 0:
        raise ValueError("empty batch")
    probs = softmax(Z, axis=1)
    loss = float(_batch_losses(probs, labels, cfg).mean())

    pt_raw = probs[np.arange(B), labels]
    pt = _clamp(pt_raw)
    # d(loss)/d(p_true), clamping treated as pass-through
    if cfg.kind == "focal":
        g = cfg.focal_gamma * (1.0 - pt) ** (cfg.focal_gamma - 1.0) * np.log(pt) \
            - (1.0 - pt) ** cfg.focal_gamma / pt
    else:
        g = -1.0 / pt
    if cfg.poly_enabled:
        g = g - cfg.poly_epsilon
    onehot = np.zeros_like(probs)
    onehot[np.arange(B), labels] = 1.0
    dZ = g[:, None] * pt_raw[:, None] * (onehot - probs) / B
    return loss, probs, dZ
