"""Evaluation metrics: macro F1, accuracy, mean reciprocal rank."""

from __future__ import annotations

import numpy as np


def macro_f1(predictions, labels, n_classes: int) -> float:
    """Unweighted mean of per-class F1 scores.

    A class with no predicted and no true instances contributes an F1 of 0,
    which keeps the score conservative under missing classes.
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have equal length")
    if predictions.size == 0:
        raise ValueError("macro_f1 requires a non-empty input")
    f1s = []
    for k in range(n_classes):
        tp = np.sum((predictions == k) & (labels == k))
        fp = np.sum((predictions == k) & (labels != k))
        fn = np.sum((predictions != k) & (labels == k))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(f1s))


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.size == 0:
        raise ValueError("accuracy requires a non-empty input")
    return float(np.mean(predictions == labels))


def competition_ranks(scores) -> list[int]:
    """Rank descending; ties share the best (lowest) rank, 1-based."""
    scores = np.asarray(scores, dtype=np.float64)
    return [1 + int(np.sum(scores > s)) for s in scores]


def mean_reciprocal_rank(ranks) -> float:
    """Mean of 1/rank over a list of (1-based) ranks."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0:
        raise ValueError("mean_reciprocal_rank requires at least one rank")
    if np.any(ranks < 1):
        raise ValueError("ranks must be >= 1")
    return float(np.mean(1.0 / ranks))
