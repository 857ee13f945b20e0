"""Deterministic synthetic datasets bundled with the package.

``xor_grid`` is the classic case where greedy stumps fail but a depth-2 tree
is perfect.  The two ``*_like`` generators are structural stand-ins for small
public tabular benchmarks (matched row/feature counts, class balance, and
difficulty) for environments where the originals cannot be downloaded;
``scripts/fetch_uci.py`` grabs the real files when network access exists.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset


def xor_grid(n_side: int = 20) -> Dataset:
    """Noiseless XOR labels on an n_side x n_side grid over (0, 1)^2."""
    centers = (np.arange(n_side) + 0.5) / n_side
    g0, g1 = np.meshgrid(centers, centers, indexing="ij")
    X = np.column_stack([g0.ravel(), g1.ravel()])
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(np.int64)
    return Dataset.from_arrays(X, y, n_classes=2,
                               feature_names=["x1", "x2"],
                               class_names=["0", "1"])


def banknote_like(seed: int = 20240601) -> Dataset:
    """1372 rows x 4 continuous features, two nearly separable classes.

    Labels follow a fixed depth-3 axis-aligned rule with branch-dependent
    thresholds, plus 1.5% label noise, so tree learners top out around
    0.98 macro F1 -- the difficulty profile of the banknote benchmark.
    """
    rng = np.random.default_rng(seed)
    n = 1372
    Z = rng.normal(size=(n, 4))

    y = np.empty(n, dtype=np.int64)
    for i in range(n):
        z0, z1, z2, z3 = Z[i]
        if z0 >= 0.18:
            if z1 >= -0.6:
                y[i] = 0
            else:
                y[i] = 0 if z2 >= 0.75 else 1
        else:
            if z1 >= 0.55:
                y[i] = 1 if z3 >= -0.25 else 0
            else:
                y[i] = 1
    flip = rng.random(n) < 0.015
    y[flip] ^= 1

    X = np.column_stack([
        2.85 * Z[:, 0] + 0.44,
        5.87 * Z[:, 1] + 1.92,
        4.31 * Z[:, 2] + 1.40,
        2.10 * Z[:, 3] - 1.19,
    ])
    return Dataset.from_arrays(X, y, n_classes=2,
                               feature_names=["variance", "skewness", "curtosis", "entropy"],
                               class_names=["0", "1"])


def transfusion_like(seed: int = 20240602) -> Dataset:
    """748 rows x 4 count-style features with heavy class overlap.

    Exactly 178 positives out of 748 (23.8% minority share, which trips the
    default SMOTE trigger for binary data).  The positive propensity is a
    noisy function of the features, so achievable macro F1 sits near 0.6.
    """
    rng = np.random.default_rng(seed)
    n = 748
    recency = np.floor(rng.gamma(shape=1.6, scale=6.5, size=n)).clip(0, 74)
    frequency = np.floor(1.0 + rng.gamma(shape=1.3, scale=4.2, size=n)).clip(1, 50)
    monetary = 250.0 * frequency
    time_months = np.floor(frequency * 2.2 + rng.gamma(shape=2.0, scale=9.0, size=n)).clip(2, 98)

    score = (1.15 * np.log1p(frequency)
             - 0.75 * np.log1p(recency)
             - 0.45 * np.log1p(time_months - 2.0 * frequency + 60.0)
             + 1.45 * rng.normal(size=n))
    order = np.argsort(-score, kind="stable")
    y = np.zeros(n, dtype=np.int64)
    y[order[:178]] = 1

    X = np.column_stack([recency, frequency, monetary, time_months])
    return Dataset.from_arrays(X, y, n_classes=2,
                               feature_names=["recency", "frequency", "monetary", "time"],
                               class_names=["0", "1"])


def write_csv(dataset: Dataset, path) -> None:
    """Write a numeric dataset to CSV with original class labels."""
    with open(path, "w") as fh:
        fh.write(",".join(dataset.feature_names + [dataset.target_name]) + "\n")
        X = dataset.X
        for i in range(dataset.n_rows):
            cells = [repr(float(v)) for v in X[i]]
            cells.append(dataset.class_names[dataset.y[i]])
            fh.write(",".join(cells) + "\n")
