#!/usr/bin/env python3
"""Timing comparison of the numba kernels against the pure-numpy fallback.

Measures the three hot pieces of a training step (entmax rows, batched
forward, batched backward) on shapes from small to benchmark-sized trees.
At runtime the backend is chosen via the GDTREE_BACKEND environment variable;
here both are imported directly and timed side by side.
"""

import time

import numpy as np

from gdtree import _kernels_numba as knb
from gdtree import _kernels_numpy as knp
from gdtree.ops import hardmax_st
from gdtree.training import init_params
from gdtree.tree import routing_tables

CASES = [
    # (depth, n_features, n_classes, batch)
    (2, 2, 2, 64),
    (7, 4, 2, 64),      # banknote-preset shape
    (8, 10, 2, 64),
    (10, 20, 4, 128),
]


def time_fn(fn, *args, repeat=50):
    fn(*args)  # warm (JIT compile on the numba side)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_case(depth, n, c, batch):
    rng = np.random.default_rng(0)
    params = init_params(depth, n, c, rng)
    X = rng.normal(size=(batch, n))
    dZ = rng.normal(size=(batch, c)) / batch
    routing = routing_tables(depth)
    idx, bits = routing.node_index, routing.path_bit
    T, L = params.thresholds, params.leaf_logits

    rows = {}
    for name, mod in (("numpy", knp), ("numba", knb)):
        P = mod.entmax_rows(params.select_logits)
        Q = hardmax_st(P)
        fwd = mod.forward(Q, T, L, X, idx, bits, True)
        _, S, _, terms, ind, _ = fwd
        rows[name] = (
            time_fn(mod.entmax_rows, params.select_logits),
            time_fn(mod.forward, Q, T, L, X, idx, bits, True),
            time_fn(mod.backward, Q, T, X, S, terms, ind, L, idx, bits, dZ),
        )
    return rows


def main():
    header = (f"{'shape':>22} | {'kernel':>8} | {'numpy':>10} | {'numba':>10} | "
              f"{'speedup':>7}")
    print(header)
    print("-" * len(header))
    for depth, n, c, batch in CASES:
        rows = bench_case(depth, n, c, batch)
        shape = f"d={depth} n={n} c={c} B={batch}"
        for i, kernel in enumerate(("entmax", "forward", "backward")):
            tn, tb = rows["numpy"][i], rows["numba"][i]
            print(f"{shape:>22} | {kernel:>8} | {tn * 1e6:>8.1f}us | "
                  f"{tb * 1e6:>8.1f}us | {tn / tb:>6.1f}x")


if __name__ == "__main__":
    main()
