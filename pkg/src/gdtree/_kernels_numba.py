"""Numba-compiled twins of the kernels in ``_kernels_numpy``.

Import of this module is attempted lazily by ``backend``; anything that fails
here simply drops the process back to the numpy path.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ENTMAX_MAX_ITER = 60


@njit(cache=True)
def entmax_rows(Z):
    m, n = Z.shape
    P = np.empty((m, n))
    inv_sqrt_k = 1.0 / np.sqrt(n)
    for r in range(m):
        zmax = Z[r, 0]
        for i in range(1, n):
            if Z[r, i] > zmax:
                zmax = Z[r, i]
        zmax *= 0.5
        lo = zmax - 1.0
        hi = zmax - inv_sqrt_k
        for _ in range(ENTMAX_MAX_ITER):
            mid = 0.5 * (lo + hi)
            total = 0.0
            for i in range(n):
                v = 0.5 * Z[r, i] - mid
                if v > 0.0:
                    total += v * v
            if total >= 1.0:
                lo = mid
            else:
                hi = mid
        tau = 0.5 * (lo + hi)
        ssum = 0.0
        for i in range(n):
            v = 0.5 * Z[r, i] - tau
            p = v * v if v > 0.0 else 0.0
            P[r, i] = p
            ssum += p
        for i in range(n):
            P[r, i] /= ssum
    return P


@njit(cache=True)
def forward(Q, T, L, X, node_idx, path_bits, hard):
    B, n = X.shape
    m = Q.shape[0]
    n_leaves, d = node_idx.shape
    c = L.shape[1]

    A = np.empty((B, m))
    S = np.empty((B, m))
    Shat = np.empty((B, m))
    for b in range(B):
        for r in range(m):
            acc = 0.0
            for i in range(n):
                acc += Q[r, i] * (X[b, i] - T[r, i])
            A[b, r] = acc
            if acc >= 0.0:
                S[b, r] = 1.0 / (1.0 + np.exp(-acc))
            else:
                ex = np.exp(acc)
                S[b, r] = ex / (1.0 + ex)
            if hard:
                Shat[b, r] = 1.0 if acc >= 0.0 else 0.0
            else:
                Shat[b, r] = S[b, r]

    terms = np.empty((B, n_leaves, d))
    ind = np.empty((B, n_leaves))
    Z = np.zeros((B, c))
    for b in range(B):
        for l in range(n_leaves):
            prod = 1.0
            for j in range(d):
                v = Shat[b, node_idx[l, j]]
                t = v if path_bits[l, j] == 0 else 1.0 - v
                terms[b, l, j] = t
                prod *= t
            ind[b, l] = prod
            if prod != 0.0:
                for k in range(c):
                    Z[b, k] += L[l, k] * prod
    return A, S, Shat, terms, ind, Z


@njit(cache=True)
def backward(Q, T, X, S, terms, ind, L, node_idx, path_bits, dZ):
    B, m = S.shape
    n = X.shape[1]
    n_leaves, d = node_idx.shape
    c = L.shape[1]

    dL = np.zeros((n_leaves, c))
    dShat = np.zeros((B, m))
    suffix = np.empty(d)
    for b in range(B):
        for l in range(n_leaves):
            g = 0.0
            for k in range(c):
                dL[l, k] += ind[b, l] * dZ[b, k]
                g += dZ[b, k] * L[l, k]
            if g == 0.0:
                continue
            acc = 1.0
            for j in range(d - 1, -1, -1):
                suffix[j] = acc
                acc *= terms[b, l, j]
            prefix = 1.0
            for j in range(d):
                dterm = g * prefix * suffix[j]
                r = node_idx[l, j]
                if path_bits[l, j] == 0:
                    dShat[b, r] += dterm
                else:
                    dShat[b, r] -= dterm
                prefix *= terms[b, l, j]

    dQ = np.zeros((m, n))
    dT = np.zeros((m, n))
    col = np.zeros(m)
    for b in range(B):
        for r in range(m):
            da = dShat[b, r] * S[b, r] * (1.0 - S[b, r])
            col[r] += da
            for i in range(n):
                dQ[r, i] += da * (X[b, i] - T[r, i])
    for r in range(m):
        for i in range(n):
            dT[r, i] = -Q[r, i] * col[r]
    return dQ, dT, dL
