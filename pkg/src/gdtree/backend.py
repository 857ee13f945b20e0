"""Kernel backend selection.

The hot kernels (entmax rows, batched tree forward/backward) exist twice:
numba-compiled loops and a pure-numpy fallback.  The active backend is chosen
once per process from the ``GDTREE_BACKEND`` environment variable:

* unset           -> numba when importable, numpy otherwise
* ``numba``       -> require numba, raise if it cannot be imported
* ``numpy``       -> force the fallback

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

_ENV_VAR = "GDTREE_BACKEND"
_active_name: str | None = None
_active_module = None


def _load_numba_module():
    from . import _kernels_numba

    return _kernels_numba


def _select():
    global _active_name, _active_module
    if _active_module is not None:
        return
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested == "numpy":
        _active_name, _active_module = "numpy", _kernels_numpy
    elif requested == "numba":
        _active_name, _active_module = "numba", _load_numba_module()
    elif requested == "":
        try:
            _active_name, _active_module = "numba", _load_numba_module()
        except ImportError:
            _active_name, _active_module = "numpy", _kernels_numpy
    else:
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {requested!r}"
        )


def active_backend() -> str:
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    _select()
    return _active_name


def entmax_rows(Z):
    _select()
    return _active_module.entmax_rows(Z)


def forward(Q, T, L, X, node_idx, path_bits, hard):
    _select()
    return _active_module.forward(Q, T, L, X, node_idx, path_bits, hard)


def backward(Q, T, X, S, terms, ind, L, node_idx, path_bits, dZ):
    _select()
    return _active_module.backward(Q, T, X, S, terms, ind, L, node_idx, path_bits, dZ)
