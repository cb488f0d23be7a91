"""Hot graph kernels: label-masked reachability, Tarjan SCC, DAG closure.

The compiled implementation is used when it was built and imports cleanly;
set ``FPMSLICE_PURE_PYTHON=1`` to force the pure-Python fallback.  Both
backends take CSR adjacency (``indptr`` int64, ``indices`` int32, per-edge
``labels`` uint8 bitmasks) and return numpy arrays.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["compiled"] = _ckernels

if _ckernels is not None and os.environ.get("FPMSLICE_PURE_PYTHON") != "1":
    BACKEND = "compiled"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def reach(indptr, indices, labels, mask, seeds, allowed=None, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.reach(indptr, indices, labels, int(mask), list(seeds), allowed)


def tarjan_scc(indptr, indices, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.tarjan_scc(indptr, indices)


def dag_reach(indptr, indices, seeds, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.dag_reach(indptr, indices, list(seeds))


def csr(n: int, src, dst, labels=None):
    """Build CSR arrays from parallel edge lists (stable in edge order)."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int32)
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n) if len(src) else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.ascontiguousarray(dst[order], dtype=np.int32)
    if labels is None:
        lab = np.ones(len(indices), dtype=np.uint8)
    else:
        lab = np.ascontiguousarray(np.asarray(labels, dtype=np.uint8)[order])
    return indptr, indices, lab


__all__ = ["BACKEND", "BACKENDS", "reach", "tarjan_scc", "dag_reach", "csr"]
