# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels.  Semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.uint8_t u8


def reach(const i64[::1] indptr, const i32[::1] indices, const u8[::1] labels,
          int mask, seeds, allowed=None):
    """Worklist closure from ``seeds`` over edges whose label bit is in ``mask``.

    Returns ``(order, pops)``: nodes in visiting order and the number of
    worklist pops (equal to ``len(order)``; each node is enqueued once).
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[u8, ndim=1] seen_arr = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] seen = seen_arr
    cdef cnp.ndarray[i32, ndim=1] queue_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] queue = queue_arr
    cdef const u8[::1] ok
    cdef bint restrict = allowed is not None
    if restrict:
        ok = allowed
    cdef Py_ssize_t head = 0, tail = 0, e
    cdef i32 v, w
    cdef u8 m = <u8>mask
    for s in seeds:
        v = s
        if v < 0 or v >= n:
            raise IndexError(f"seed {v} out of range")
        if not seen[v]:
            seen[v] = 1
            queue[tail] = v
            tail += 1
    with nogil:
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                if labels[e] & m:
                    w = indices[e]
                    if not seen[w] and (not restrict or ok[w]):
                        seen[w] = 1
                        queue[tail] = w
                        tail += 1
    return queue_arr[:tail].copy(), head


def tarjan_scc(const i64[::1] indptr, const i32[::1] indices):
    """Iterative Tarjan.  Returns ``(comp, ncomp)``; components are numbered
    in completion order, i.e. reverse topological order of the condensation."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[i32, ndim=1] comp_arr = np.full(n, -1, dtype=np.int32)
    cdef i32[::1] comp = comp_arr
    cdef cnp.ndarray[i32, ndim=1] index_arr = np.full(n, -1, dtype=np.int32)
    cdef i32[::1] index = index_arr
    cdef cnp.ndarray[i32, ndim=1] low_arr = np.zeros(n, dtype=np.int32)
    cdef i32[::1] low = low_arr
    cdef cnp.ndarray[u8, ndim=1] on_arr = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] onstack = on_arr
    cdef cnp.ndarray[i32, ndim=1] stack_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] stack = stack_arr
    cdef cnp.ndarray[i32, ndim=1] cs_node_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] cs_node = cs_node_arr
    cdef cnp.ndarray[i64, ndim=1] cs_edge_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] cs_edge = cs_edge_arr
    cdef Py_ssize_t sp = 0, csp = 0, root
    cdef i32 counter = 0, ncomp = 0, v, w, x
    cdef i64 e
    with nogil:
        for root in range(n):
            if index[root] != -1:
                continue
            index[root] = counter
            low[root] = counter
            counter += 1
            stack[sp] = <i32>root
            sp += 1
            onstack[root] = 1
            cs_node[csp] = <i32>root
            cs_edge[csp] = indptr[root]
            csp += 1
            while csp > 0:
                v = cs_node[csp - 1]
                e = cs_edge[csp - 1]
                if e < indptr[v + 1]:
                    cs_edge[csp - 1] = e + 1
                    w = indices[e]
                    if index[w] == -1:
                        index[w] = counter
                        low[w] = counter
                        counter += 1
                        stack[sp] = w
                        sp += 1
                        onstack[w] = 1
                        cs_node[csp] = w
                        cs_edge[csp] = indptr[w]
                        csp += 1
                    elif onstack[w] and index[w] < low[v]:
                        low[v] = index[w]
                else:
                    csp -= 1
                    if csp > 0:
                        x = cs_node[csp - 1]
                        if low[v] < low[x]:
                            low[x] = low[v]
                    if low[v] == index[v]:
                        while True:
                            sp -= 1
                            w = stack[sp]
                            onstack[w] = 0
                            comp[w] = ncomp
                            if w == v:
                                break
                        ncomp += 1
    return comp_arr, ncomp


def dag_reach(const i64[::1] indptr, const i32[::1] indices, seeds):
    """Breadth-first closure from ``seeds``; returns ``(order, pops)``."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[u8, ndim=1] seen_arr = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] seen = seen_arr
    cdef cnp.ndarray[i32, ndim=1] queue_arr = np.empty(n, dtype=np.int32)
    cdef i32[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0, e
    cdef i32 v, w
    for s in seeds:
        v = s
        if v < 0 or v >= n:
            raise IndexError(f"seed {v} out of range")
        if not seen[v]:
            seen[v] = 1
            queue[tail] = v
            tail += 1
    with nogil:
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if not seen[w]:
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
    return queue_arr[:tail].copy(), head
