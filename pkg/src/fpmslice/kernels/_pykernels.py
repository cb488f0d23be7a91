"""Pure-Python graph kernels, used when the compiled module is unavailable."""

from __future__ import annotations

from collections import deque

import numpy as np


def reach(indptr, indices, labels, mask, seeds, allowed=None):
    ptr = indptr.tolist()
    dst = indices.tolist()
    lab = labels.tolist()
    ok = None if allowed is None else allowed.tolist()
    n = len(ptr) - 1
    seen = [False] * n
    queue: deque[int] = deque()
    order: list[int] = []
    for v in seeds:
        v = int(v)
        if v < 0 or v >= n:
            raise IndexError(f"seed {v} out of range")
        if not seen[v]:
            seen[v] = True
            queue.append(v)
    pops = 0
    while queue:
        v = queue.popleft()
        pops += 1
        order.append(v)
        for e in range(ptr[v], ptr[v + 1]):
            if lab[e] & mask:
                w = dst[e]
                if not seen[w] and (ok is None or ok[w]):
                    seen[w] = True
                    queue.append(w)
    return np.asarray(order, dtype=np.int32), pops


def tarjan_scc(indptr, indices):
    ptr = indptr.tolist()
    dst = indices.tolist()
    n = len(ptr) - 1
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = True
        calls = [[root, ptr[root]]]
        while calls:
            frame = calls[-1]
            v, e = frame
            if e < ptr[v + 1]:
                frame[1] = e + 1
                w = dst[e]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    calls.append([w, ptr[w]])
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                calls.pop()
                if calls:
                    x = calls[-1][0]
                    if low[v] < low[x]:
                        low[x] = low[v]
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        onstack[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return np.asarray(comp, dtype=np.int32), ncomp


def dag_reach(indptr, indices, seeds):
    return reach(indptr, indices, np.ones(len(indices), dtype=np.uint8), 1, seeds)
