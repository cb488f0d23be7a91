import random

import numpy as np
import pytest

from fpmslice import kernels
from oracles import bfs, scc_oracle


def random_csr(rng, n, m, nlabels=7):
    src = [rng.randrange(n) for _ in range(m)]
    dst = [rng.randrange(n) for _ in range(m)]
    lab = [1 << rng.randrange(nlabels) for _ in range(m)]
    return src, dst, lab, kernels.csr(n, src, dst, lab)


def test_backend_selection_defaults_to_compiled_when_built():
    assert kernels.BACKEND in kernels.BACKENDS
    assert "python" in kernels.BACKENDS


def test_csr_layout():
    indptr, indices, labels = kernels.csr(3, [2, 0, 0], [1, 2, 1], [4, 1, 2])
    assert indptr.tolist() == [0, 2, 2, 3]
    assert indices.tolist() == [2, 1, 1]
    assert labels.tolist() == [1, 2, 4]


def test_reach_respects_mask_and_allowed(backend):
    indptr, indices, labels = kernels.csr(4, [0, 1, 0], [1, 2, 3], [1, 1, 2])
    order, pops = kernels.reach(indptr, indices, labels, 1, [0], backend=backend)
    assert sorted(order.tolist()) == [0, 1, 2] and pops == 3
    allowed = np.array([1, 1, 0, 1], dtype=np.uint8)
    order, _ = kernels.reach(indptr, indices, labels, 3, [0], allowed, backend=backend)
    assert sorted(order.tolist()) == [0, 1, 3]


def test_reach_rejects_bad_seed(backend):
    indptr, indices, labels = kernels.csr(2, [0], [1], [1])
    with pytest.raises(IndexError):
        kernels.reach(indptr, indices, labels, 1, [5], backend=backend)


def test_empty_graph(backend):
    indptr, indices, labels = kernels.csr(0, [], [], [])
    comp, ncomp = kernels.tarjan_scc(indptr, indices, backend=backend)
    assert ncomp == 0 and len(comp) == 0


@pytest.mark.parametrize("seed", range(30))
def test_backends_agree_and_match_oracles(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 60)
    src, dst, lab, (indptr, indices, labels) = random_csr(rng, n, rng.randint(0, 4 * n))
    seeds = rng.sample(range(n), rng.randint(1, min(n, 4)))
    mask = rng.randrange(1, 128)
    results = {}
    for b in kernels.BACKENDS:
        order, pops = kernels.reach(indptr, indices, labels, mask, seeds, backend=b)
        comp, ncomp = kernels.tarjan_scc(indptr, indices, backend=b)
        results[b] = (order.tolist(), pops, comp.tolist(), ncomp)
        assert pops == len(order) == len(set(order.tolist()))
    assert len({repr(r) for r in results.values()}) == 1
    succ = {}
    for s, d, l in zip(src, dst, lab):
        if l & mask:
            succ.setdefault(s, []).append(d)
    order, _, comp, ncomp = next(iter(results.values()))
    assert set(order) == bfs(succ, seeds)
    parts = {}
    for v, c in enumerate(comp):
        parts.setdefault(c, set()).add(v)
    assert sorted(map(sorted, parts.values())) == sorted(map(sorted, scc_oracle(n, zip(src, dst))))
    assert ncomp == len(parts)


def test_tarjan_numbers_components_in_reverse_topological_order(backend):
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(2, 40)
        src, dst, _, (indptr, indices, _) = random_csr(rng, n, 2 * n)
        comp, _ = kernels.tarjan_scc(indptr, indices, backend=backend)
        for s, d in zip(src, dst):
            assert comp[s] >= comp[d]


def test_deep_chain_does_not_recurse(backend):
    n = 200_000
    indptr, indices, _ = kernels.csr(n, list(range(n - 1)), list(range(1, n)))
    comp, ncomp = kernels.tarjan_scc(indptr, indices, backend=backend)
    assert ncomp == n
    order, pops = kernels.dag_reach(indptr, indices, [0], backend=backend)
    assert pops == n
