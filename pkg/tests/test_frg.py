import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpmslice.ecpg import build_ecpg
from fpmslice.frg import (
    FileReferenceGraph,
    UnknownFile,
    build_frg,
    cached_analysis,
    compute_scc,
    dump_cache,
    farf,
    farf_query,
    load_cache,
)
from oracles import bfs, scc_oracle


def project_frg(path):
    g = build_ecpg(path)
    return build_frg(g.symbols, g.base.units)


def test_call_across_files(fixtures):
    frg = project_frg(fixtures / "crossfile_call")
    assert frg.edges == {("a.c", "b.c")}
    scc = compute_scc(frg)
    assert farf(frg, scc, ["a.c"]) == {"a.c", "b.c"}
    assert farf(frg, scc, ["b.c"]) == {"b.c"}


def test_extern_global_reference(fixtures):
    frg = project_frg(fixtures / "extern_global")
    assert frg.edges == {("good.c", "io.c")}
    scc = compute_scc(frg)
    assert farf(frg, scc, ["io.c"]) == {"io.c"}


def test_self_contained_file_has_no_edges(fixtures):
    assert project_frg(fixtures / "motivating").edges == set()


def test_self_loops_dropped_and_unknown_endpoints_rejected():
    frg = FileReferenceGraph(["a", "b"], {("a", "a"), ("a", "b")})
    assert frg.edges == {("a", "b")}
    with pytest.raises(ValueError):
        FileReferenceGraph(["a"], {("a", "z")})


def test_chain_and_mutual_reference():
    chain = FileReferenceGraph(["a", "b", "c"], {("a", "b"), ("b", "c")})
    scc = compute_scc(chain)
    assert scc.count == 3 and len(scc.cond_edges) == 2
    mutual = FileReferenceGraph(["a", "b"], {("a", "b"), ("b", "a")})
    scc = compute_scc(mutual)
    assert scc.count == 1 and scc.members[0] == ["a", "b"]


def test_unknown_file():
    frg = FileReferenceGraph(["a"], set())
    with pytest.raises(UnknownFile):
        farf(frg, compute_scc(frg), ["ghost.c"])


def random_frg(seed, max_n=500):
    rng = random.Random(seed)
    n = rng.randint(1, max_n)
    names = [f"f{i:03d}.c" for i in range(n)]
    edges = {(rng.choice(names), rng.choice(names)) for _ in range(rng.randint(0, 2 * n))}
    return rng, FileReferenceGraph(names, edges)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_scc_partition_matches_closure_oracle(seed):
    _, frg = random_frg(seed, max_n=120)
    scc = compute_scc(frg)
    pos = frg.position
    want = {frozenset(frg.nodes[i] for i in c) for c in scc_oracle(len(frg.nodes), [(pos[a], pos[b]) for a, b in frg.edges])}
    got = {frozenset(m) for m in scc.members.values()}
    assert got == want
    scc.topological_order()


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_farf_matches_bfs_and_algebra(seed):
    rng, frg = random_frg(seed)
    scc = compute_scc(frg)
    succ = {}
    for a, b in frg.edges:
        succ.setdefault(a, []).append(b)
    s1 = set(rng.sample(frg.nodes, rng.randint(1, min(5, len(frg.nodes)))))
    s2 = set(rng.sample(frg.nodes, rng.randint(1, min(5, len(frg.nodes)))))
    r = farf_query(frg, scc, s1)
    assert r.files == bfs(succ, s1)
    assert r.pops <= scc.count
    assert s1 <= r.files
    assert farf(frg, scc, r.files) == r.files
    assert farf(frg, scc, s1 | s2) == r.files | farf(frg, scc, s2)


def test_cache_round_trip_and_reuse(fixtures, tmp_path):
    g = build_ecpg(fixtures / "crossfile_call")
    frg, scc, reused = cached_analysis(tmp_path / "frg-cache.json", fixtures / "crossfile_call", g.symbols, g.base.units)
    assert not reused
    doc = json.loads((tmp_path / "frg-cache.json").read_text())
    assert list(doc) == ["hash", "files", "edges", "scc"]
    assert list(doc["scc"]) == ["members", "cond_edges"]
    frg2, scc2, reused = cached_analysis(tmp_path / "frg-cache.json", fixtures / "crossfile_call", g.symbols, g.base.units)
    assert reused and frg2.edges == frg.edges and scc2.members == scc.members
    _, frg3, scc3 = load_cache(dump_cache(frg, scc, "h"))
    assert scc3.cond_edges == scc.cond_edges
