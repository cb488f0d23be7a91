import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpmslice.depgraph import Label
from fpmslice.ecpg import build_ecpg
from fpmslice.slicer import (
    CriterionOutOfRange,
    Slice,
    SlicingCriterion,
    SourceUnavailable,
    reconstruct_source_slice,
    resolve_criteria,
    resolve_with_fallback,
    run_slice,
    slice_nodes,
    slice_source,
)
from graphs import LABELS, as_ecpg, random_edges
from oracles import slice_oracle

ALL = {Label.C, Label.D, Label.F, Label.S, Label.V}


@pytest.fixture(scope="module")
def motivating():
    from conftest import FIXTURES

    return build_ecpg(FIXTURES / "motivating")


def crit(line, col=None, file="assign.c"):
    return SlicingCriterion(file, line, col)


def line_set(g, nodes):
    return {g.nodes[i].line for i in nodes}


def test_criterion_resolves_to_the_identifier_and_its_statement(motivating):
    nodes = resolve_criteria(motivating, [crit(15, 9)])
    assert {motivating.nodes[i].kind for i in nodes} == {"Assign", "Identifier"}
    assert line_set(motivating, nodes) == {15}


def test_criterion_on_subexpression_lifts_to_statement(motivating):
    nodes = resolve_criteria(motivating, [crit(15, 13)])
    kinds = {motivating.nodes[i].kind for i in nodes}
    assert {"Identifier", "BinaryOp", "Assign"} <= kinds


def test_column_wildcard_matches_whole_line(motivating):
    nodes = resolve_criteria(motivating, [crit(15)])
    assert nodes == {i for i, r in motivating.nodes.items() if r.line == 15}


def test_comment_or_blank_line_falls_back_to_function(motivating):
    nodes, fallback = resolve_with_fallback(motivating, [crit(9)])
    assert fallback
    assert nodes == {i for i, r in motivating.nodes.items() if r.function == "assign"}


def test_out_of_range_criteria(motivating):
    with pytest.raises(CriterionOutOfRange):
        resolve_criteria(motivating, [crit(9999)])
    with pytest.raises(CriterionOutOfRange):
        resolve_criteria(motivating, [crit(3, file="nope.c")])


def test_motivating_slices(motivating):
    seeds = resolve_criteria(motivating, [crit(15, 9)])
    assert line_set(motivating, slice_nodes(motivating, seeds, labels={Label.C, Label.D})) == {8, 11, 15}
    full = line_set(motivating, slice_nodes(motivating, seeds))
    assert {1, 3, 6, 7, 8, 11, 14, 15} <= full
    assert 10 not in full


def test_empty_seed_set(motivating):
    assert slice_nodes(motivating, set()) == set()
    empty = reconstruct_source_slice(motivating, set())
    assert empty.files == []


def test_forward_slice_from_declaration(motivating):
    seeds = resolve_criteria(motivating, [crit(7)])
    fwd = line_set(motivating, slice_nodes(motivating, seeds, "forward"))
    assert {7, 8, 10, 12, 15} <= fwd
    assert 3 not in fwd


def test_reconstruction_is_verbatim_and_grouped(fixtures):
    g = build_ecpg(fixtures / "crossfile_call")
    sl = slice_source(g, [SlicingCriterion("b.c", 6, None)])
    assert sl.paths == ["a.c", "b.c"]
    for f in sl.files:
        src = (fixtures / "crossfile_call" / f.path).read_bytes().split(b"\n")
        ns = [ln.n for ln in f.lines]
        assert ns == sorted(set(ns))
        for ln in f.lines:
            assert ln.text.encode() == src[ln.n - 1]
    back = Slice.from_dict(json.loads(sl.to_json()))
    assert back.to_dict() == sl.to_dict()


def test_slice_json_shape(motivating):
    doc = json.loads(slice_source(motivating, [crit(15, 9)]).to_json())
    assert list(doc) == ["criteria", "direction", "fallback_used", "files"]
    assert list(doc["files"][0]) == ["path", "lines"]
    assert list(doc["files"][0]["lines"][0]) == ["n", "text"]


def test_missing_source_is_reported(fixtures, tmp_path):
    import shutil

    for f in (fixtures / "motivating").iterdir():
        shutil.copy(f, tmp_path)
    g = build_ecpg(tmp_path)
    (tmp_path / "assign.c").unlink()
    with pytest.raises(SourceUnavailable):
        slice_source(g, [crit(15, 9)])


def test_allowed_files_bound_the_closure(fixtures):
    g = build_ecpg(fixtures / "crossfile_call")
    seeds = resolve_criteria(g, [SlicingCriterion("b.c", 6)])
    assert {g.nodes[i].file for i in slice_nodes(g, seeds)} == {"a.c", "b.c"}
    assert {g.nodes[i].file for i in slice_nodes(g, seeds, allowed_files={"b.c"})} == {"b.c"}


def test_unknown_direction():
    g = as_ecpg(2, {(0, 1, Label.D)})
    with pytest.raises(ValueError):
        slice_nodes(g, {0}, direction="sideways")


def _random_case(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 60)
    edges = random_edges(rng, n, rng.randint(0, 4 * n))
    labels = set(rng.sample(LABELS, rng.randint(1, len(LABELS))))
    seeds = set(rng.sample(range(n), rng.randint(0, min(n, 3))))
    return rng, n, edges, labels, seeds


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**9), direction=st.sampled_from(["backward", "forward", "both"]))
def test_matches_closure_oracle(seed, direction):
    _, n, edges, labels, seeds = _random_case(seed)
    g = as_ecpg(n, edges, id_offset=1000)
    got = {i - 1000 for i in slice_nodes(g, {s + 1000 for s in seeds}, direction, labels)}
    assert got == slice_oracle(n, edges, labels, direction, seeds)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**9), direction=st.sampled_from(["backward", "forward", "both"]))
def test_monotone_idempotent_and_bounded(seed, direction):
    rng, n, edges, labels, seeds = _random_case(seed)
    g = as_ecpg(n, edges)
    wider = labels | set(rng.sample(LABELS, 2))
    r1 = run_slice(g, seeds, direction, labels)
    r2 = slice_nodes(g, seeds, direction, wider)
    assert seeds <= r1.nodes <= r2
    assert slice_nodes(g, r1.nodes, direction, labels) == r1.nodes
    assert r1.pops <= n


def test_backends_give_identical_slices(motivating):
    seeds = resolve_criteria(motivating, [crit(15, 9)])
    from fpmslice import kernels

    results = {b: run_slice(motivating, seeds, backend=b).nodes for b in kernels.BACKENDS}
    assert len({frozenset(v) for v in results.values()}) == 1
