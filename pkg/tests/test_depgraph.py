import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpmslice.depgraph import EXIT, Label, build_cfg, build_cpg, control_dependence, data_dependence
from fpmslice.depgraph.dataflow import function_accesses
from fpmslice.minic import NodeKind, build_symbol_tables, parse_translation_unit
from oracles import control_dependence_oracle, reaching_oracle
from programs import random_program

K = NodeKind


def analyze(src, name="t.c"):
    unit = parse_translation_unit(src, name)
    symbols = build_symbol_tables([unit])
    fns = [c for c in unit.children if c.kind is K.FunctionDef]
    return unit, symbols, fns


def by_line(unit, pairs):
    loc = {n.id: n.loc.line for n in unit.walk()}
    return {(loc[a], loc[b]) for a, b in pairs}


def test_motivating_example_dependences(fixtures):
    src = (fixtures / "motivating" / "assign.c").read_bytes()
    unit, symbols, fns = analyze(src, "assign.c")
    cfg = build_cfg(fns[1])
    assert by_line(unit, control_dependence(cfg)) == {(11, 12), (11, 15)}
    # declarations carry their flow through V edges, so only line 8 feeds line 15
    assert by_line(unit, data_dependence(cfg, symbols)) == {(8, 15)}
    # if/else diamond: entry run, then, else, synthetic exit
    assert len(cfg.blocks) == 4
    assert sorted(cfg.edges) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_nested_if_in_while_depends_only_on_the_inner_predicate():
    src = "void f(int a, int b) {\n  while (a) {\n    if (b) {\n      a = 1;\n    }\n    b = 2;\n  }\n}\n"
    unit, _, fns = analyze(src)
    cd = by_line(unit, control_dependence(build_cfg(fns[0])))
    assert cd == {(2, 2), (2, 3), (2, 6), (3, 4)}


def test_loop_carried_data_dependence():
    src = "int f(int n) {\n  int s;\n  s = 0;\n  while (n) {\n    s = s + n;\n    n--;\n  }\n  return s;\n}\n"
    unit, symbols, fns = analyze(src)
    dd = by_line(unit, data_dependence(build_cfg(fns[0]), symbols))
    assert {(3, 5), (5, 5), (3, 8), (5, 8), (6, 4), (6, 5), (6, 6)} <= dd
    assert (2, 5) not in dd


def test_weak_definitions_do_not_kill():
    src = ("void f(int *p, int i) {\n  int a[4];\n  a[0] = 1;\n  a[i] = 2;\n"
           "  *p = 3;\n  *p = 4;\n  i = a[1] + *p;\n}\n")
    unit, symbols, fns = analyze(src)
    dd = by_line(unit, data_dependence(build_cfg(fns[0]), symbols))
    # both array writes reach the read; both pointer writes are weak defs of p
    assert {(3, 7), (4, 7), (5, 7), (6, 7)} <= dd


def test_indexed_write_reads_the_pointer():
    src = "void f(char *s, char *t) {\n  char *d = s;\n  d = t;\n  d[0] = 1;\n}\n"
    unit, symbols, fns = analyze(src)
    assert (3, 4) in by_line(unit, data_dependence(build_cfg(fns[0]), symbols))


def test_address_passed_to_call_is_a_weak_definition():
    src = "void g(int *p);\nint f() {\n  int v;\n  v = 1;\n  g(&v);\n  return v;\n}\n"
    unit, symbols, fns = analyze(src)
    dd = by_line(unit, data_dependence(build_cfg(fns[0]), symbols))
    assert {(4, 6), (5, 6), (4, 5)} <= dd


def test_for_loop_cfg_shape():
    src = "void f(int n) {\n  int i;\n  for (i = 0; i < n; i++) {\n    n = n - 1;\n  }\n}\n"
    unit, _, fns = analyze(src)
    cfg = build_cfg(fns[0])
    kinds = {n.id: n.kind for n in unit.walk()}
    for_id = next(i for i, k in kinds.items() if k is K.For)
    assert EXIT in cfg.succ[for_id]
    assert len(cfg.succ[for_id]) == 2


def test_switch_fallthrough_and_break():
    src = ("void f(int a, int b) {\n  switch (a) {\n  case 1:\n    b = 1;\n  case 2:\n    b = 2;\n"
           "    break;\n  default:\n    b = 3;\n  }\n  b = 4;\n}\n")
    unit, _, fns = analyze(src)
    cfg = build_cfg(fns[0])
    line = {n.id: n.loc.line for n in unit.walk()}
    edges = {(line[s], line[t]) for s, t in cfg.statement_edges()}
    assert {(2, 3), (2, 5), (2, 8), (3, 4), (4, 5), (7, 11), (9, 11)} <= edges
    cd = by_line(unit, control_dependence(cfg))
    assert (2, 4) in cd and (2, 9) in cd and (2, 11) not in cd


def test_cpg_labels_and_entry_edge(fixtures):
    unit, symbols, _ = analyze((fixtures / "motivating" / "assign.c").read_bytes(), "assign.c")
    cpg = build_cpg([unit], symbols)
    assert {e[2] for e in cpg.edges} == {Label.AST, Label.CFG, Label.C, Label.D}
    rec = cpg.nodes[0]
    assert set(rec.properties()) == {"LINE_NUMBER", "COLUMN_NUMBER", "FILENAME", "CODE", "FUNCTION"}
    fn = next(n for n in unit.walk() if n.kind is K.FunctionDef and n.name == "assign")
    assert any(s == fn.id and lab is Label.CFG for s, _, lab in cpg.edges)


def _cfg_cases(seed):
    unit, symbols, fns = analyze(random_program(seed), "g.c")
    return unit, symbols, build_cfg(fns[-1])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_control_dependence_matches_postdominance_oracle(seed):
    _, _, cfg = _cfg_cases(seed)
    assert control_dependence(cfg) == control_dependence_oracle(cfg.succ, EXIT)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_data_dependence_matches_path_oracle(seed):
    _, symbols, cfg = _cfg_cases(seed)
    acc = function_accesses(cfg, symbols)
    defs = {s: a.defs for s, a in acc.items()}
    kills = {s: a.strong | a.kills for s, a in acc.items()}
    reach = reaching_oracle(cfg.succ, defs, kills)
    expected = {
        (s, anchor)
        for s, t, var in reach
        if t != EXIT
        for use in acc[t].uses
        if use.key == var
        for anchor in use.anchors
    }
    assert data_dependence(cfg, symbols) == expected


@pytest.mark.parametrize("seed", range(5))
def test_cfg_every_statement_reaches_exit(seed):
    _, _, cfg = _cfg_cases(seed)
    succ = {b: cfg.block_succ()[b] for b in range(len(cfg.blocks))}
    seen, stack = {cfg.exit}, [cfg.exit]
    preds = {}
    for b, ts in succ.items():
        for t in ts:
            preds.setdefault(t, []).append(b)
    while stack:
        b = stack.pop()
        for p in preds.get(b, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    assert seen == set(range(len(cfg.blocks)))
