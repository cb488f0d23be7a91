import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fpmslice.minic import (
    MiniCSyntaxError,
    NodeKind,
    SourceLoc,
    dump_ast,
    parse_translation_unit,
    parse_with_recovery,
)
from fpmslice.minic.lexer import tokenize
from programs import random_program

K = NodeKind


def kinds(root):
    return [n.kind for n in root.walk()]


def test_tokens_carry_one_based_columns_and_skip_directives():
    toks, _ = tokenize(b"#define X 1\n\tint  x = 0x1F; /* c */\n", "t.c")
    got = [(t.text, t.line, t.column) for t in toks if t.kind != "eof"]
    # a tab counts as one column
    assert got == [("int", 2, 2), ("x", 2, 7), ("=", 2, 9), ("0x1F", 2, 11), (";", 2, 15)]


def test_directive_with_continuation_is_blanked():
    src = b"#define LONG(a) \\\n   (a + 1)\nint y;\n"
    toks, _ = tokenize(src, "t.c")
    assert [t.text for t in toks if t.kind != "eof"] == ["int", "y", ";"]
    assert toks[0].line == 3


def test_source_loc_validation():
    with pytest.raises(ValueError):
        SourceLoc("a.c", 0, 1)
    with pytest.raises(ValueError):
        SourceLoc("", 1, 1)
    assert str(SourceLoc("a.c", 3, 4)) == "a.c:3:4"


def test_motivating_example_ast_shape(fixtures):
    unit = parse_translation_unit((fixtures / "motivating" / "assign.c").read_bytes(), "assign.c")
    assert unit.id == 0
    ids = [n.id for n in unit.walk()]
    assert ids == list(range(len(ids)))
    fns = [c for c in unit.children if c.kind is K.FunctionDef]
    assert [f.name for f in fns] == ["caller", "assign"]
    z15 = [n for n in unit.walk() if n.loc.line == 15 and n.loc.column == 9]
    assert {n.kind for n in z15} == {K.Assign, K.Identifier}
    # two declarators on one line become two VarDecl nodes
    line6 = [n for n in unit.walk() if n.kind is K.VarDecl and n.loc.line == 6]
    assert [n.name for n in line6] == ["y", "z"]
    assign = fns[1]
    assert all(n.enclosing_function == assign.id for n in assign.walk())


def test_if_else_structure():
    unit = parse_translation_unit("void f(int a) { if (a) a = 1; else { a = 2; } }", "t.c")
    if_node = next(n for n in unit.walk() if n.kind is K.If)
    cond, then, els = if_node.children
    assert cond.kind is K.Identifier and then.kind is K.Assign
    assert els.kind is K.Else and els.children[0].kind is K.Block


def test_switch_groups_statements_under_labels():
    src = "void f(int a) { switch (a) { case 1: a = 2; break; case 2: default: a = 0; } }"
    unit = parse_translation_unit(src, "t.c")
    sw = next(n for n in unit.walk() if n.kind is K.Switch)
    labels = sw.children[1].children
    assert [n.kind for n in labels] == [K.Case, K.Case, K.Default]
    assert [c.kind for c in labels[0].children] == [K.Literal, K.Assign, K.Break]
    assert labels[1].children[1:] == []


def test_struct_definition_is_accepted_and_skipped():
    unit = parse_translation_unit("struct s { int a; char b[4]; } v;\nint f(struct s *p) { return p->a; }\n", "t.c")
    assert [c.kind for c in unit.children] == [K.VarDecl, K.FunctionDef]
    assert unit.children[0].attrs["type"] == "struct s"


@pytest.mark.parametrize(
    "src, fragment",
    [
        ("typedef int T;", "typedef"),
        ("int f() { goto x; }", "goto"),
        ("int f() { do { } while (1); }", "do"),
        ("int f(int a) { return a ? 1 : 2; }", "conditional"),
        ("int f() { int (*fp)(int); }", "function pointer"),
        ("int f(int x, int y) { x = 1, y = 2; }", "comma"),
        ("union u { int a; };", "union"),
    ],
)
def test_unsupported_constructs_raise(src, fragment):
    with pytest.raises(MiniCSyntaxError) as info:
        parse_translation_unit(src, "t.c")
    assert fragment in str(info.value)
    assert info.value.loc.file == "t.c"


def test_error_location_is_exact():
    with pytest.raises(MiniCSyntaxError) as info:
        parse_translation_unit("int f() {\n  x = ;\n}\n", "e.c")
    assert (info.value.loc.line, info.value.loc.column) == (2, 7)


def test_recovery_keeps_good_declarations():
    unit, errors = parse_with_recovery("int ok1;\nint bad( {\nint ok2 = 3;\nint f(void) { return 0; }\n", "r.c")
    assert [c.name for c in unit.children] == ["ok1", "ok2", "f"]
    assert len(errors) == 1 and errors[0].loc.line == 2


def test_nesting_limit_is_a_syntax_error():
    src = "int f(int a) { return " + "(" * 400 + "a" + ")" * 400 + "; }"
    with pytest.raises(MiniCSyntaxError):
        parse_translation_unit(src, "deep.c")


def test_empty_file_is_a_bare_unit():
    unit = parse_translation_unit(b"", "empty.c")
    assert kinds(unit) == [K.TranslationUnit]


def test_dump_is_deterministic_json(fixtures):
    data = (fixtures / "motivating" / "assign.c").read_bytes()
    a = dump_ast(parse_translation_unit(data, "assign.c"))
    b = dump_ast(parse_translation_unit(data, "assign.c"))
    assert a == b
    doc = json.loads(a)
    assert doc["kind"] == "TranslationUnit"


def test_first_id_offsets_every_node():
    unit = parse_translation_unit("int a; int b;", "t.c", first_id=100)
    assert [n.id for n in unit.walk()] == [100, 101, 102]


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.binary(max_size=400))
def test_parser_is_total_over_bytes(data):
    try:
        parse_translation_unit(data, "fuzz.c")
    except MiniCSyntaxError:
        pass
    unit, _ = parse_with_recovery(data, "fuzz.c")
    assert unit.kind is K.TranslationUnit


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_programs_parse_with_consistent_spans(seed):
    src = random_program(seed)
    unit = parse_translation_unit(src, "g.c")
    data = src.encode()
    for n in unit.walk():
        assert 0 <= n.start <= n.end <= len(data)
        assert n.code == data[n.start : n.end].decode()
        for c in n.children:
            assert n.start <= c.start and c.end <= n.end
