import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpmslice.ingest import (
    Location,
    MalformedReport,
    SchemaError,
    Warning,
    parse_cppcheck_xml,
    parse_generic_json,
    parse_report,
    warning_to_criteria,
)
from fpmslice.slicer import SlicingCriterion

TWO_LOCS = b"""<?xml version="1.0"?>
<results version="2"><cppcheck version="2.13"/><errors>
 <error id="uninitvar" severity="error" msg="Uninitialized variable: x" cwe="457" extra="ignored">
  <location file="m.c" line="12" column="7" info="x is read"/>
  <location file="m.c" line="4"/>
 </error>
</errors></results>"""


def test_cppcheck_two_locations():
    [w] = parse_cppcheck_xml(TWO_LOCS)
    assert (w.tool, w.rule_id, w.cwe, w.severity) == ("cppcheck", "uninitvar", 457, "error")
    assert w.primary_loc == Location("m.c", 12, 7, "x is read")
    assert [loc.line for loc in w.trace] == [12, 4]
    assert w.trace[1].column is None


def test_cppcheck_empty_and_cwe(fixtures):
    assert parse_cppcheck_xml(b'<results version="2"><errors/></results>') == []
    ws = parse_cppcheck_xml((fixtures / "pipeline" / "report.xml").read_bytes())
    assert [w.cwe for w in ws] == [369, 121, 476]


def test_cppcheck_skips_location_less_errors():
    xml = b'<results version="2"><errors><error id="missingInclude" msg="m"/></errors></results>'
    assert parse_cppcheck_xml(xml) == []


@pytest.mark.parametrize("data", [b"<results><errors>", b"not xml", b"<other/>",
                                  b'<results><errors><error id="a"><location file="x.c" line="q"/></error></errors></results>'])
def test_cppcheck_malformed(data):
    with pytest.raises(MalformedReport):
        parse_cppcheck_xml(data)


def test_generic_minimal_record():
    [w] = parse_generic_json(b'[{"tool":"infer","rule_id":"NULL_DEREF","message":"m","file":"a.c","line":3}]')
    assert w.trace == () and w.cwe is None and w.primary_loc == Location("a.c", 3)


def test_generic_trace_order_and_tool_mapping():
    trace = [{"file": f"f{i}.c", "line": i + 1} for i in range(5)]
    doc = {"warnings": [{"tool": "pvs", "rule_id": "r", "message": "m", "file": "a.c", "line": 1,
                         "cwe": 122, "trace": trace}]}
    [w] = parse_generic_json(json.dumps(doc).encode())
    assert w.tool == "generic"
    assert [loc.file for loc in w.trace] == [f"f{i}.c" for i in range(5)]


@pytest.mark.parametrize("rec, path", [
    ({"tool": "infer", "rule_id": "r", "message": "m", "file": "a.c"}, "$[0].line"),
    ({"tool": "infer", "rule_id": "r", "message": "m", "file": "a.c", "line": 0}, "$[0].line"),
    ({"tool": "infer", "message": "m", "file": "a.c", "line": 2}, "$[0].rule_id"),
    ({"tool": "infer", "rule_id": "r", "message": "m", "file": "a.c", "line": 2, "cwe": 5000}, "$[0].cwe"),
    ({"tool": "infer", "rule_id": "r", "message": "m", "file": "a.c", "line": 2, "trace": [{"file": "b.c"}]},
     "$[0].trace[0].line"),
])
def test_generic_schema_errors(rec, path):
    with pytest.raises(SchemaError) as err:
        parse_generic_json(json.dumps([rec]).encode())
    assert err.value.path == path


def test_parse_report_dispatch():
    assert parse_report(b"[]", "json") == []
    with pytest.raises(ValueError):
        parse_report(b"", "sarif")


def test_criteria_modes():
    w = Warning("generic", "r", "m", Location("file.c", 81, 5),
                (Location("file.c", 81, 5), Location("a.c", 10), Location("e.c", 3), Location("a.c", 10)))
    assert warning_to_criteria(w, "primary_only") == [SlicingCriterion("file.c", 81, 5)]
    full = warning_to_criteria(w)
    assert full == [SlicingCriterion("file.c", 81, 5), SlicingCriterion("a.c", 10), SlicingCriterion("e.c", 3)]
    with pytest.raises(ValueError):
        warning_to_criteria(w, "some")


def test_warning_id_is_content_hash():
    a = Warning("generic", "r", "m", Location("a.c", 1))
    b = Warning("generic", "r", "m", Location("a.c", 1))
    assert a.warning_id == b.warning_id and len(a.warning_id) == 16
    assert a.warning_id != Warning("generic", "r", "m", Location("a.c", 2)).warning_id


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parsers_total_on_garbage(data):
    for fn, errs in ((parse_cppcheck_xml, (MalformedReport,)), (parse_generic_json, (SchemaError,))):
        try:
            fn(data)
        except errs:
            pass


@settings(max_examples=200, deadline=None)
@given(cut=st.integers(0, len(TWO_LOCS)))
def test_truncated_xml(cut):
    try:
        parse_cppcheck_xml(TWO_LOCS[:cut])
    except MalformedReport:
        pass


locs = st.builds(Location, st.sampled_from(["a.c", "b.c"]), st.integers(1, 5),
                 st.one_of(st.none(), st.integers(1, 3)))


@given(primary=locs, trace=st.lists(locs, max_size=8), mode=st.sampled_from(["primary_only", "full_trace"]))
def test_criteria_nonempty_and_unique(primary, trace, mode):
    crits = warning_to_criteria(Warning("generic", "r", "m", primary, tuple(trace)), mode)
    assert crits and len(crits) == len(set(crits))
    assert crits[0] == SlicingCriterion(primary.file, primary.line, primary.column)
