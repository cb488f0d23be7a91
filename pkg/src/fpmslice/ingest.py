"""SAST report parsing (Cppcheck XML v2, Warning-JSON) and criterion derivation."""

from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable

from .slicer import SlicingCriterion

TOOLS = ("cppcheck", "infer", "csa", "generic")
MODES = ("primary_only", "full_trace")


class MalformedReport(Exception):
    def __init__(self, line: int | None, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class SchemaError(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Location:
    file: str
    line: int
    column: int | None = None
    info: str = ""

    def __post_init__(self) -> None:
        if not self.file:
            raise ValueError("location file must be nonempty")
        if self.line < 1:
            raise ValueError(f"location line must be >= 1, got {self.line}")
        if self.column is not None and self.column < 1:
            raise ValueError(f"location column must be >= 1, got {self.column}")

    def to_dict(self) -> dict:
        d = {"file": self.file, "line": self.line, "column": self.column}
        if self.info:
            d["info"] = self.info
        return d


@dataclass(frozen=True)
class Warning:
    tool: str
    rule_id: str
    message: str
    primary_loc: Location
    trace: tuple[Location, ...] = ()
    cwe: int | None = None
    severity: str = ""

    def __post_init__(self) -> None:
        if self.tool not in TOOLS:
            raise ValueError(f"unknown tool {self.tool!r}")
        if self.cwe is not None and not 1 <= self.cwe <= 1999:
            raise ValueError(f"cwe out of range: {self.cwe}")

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "rule_id": self.rule_id,
            "cwe": self.cwe,
            "severity": self.severity,
            "message": self.message,
            "file": self.primary_loc.file,
            "line": self.primary_loc.line,
            "column": self.primary_loc.column,
            "trace": [loc.to_dict() for loc in self.trace],
        }

    @property
    def warning_id(self) -> str:
        """Content hash, stable across runs and report orderings."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _int_attr(el: ET.Element, name: str, line: int | None, minimum: int = 1) -> int | None:
    raw = el.get(name)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise MalformedReport(line, f"attribute {name}={raw!r} is not an integer") from None
    return value if value >= minimum else None


def _error_line(data: bytes, err: ET.ParseError) -> int | None:
    pos = getattr(err, "position", None)
    return pos[0] if pos else None


def parse_cppcheck_xml(data: bytes) -> list[Warning]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as err:
        raise MalformedReport(_error_line(data, err), f"invalid XML: {err}") from None
    if root.tag != "results":
        raise MalformedReport(1, f"expected <results>, got <{root.tag}>")
    errors = root.find("errors")
    if errors is None:
        return []
    out: list[Warning] = []
    for i, el in enumerate(errors.findall("error")):
        locs = []
        for loc in el.findall("location"):
            file, line = loc.get("file"), _int_attr(loc, "line", None)
            if not file or line is None:
                raise MalformedReport(None, f"error #{i} ({el.get('id')}): location without file/line")
            locs.append(Location(file, line, _int_attr(loc, "column", None), loc.get("info", "")))
        if not locs:
            # Cppcheck emits location-less errors for whole-run problems; not slicable
            continue
        cwe = _int_attr(el, "cwe", None)
        if cwe is not None and cwe > 1999:
            cwe = None
        out.append(Warning("cppcheck", el.get("id", ""), el.get("msg", ""), locs[0], tuple(locs),
                           cwe, el.get("severity", "")))
    return out


def _loc_from(rec, path: str) -> Location:
    if not isinstance(rec, dict):
        raise SchemaError(path, "expected an object")
    file, line, column = rec.get("file"), rec.get("line"), rec.get("column")
    if not isinstance(file, str) or not file:
        raise SchemaError(f"{path}.file", "required nonempty string")
    if not isinstance(line, int) or isinstance(line, bool) or line < 1:
        raise SchemaError(f"{path}.line", "required integer >= 1")
    if column is not None and (not isinstance(column, int) or isinstance(column, bool) or column < 1):
        raise SchemaError(f"{path}.column", "integer >= 1 or null")
    info = rec.get("info", "")
    return Location(file, line, column, info if isinstance(info, str) else "")


def parse_generic_json(data: bytes) -> list[Warning]:
    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as err:
        raise SchemaError("$", f"invalid JSON ({err})") from None
    if isinstance(doc, dict):
        doc = doc.get("warnings")
    if not isinstance(doc, list):
        raise SchemaError("$", "expected a list of warnings or {\"warnings\": [...]}")
    out = []
    for i, rec in enumerate(doc):
        path = f"$[{i}]"
        primary = _loc_from(rec, path)
        for key in ("rule_id", "message"):
            if not isinstance(rec.get(key), str):
                raise SchemaError(f"{path}.{key}", "required string")
        tool = rec.get("tool")
        if not isinstance(tool, str):
            raise SchemaError(f"{path}.tool", "required string")
        trace = rec.get("trace", [])
        if not isinstance(trace, list):
            raise SchemaError(f"{path}.trace", "expected a list")
        cwe = rec.get("cwe")
        if cwe is not None and (not isinstance(cwe, int) or isinstance(cwe, bool) or not 1 <= cwe <= 1999):
            raise SchemaError(f"{path}.cwe", "integer in [1, 1999] or null")
        severity = rec.get("severity", "")
        out.append(Warning(
            tool if tool in TOOLS else "generic",
            rec["rule_id"],
            rec["message"],
            primary,
            tuple(_loc_from(t, f"{path}.trace[{j}]") for j, t in enumerate(trace)),
            cwe,
            severity if isinstance(severity, str) else "",
        ))
    return out


def parse_report(data: bytes, fmt: str) -> list[Warning]:
    if fmt == "cppcheck":
        return parse_cppcheck_xml(data)
    if fmt in ("json", "generic"):
        return parse_generic_json(data)
    raise ValueError(f"unknown report format {fmt!r}")


def warning_to_criteria(w: Warning, mode: str = "full_trace") -> list[SlicingCriterion]:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    locs: Iterable[Location] = [w.primary_loc]
    if mode == "full_trace":
        locs = [w.primary_loc, *w.trace]
    seen: set[SlicingCriterion] = set()
    out = []
    for loc in locs:
        crit = SlicingCriterion(loc.file, loc.line, loc.column)
        if crit not in seen:
            seen.add(crit)
            out.append(crit)
    return out


__all__ = [
    "Location",
    "MalformedReport",
    "SchemaError",
    "Warning",
    "parse_cppcheck_xml",
    "parse_generic_json",
    "parse_report",
    "warning_to_criteria",
]
