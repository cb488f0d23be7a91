"""Extended CPG: the base graph plus call (F), structural (S) and variable (V) edges.

Edge rules:

* F: call site -> callee FunctionDef; i-th Arg -> i-th Param.
* S: If -> then statement; If -> else statement; Switch -> each Case/Default;
  Block/Case/Default -> each directly nested statement.
* V: declaration (or, for globals, the defining declaration) -> every
  statement or call argument that mentions the variable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .depgraph.cpg import (
    ALL_LABELS,
    BASE_LABELS,
    EXTRA_LABELS,
    Cpg,
    Edge,
    Label,
    NodeRecord,
    build_cpg,
)
from .depgraph.dataflow import expression_roots
from .minic.ast import AstNode, NodeKind
from .minic.parser import parse_with_recovery
from .minic.symbols import SymbolKind, SymbolTable, build_symbol_tables

K = NodeKind
log = logging.getLogger(__name__)

SOURCE_SUFFIXES = (".c", ".h")
LABEL_BITS = {lab: 1 << i for i, lab in enumerate([Label.AST, Label.CFG, Label.C, Label.D, Label.F, Label.S, Label.V])}


class SchemaError(Exception):
    def __init__(self, version, path: str, message: str = "malformed eCPG-JSON"):
        super().__init__(f"{message} at {path} (version={version!r})")
        self.version = version
        self.path = path


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # parse_error | unresolved_call | arity_mismatch | symbol
    message: str
    file: str | None = None
    line: int | None = None

    def __str__(self) -> str:
        where = f"{self.file}:{self.line}: " if self.file else ""
        return f"{where}{self.kind}: {self.message}"


def _note(diagnostics: list | None, diag: Diagnostic) -> None:
    log.debug("%s", diag)
    if diagnostics is not None:
        diagnostics.append(diag)


def _walk_units(cpg: Cpg) -> Iterable[AstNode]:
    if not cpg.units:
        raise ValueError("edge adders need a Cpg built from source (no AST attached)")
    for unit in cpg.units:
        yield from unit.walk()


# -- F -----------------------------------------------------------------------


def add_call_edges(cpg: Cpg, symbols: SymbolTable, diagnostics: list | None = None) -> set[Edge]:
    by_id = {n.id: n for n in _walk_units(cpg)}
    edges: set[Edge] = set()
    for node in by_id.values():
        if node.kind is not K.Call:
            continue
        callee = node.children[0]
        target = None
        if callee.kind is K.Identifier:
            sym = symbols.entries.get(symbols.resolution.get(callee.id, ""))
            if sym is not None and sym.kind is SymbolKind.function and sym.definition is not None:
                target = by_id.get(sym.definition.node_id)
        if target is None:
            _note(diagnostics, Diagnostic("unresolved_call", f"no definition for call {callee.code!r}",
                                          node.loc.file, node.loc.line))
            continue
        edges.add((node.id, target.id, Label.F))
        args = node.children[1:]
        params = [c for c in target.children if c.kind is K.Param]
        variadic = bool(target.attrs.get("variadic"))
        if len(args) != len(params) and not (variadic and len(args) > len(params)):
            _note(diagnostics, Diagnostic(
                "arity_mismatch",
                f"call to {target.name!r} passes {len(args)} argument(s), expects {len(params)}",
                node.loc.file, node.loc.line))
        for arg, param in zip(args, params):
            edges.add((arg.id, param.id, Label.F))
    return edges


# -- S -----------------------------------------------------------------------


def _scope_statements(node: AstNode) -> list[AstNode]:
    if node.kind is K.Block:
        return list(node.children)
    start = node.attrs.get("body_start", 1 if node.kind is K.Case else 0)
    return list(node.children[start:])


def add_structural_edges(cpg: Cpg) -> set[Edge]:
    edges: set[Edge] = set()
    for node in _walk_units(cpg):
        if node.kind is K.If:
            edges.add((node.id, node.children[1].id, Label.S))
            if len(node.children) > 2:
                edges.add((node.id, node.children[2].children[0].id, Label.S))
        elif node.kind is K.Switch:
            body = node.children[1]
            for label in body.children:
                if label.kind in (K.Case, K.Default):
                    edges.add((node.id, label.id, Label.S))
        if node.kind in (K.Block, K.Case, K.Default):
            for child in _scope_statements(node):
                edges.add((node.id, child.id, Label.S))
    return edges


# -- V -----------------------------------------------------------------------


def _mentions(stmt: AstNode) -> Iterable[tuple[AstNode, tuple[int, ...]]]:
    """Identifiers evaluated by ``stmt`` with their use anchors."""
    stack: list[tuple[AstNode, tuple[int, ...]]] = [(r, (stmt.id,)) for r in expression_roots(stmt)]
    while stack:
        node, anchors = stack.pop()
        if node.kind is K.Identifier:
            yield node, anchors
            continue
        if node.kind is K.Arg:
            anchors = anchors + (node.id,)
        stack.extend((child, anchors) for child in node.children)


def _anchor_statements(cpg: Cpg) -> Iterable[AstNode]:
    for node in _walk_units(cpg):
        if node.id in cpg.statements or (node.kind is K.VarDecl and node.attrs.get("scope") == "global"):
            yield node


def add_variable_edges(cpg: Cpg, symbols: SymbolTable) -> set[Edge]:
    edges: set[Edge] = set()
    for stmt in _anchor_statements(cpg):
        for ident, anchors in _mentions(stmt):
            sym = symbols.entries.get(symbols.resolution.get(ident.id, ""))
            if sym is None or not sym.is_variable:
                continue
            site = sym.primary_site()
            if site is None:
                continue
            for anchor in anchors:
                if anchor != site.node_id:
                    edges.add((site.node_id, anchor, Label.V))
    return edges


# -- the graph ------------------------------------------------------------------


@dataclass
class GraphIndex:
    """Dense CSR view of an eCPG for the traversal kernels."""

    ids: np.ndarray  # position -> node id (ascending)
    pos: dict[int, int]
    fwd: tuple[np.ndarray, np.ndarray, np.ndarray]
    rev: tuple[np.ndarray, np.ndarray, np.ndarray]
    both: tuple[np.ndarray, np.ndarray, np.ndarray]

    @classmethod
    def from_edges(cls, node_ids: Iterable[int], edges: Iterable[Edge]) -> "GraphIndex":
        ids = np.asarray(sorted(node_ids), dtype=np.int64)
        pos = {int(v): i for i, v in enumerate(ids)}
        edges = sorted(edges, key=lambda e: (e[0], e[1], e[2].value))
        n = len(ids)
        src = [pos[e[0]] for e in edges]
        dst = [pos[e[1]] for e in edges]
        lab = [LABEL_BITS[e[2]] for e in edges]
        fwd = kernels.csr(n, src, dst, lab)
        rev = kernels.csr(n, dst, src, lab)
        both = kernels.csr(n, src + dst, dst + src, lab + lab)
        return cls(ids, pos, fwd, rev, both)


@dataclass
class Ecpg:
    base: Cpg
    extra_edges: set[Edge] = field(default_factory=set)
    root: Path | None = None  # directory the FILENAME properties are relative to
    diagnostics: list[Diagnostic] = field(default_factory=list)
    symbols: SymbolTable | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        for _, _, label in self.extra_edges:
            if label not in EXTRA_LABELS:
                raise ValueError(f"extra edge with base label {label}")

    @property
    def nodes(self) -> dict[int, NodeRecord]:
        return self.base.nodes

    @property
    def edges(self) -> set[Edge]:
        return self.base.edges | self.extra_edges

    def mu(self, node_id: int) -> dict:
        return self.base.mu(node_id)

    def edges_with(self, *labels: Label) -> set[Edge]:
        wanted = set(labels)
        return {e for e in self.edges if e[2] in wanted}

    @property
    def files(self) -> list[str]:
        return sorted({r.file for r in self.nodes.values()})

    @cached_property
    def index(self) -> GraphIndex:
        return GraphIndex.from_edges(self.nodes, self.edges)

    @cached_property
    def by_line(self) -> dict[tuple[str, int], list[int]]:
        table: dict[tuple[str, int], list[int]] = {}
        for rec in self.nodes.values():
            table.setdefault((rec.file, rec.line), []).append(rec.id)
        for ids in table.values():
            ids.sort()
        return table

    @cached_property
    def ast_parent(self) -> dict[int, int]:
        return {d: s for s, d, lab in self.base.edges if lab is Label.AST}

    @cached_property
    def flow_nodes(self) -> frozenset[int]:
        """Nodes that sit on a CFG edge, i.e. statements and predicates."""
        return frozenset(v for s, d, lab in self.base.edges if lab is Label.CFG for v in (s, d))

    def enclosing_statement_path(self, node_id: int) -> list[int]:
        """``node_id`` and its AST ancestors up to the statement that evaluates it."""
        path = [node_id]
        parent = self.ast_parent
        cur = node_id
        while cur not in self.flow_nodes and cur in parent:
            up = parent[cur]
            if self.nodes[up].kind in ("TranslationUnit", "FunctionDef"):
                break
            path.append(up)
            cur = up
        return path

    def source_path(self, file: str) -> Path:
        path = Path(file)
        if self.root is not None and not path.is_absolute():
            return self.root / path
        return path


def discover_sources(project_dir: str | Path) -> list[Path]:
    root = Path(project_dir)
    return sorted(p for p in root.rglob("*") if p.is_file() and p.suffix in SOURCE_SUFFIXES)


def _display_name(path: Path, root: Path | None) -> str:
    if root is not None:
        try:
            return path.resolve().relative_to(root.resolve()).as_posix()
        except ValueError:
            pass
    return path.as_posix()


def parse_project(files: Iterable[str | Path], root: Path | None = None):
    """Parse files in path order; ids are contiguous across units."""
    named = sorted((_display_name(Path(f), root), Path(f)) for f in files)
    units: list[AstNode] = []
    diagnostics: list[Diagnostic] = []
    next_id = 0
    for name, path in named:
        data = path.read_bytes()
        unit, errors = parse_with_recovery(data, name, first_id=next_id)
        for err in errors:
            diagnostics.append(Diagnostic("parse_error", err.message, name, err.loc.line))
        next_id = max(n.id for n in unit.walk()) + 1
        units.append(unit)
    return units, diagnostics


def build_ecpg(source: str | Path | Iterable[str | Path], root: str | Path | None = None) -> Ecpg:
    """Build the eCPG of a project directory or of an explicit file set.

    Broken files become ``parse_error`` diagnostics and contribute whatever
    top-level declarations parsed cleanly.
    """
    if isinstance(source, (str, Path)) and Path(source).is_dir():
        root = Path(source)
        files = discover_sources(root)
    else:
        files = [Path(source)] if isinstance(source, (str, Path)) else [Path(f) for f in source]
        if root is None and files:
            root = files[0].parent if len(files) == 1 else Path(_common_dir(files))
        root = Path(root) if root is not None else None
    units, diagnostics = parse_project(files, root)
    symbols = build_symbol_tables(units, strict=False)
    diagnostics.extend(Diagnostic("symbol", msg) for msg in symbols.diagnostics)
    cpg = build_cpg(units, symbols)
    extra = add_call_edges(cpg, symbols, diagnostics)
    extra |= add_structural_edges(cpg)
    extra |= add_variable_edges(cpg, symbols)
    return Ecpg(cpg, extra, root, diagnostics, symbols)


def _common_dir(files: list[Path]) -> str:
    import os.path

    return os.path.commonpath([str(f.resolve().parent) for f in files])


# -- eCPG-JSON v1 -------------------------------------------------------------

_NODE_FIELDS = {"id": int, "kind": str, "code": str, "file": str, "line": int, "column": int}


def export_ecpg(ecpg: Ecpg) -> bytes:
    nodes = [
        {"id": r.id, "kind": r.kind, "code": r.code, "file": r.file,
         "line": r.line, "column": r.column, "function": r.function}
        for r in sorted(ecpg.nodes.values(), key=lambda r: r.id)
    ]
    edges = [{"src": s, "dst": d, "label": lab.value}
             for s, d, lab in sorted(ecpg.edges, key=lambda e: (e[0], e[1], e[2].value))]
    doc = {"version": 1, "nodes": nodes, "edges": edges}
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def import_ecpg(data: bytes | str, root: str | Path | None = None) -> Ecpg:
    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as err:
        raise SchemaError(None, "$", f"invalid JSON ({err})") from None
    if not isinstance(doc, dict):
        raise SchemaError(None, "$", "top level must be an object")
    version = doc.get("version")
    if version != 1:
        raise SchemaError(version, "$.version", "unsupported version")
    nodes_in, edges_in = doc.get("nodes"), doc.get("edges")
    if not isinstance(nodes_in, list):
        raise SchemaError(version, "$.nodes", "expected a list")
    if not isinstance(edges_in, list):
        raise SchemaError(version, "$.edges", "expected a list")
    nodes: dict[int, NodeRecord] = {}
    for i, item in enumerate(nodes_in):
        path = f"$.nodes[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(version, path, "expected an object")
        for key, typ in _NODE_FIELDS.items():
            value = item.get(key)
            if not (_is_int(value) if typ is int else isinstance(value, typ)):
                raise SchemaError(version, f"{path}.{key}", f"expected {typ.__name__}")
        func = item.get("function")
        if func is not None and not isinstance(func, str):
            raise SchemaError(version, f"{path}.function", "expected str or null")
        if item["line"] < 1 or item["column"] < 1:
            raise SchemaError(version, path, "line and column must be >= 1")
        if item["id"] in nodes:
            raise SchemaError(version, f"{path}.id", "duplicate node id")
        nodes[item["id"]] = NodeRecord(item["id"], item["kind"], item["code"], item["file"],
                                       item["line"], item["column"], func)
    labels = {lab.value: lab for lab in ALL_LABELS}
    base: set[Edge] = set()
    extra: set[Edge] = set()
    for i, item in enumerate(edges_in):
        path = f"$.edges[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(version, path, "expected an object")
        src, dst, label = item.get("src"), item.get("dst"), item.get("label")
        if not _is_int(src) or src not in nodes:
            raise SchemaError(version, f"{path}.src", "unknown node")
        if not _is_int(dst) or dst not in nodes:
            raise SchemaError(version, f"{path}.dst", "unknown node")
        if label not in labels:
            raise SchemaError(version, f"{path}.label", f"unknown label {label!r}")
        lab = labels[label]
        (base if lab in BASE_LABELS else extra).add((src, dst, lab))
    return Ecpg(Cpg(nodes, base), extra, Path(root) if root is not None else None)


__all__ = [
    "Diagnostic",
    "Ecpg",
    "GraphIndex",
    "LABEL_BITS",
    "SchemaError",
    "add_call_edges",
    "add_structural_edges",
    "add_variable_edges",
    "build_ecpg",
    "discover_sources",
    "export_ecpg",
    "import_ecpg",
    "parse_project",
]
