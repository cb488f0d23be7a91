"""The baseline code property graph: AST, CFG, C and D edges over AST nodes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ..minic.ast import AstNode, NodeKind
from ..minic.symbols import SymbolTable
from .cfg import EXIT, Cfg, build_cfg
from .dataflow import data_dependence
from .dominance import control_dependence


class Label(str, Enum):
    AST = "AST"
    CFG = "CFG"
    C = "C"
    D = "D"
    F = "F"
    S = "S"
    V = "V"

    def __str__(self) -> str:
        return self.value


BASE_LABELS = frozenset({Label.AST, Label.CFG, Label.C, Label.D})
EXTRA_LABELS = frozenset({Label.F, Label.S, Label.V})
ALL_LABELS = BASE_LABELS | EXTRA_LABELS

# (src, dst, label)
Edge = tuple[int, int, Label]


class DanglingEdge(Exception):
    pass


@dataclass(frozen=True)
class NodeRecord:
    """Per-node property map (LINE_NUMBER, COLUMN_NUMBER, FILENAME, CODE, FUNCTION)."""

    id: int
    kind: str
    code: str
    file: str
    line: int
    column: int
    function: str | None = None

    def properties(self) -> dict:
        return {
            "LINE_NUMBER": self.line,
            "COLUMN_NUMBER": self.column,
            "FILENAME": self.file,
            "CODE": self.code,
            "FUNCTION": self.function,
        }

    @property
    def end_line(self) -> int:
        return self.line + self.code.count("\n")


@dataclass
class Cpg:
    nodes: dict[int, NodeRecord] = field(default_factory=dict)
    edges: set[Edge] = field(default_factory=set)
    # the ASTs this graph was built from; empty for imported graphs
    units: list[AstNode] = field(default_factory=list, repr=False, compare=False)
    statements: frozenset[int] = field(default_factory=frozenset, repr=False, compare=False)

    def mu(self, node_id: int) -> dict:
        return self.nodes[node_id].properties()

    def edges_with(self, *labels: Label) -> set[Edge]:
        wanted = set(labels)
        return {e for e in self.edges if e[2] in wanted}

    def label_counts(self) -> dict[Label, int]:
        counts = {lab: 0 for lab in Label}
        for e in self.edges:
            counts[e[2]] += 1
        return counts


def node_records(units: Iterable[AstNode]) -> dict[int, NodeRecord]:
    records: dict[int, NodeRecord] = {}
    for unit in units:
        names = {n.id: n.name for n in unit.children if n.kind is NodeKind.FunctionDef}
        for n in unit.walk():
            records[n.id] = NodeRecord(
                id=n.id,
                kind=n.kind.value,
                code=n.code,
                file=n.loc.file,
                line=n.loc.line,
                column=n.loc.column,
                function=names.get(n.enclosing_function) if n.enclosing_function is not None else None,
            )
    return records


def functions_of(units: Iterable[AstNode]) -> list[AstNode]:
    return [n for u in units for n in u.children if n.kind is NodeKind.FunctionDef]


def assemble_cpg(
    units: Iterable[AstNode],
    cfgs: Iterable[Cfg],
    cdeps: Iterable[tuple[int, int]],
    ddeps: Iterable[tuple[int, int]],
) -> Cpg:
    units = list(units)
    nodes = node_records(units)
    edges: set[Edge] = set()
    statements: set[int] = set()
    for unit in units:
        for n in unit.walk():
            for c in n.children:
                edges.add((n.id, c.id, Label.AST))
    for cfg in cfgs:
        statements.update(cfg.statements)
        if cfg.entry_statement != EXIT:
            edges.add((cfg.function, cfg.entry_statement, Label.CFG))
        for s, t in cfg.statement_edges():
            edges.add((s, t, Label.CFG))
    for s, t in cdeps:
        edges.add((s, t, Label.C))
    for s, t in ddeps:
        edges.add((s, t, Label.D))
    for s, t, label in edges:
        if s not in nodes or t not in nodes:
            raise DanglingEdge(f"{label} edge {s}->{t} references an unknown node")
    return Cpg(nodes, edges, units, frozenset(statements))


@dataclass
class Dependences:
    cfgs: list[Cfg]
    control: set[tuple[int, int]]
    data: set[tuple[int, int]]


def analyze_functions(units: Iterable[AstNode], symbols: SymbolTable) -> Dependences:
    cfgs: list[Cfg] = []
    control: set[tuple[int, int]] = set()
    data: set[tuple[int, int]] = set()
    for fn in functions_of(units):
        cfg = build_cfg(fn)
        cfgs.append(cfg)
        control |= control_dependence(cfg)
        data |= data_dependence(cfg, symbols)
    return Dependences(cfgs, control, data)


def build_cpg(units: Iterable[AstNode], symbols: SymbolTable) -> Cpg:
    units = list(units)
    deps = analyze_functions(units, symbols)
    return assemble_cpg(units, deps.cfgs, deps.control, deps.data)

