"""Project-wide symbol tables.

External-linkage symbols are keyed by their bare name; ``static`` file-scope
symbols by ``file::name``; locals and parameters by a key that embeds their
function and declaration position, so they never collide across scopes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .ast import AstNode, NodeKind, SourceLoc

K = NodeKind
log = logging.getLogger(__name__)


class SymbolKind(str, Enum):
    function = "function"
    global_variable = "global_variable"
    local_variable = "local_variable"
    parameter = "parameter"


class DuplicateDefinition(Exception):
    def __init__(self, symbol: str, first: SourceLoc, second: SourceLoc):
        super().__init__(f"duplicate definition of {symbol!r}: {first} and {second}")
        self.symbol = symbol
        self.first = first
        self.second = second


@dataclass(frozen=True)
class Site:
    node_id: int
    loc: SourceLoc


@dataclass
class Symbol:
    key: str
    name: str
    kind: SymbolKind
    scope: str
    definition: Site | None = None
    declarations: list[Site] = field(default_factory=list)

    @property
    def is_variable(self) -> bool:
        return self.kind is not SymbolKind.function

    def primary_site(self) -> Site | None:
        """Definition if known, else the first declaration."""
        if self.definition is not None:
            return self.definition
        return self.declarations[0] if self.declarations else None


@dataclass
class SymbolTable:
    entries: dict[str, Symbol] = field(default_factory=dict)
    resolution: dict[int, str] = field(default_factory=dict)
    declared_by: dict[int, str] = field(default_factory=dict)
    unresolved: list[int] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def lookup(self, name: str, file: str | None = None) -> Symbol | None:
        if file is not None and f"{file}::{name}" in self.entries:
            return self.entries[f"{file}::{name}"]
        return self.entries.get(name)

    def symbol_of(self, node_id: int) -> Symbol | None:
        key = self.resolution.get(node_id) or self.declared_by.get(node_id)
        return self.entries.get(key) if key else None


def _local_key(loc: SourceLoc, function: str, name: str) -> str:
    return f"{loc.file}::{function}::{name}@{loc.line}:{loc.column}"


class _Builder:
    def __init__(self, strict: bool):
        self.strict = strict
        self.table = SymbolTable()

    def duplicate(self, name: str, first: Site, second: Site) -> None:
        err = DuplicateDefinition(name, first.loc, second.loc)
        if self.strict:
            raise err
        self.table.diagnostics.append(str(err))
        log.warning("%s", err)

    # -- pass 1: file scope -------------------------------------------------

    def declare_top(self, unit: AstNode, node: AstNode) -> None:
        file = unit.loc.file
        name = node.name
        if not name:
            return
        storage = node.attrs.get("storage")
        key = f"{file}::{name}" if storage == "static" else name
        if node.kind is K.VarDecl:
            kind = SymbolKind.global_variable
            is_def = storage != "extern" or node.attrs.get("init") is not None
        else:
            kind = SymbolKind.function
            is_def = node.kind is K.FunctionDef
        sym = self.table.entries.get(key)
        if sym is None:
            scope = f"file:{file}" if storage == "static" else "global"
            sym = self.table.entries[key] = Symbol(key, name, kind, scope)
        elif sym.kind is not kind:
            self.table.diagnostics.append(f"{node.loc}: {name!r} redeclared as a different kind of symbol")
        site = Site(node.id, node.loc)
        if is_def:
            if sym.definition is not None:
                self.duplicate(name, sym.definition, site)
            else:
                sym.definition = site
        else:
            sym.declarations.append(site)
        self.table.declared_by[node.id] = key

    # -- pass 2: function bodies ------------------------------------------------

    def resolve_unit(self, unit: AstNode) -> None:
        self.file = unit.loc.file
        for top in unit.children:
            if top.kind is K.FunctionDef:
                self.resolve_function(top)
            elif top.kind is K.VarDecl:
                self.scopes: list[dict[str, str]] = []
                for child in top.children:
                    self.resolve_expr(child)

    def resolve_function(self, fn: AstNode) -> None:
        self.function = fn.name or "?"
        self.scopes = [{}]
        body = None
        for child in fn.children:
            if child.kind is K.Param:
                if child.name:
                    self.declare_local(child, SymbolKind.parameter)
            else:
                body = child
        if body is not None:
            self.resolve_stmt(body)

    def declare_local(self, node: AstNode, kind: SymbolKind) -> None:
        scope = self.scopes[-1]
        key = _local_key(node.loc, self.function, node.name)
        site = Site(node.id, node.loc)
        if node.name in scope:
            prev = self.table.entries[scope[node.name]]
            self.duplicate(node.name, prev.definition, site)
            return
        scope[node.name] = key
        self.table.entries[key] = Symbol(key, node.name, kind, f"{self.file}::{self.function}", definition=site)
        self.table.declared_by[node.id] = key

    def lookup(self, name: str) -> str | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        static_key = f"{self.file}::{name}"
        if static_key in self.table.entries:
            return static_key
        if name in self.table.entries:
            return name
        return None

    def resolve_stmt(self, node: AstNode) -> None:
        kind = node.kind
        if kind is K.Block:
            self.scopes.append({})
            for child in node.children:
                self.resolve_stmt(child)
            self.scopes.pop()
        elif kind is K.VarDecl:
            self.declare_local(node, SymbolKind.local_variable)
            for child in node.children:
                self.resolve_expr(child)
        elif kind is K.For:
            self.scopes.append({})
            for child in node.children:
                self.resolve_stmt(child)
            self.scopes.pop()
        elif kind in (K.If, K.Else, K.While, K.Switch, K.Case, K.Default, K.Return):
            for child in node.children:
                self.resolve_stmt(child)
        elif kind in (K.Break, K.Continue):
            pass
        else:
            self.resolve_expr(node)

    def resolve_expr(self, node: AstNode) -> None:
        stack = [node]
        while stack:
            n = stack.pop()
            if n.kind is K.Identifier:
                key = self.lookup(n.name)
                if key is None:
                    self.table.unresolved.append(n.id)
                else:
                    self.table.resolution[n.id] = key
            elif n.kind is K.Block:
                # statement-shaped child of an expression position (empty body)
                self.resolve_stmt(n)
                continue
            stack.extend(n.children)


def build_symbol_tables(units: Iterable[AstNode], strict: bool = True) -> SymbolTable:
    """Build one table for all translation units.

    With ``strict`` a second definition of a symbol raises
    :class:`DuplicateDefinition`; otherwise it is recorded as a diagnostic and
    the first definition wins.  Unresolved identifiers never raise.
    """
    units = list(units)
    files = [u.loc.file for u in units]
    if len(set(files)) != len(files):
        raise ValueError("translation units must come from distinct files")
    builder = _Builder(strict)
    for unit in units:
        for top in unit.children:
            if top.kind in (K.VarDecl, K.FunctionDef, K.FunctionDecl):
                builder.declare_top(unit, top)
    for unit in units:
        builder.resolve_unit(unit)
    table = builder.table
    table.unresolved.sort()
    return table
