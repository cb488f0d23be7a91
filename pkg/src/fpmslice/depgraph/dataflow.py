"""Def/use extraction and reaching definitions for D edges.

Modelling choices:

* ``x = e``, ``x op= e``, ``++x``/``x--`` are *strong* definitions of ``x``
  (they kill other definitions of ``x``).
* Writes through an index, pointer or member (``a[i] = e``, ``*p = e``,
  ``s.f = e``) and passing ``&v`` to a call are *weak* definitions of the
  base variable: they generate a definition but kill nothing.  The base of
  an indexed write is also a use.
* Declarations (``int x = e;``) and parameters start a variable's lifetime.
  They kill older definitions but do not generate one; the flow from a
  declaration to its uses is carried by V edges instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..minic.ast import AstNode, NodeKind
from ..minic.symbols import SymbolKind, SymbolTable
from .cfg import EXIT, Cfg

K = NodeKind


@dataclass
class Use:
    identifier: int
    key: str
    anchors: tuple[int, ...]  # statement first, then enclosing call arguments


@dataclass
class Access:
    uses: list[Use] = field(default_factory=list)
    strong: set[str] = field(default_factory=set)
    weak: set[str] = field(default_factory=set)
    kills: set[str] = field(default_factory=set)

    @property
    def defs(self) -> set[str]:
        return self.strong | self.weak


def expression_roots(stmt: AstNode) -> list[AstNode]:
    """Sub-expressions evaluated by the statement node itself."""
    kind = stmt.kind
    if kind in (K.If, K.While, K.Switch):
        return [stmt.children[0]]
    if kind is K.For:
        cond = stmt.attrs.get("cond")
        return [] if cond is None else [stmt.children[cond]]
    if kind is K.Case:
        return stmt.children[:1]
    if kind in (K.Default, K.Break, K.Continue, K.Block):
        return []
    return [stmt]


class _Collector:
    def __init__(self, stmt: AstNode, symbols: SymbolTable):
        self.stmt = stmt
        self.symbols = symbols
        self.access = Access()
        self.args: list[int] = []

    def var_key(self, ident: AstNode) -> str | None:
        key = self.symbols.resolution.get(ident.id)
        if key is None:
            return None
        sym = self.symbols.entries.get(key)
        return key if sym is not None and sym.kind is not SymbolKind.function else None

    def use(self, ident: AstNode) -> None:
        key = self.var_key(ident)
        if key is not None:
            self.access.uses.append(Use(ident.id, key, (self.stmt.id, *self.args)))

    def base_identifier(self, node: AstNode) -> AstNode | None:
        while True:
            if node.kind is K.Identifier:
                return node
            if node.kind in (K.BinaryOp,) and node.name == "[]":
                node = node.children[0]
            elif node.kind is K.MemberAccess or (node.kind is K.UnaryOp and node.name in ("*", "&")):
                node = node.children[0]
            else:
                return None

    def define(self, ident: AstNode | None, strong: bool) -> None:
        if ident is None:
            return
        key = self.var_key(ident)
        if key is not None:
            (self.access.strong if strong else self.access.weak).add(key)

    def target(self, node: AstNode, also_read: bool) -> None:
        """Visit an lvalue."""
        if node.kind is K.Identifier:
            if also_read:
                self.use(node)
            self.define(node, strong=True)
            return
        if node.kind is K.BinaryOp and node.name == "[]":
            base, index = node.children
            self.define(self.base_identifier(base), strong=False)
            # the base is evaluated: a pointer's value decides where the write lands
            self.read(base)
            self.read(index)
            return
        if node.kind is K.UnaryOp and node.name == "*":
            self.read(node.children[0])
            self.define(self.base_identifier(node.children[0]), strong=False)
            return
        if node.kind is K.MemberAccess:
            base = node.children[0]
            if node.name.startswith("->") or also_read or base.kind is not K.Identifier:
                self.read(base)
            self.define(self.base_identifier(base), strong=False)
            return
        self.read(node)

    def read(self, node: AstNode) -> None:
        kind = node.kind
        if kind is K.Identifier:
            self.use(node)
        elif kind is K.Assign:
            lhs, rhs = node.children
            self.read(rhs)
            self.target(lhs, also_read=node.name != "=")
        elif kind is K.UnaryOp and node.name in ("++", "--", "post++", "post--"):
            self.target(node.children[0], also_read=True)
        elif kind is K.Call:
            for child in node.children[1:]:
                self.read(child)
        elif kind is K.Arg:
            self.args.append(node.id)
            value = node.children[0]
            if value.kind is K.UnaryOp and value.name == "&":
                self.define(self.base_identifier(value.children[0]), strong=False)
            self.read(value)
            self.args.pop()
        elif kind is K.VarDecl:
            for child in node.children:
                self.read(child)
        else:
            for child in node.children:
                self.read(child)


def statement_access(stmt: AstNode, symbols: SymbolTable) -> Access:
    col = _Collector(stmt, symbols)
    for root in expression_roots(stmt):
        col.read(root)
    if stmt.kind is K.VarDecl:
        key = symbols.declared_by.get(stmt.id)
        if key is not None:
            col.access.kills.add(key)
    return col.access


def function_accesses(cfg: Cfg, symbols: SymbolTable) -> dict[int, Access]:
    return {s: statement_access(node, symbols) for s, node in cfg.statements.items()}


def reaching_definitions(cfg: Cfg, accesses: dict[int, Access]) -> tuple[list[tuple[int, str]], dict[int, int]]:
    """Return the definition list and, per statement, a bitset of reaching defs."""
    defs: list[tuple[int, str]] = []
    by_key: dict[str, int] = {}
    gen: dict[int, int] = {}
    for s in sorted(cfg.statements):
        bits = 0
        for key in sorted(accesses[s].defs):
            bit = 1 << len(defs)
            defs.append((s, key))
            by_key[key] = by_key.get(key, 0) | bit
            bits |= bit
        gen[s] = bits
    kill: dict[int, int] = {}
    for s, acc in accesses.items():
        mask = 0
        for key in acc.strong | acc.kills:
            mask |= by_key.get(key, 0)
        kill[s] = mask & ~gen[s]

    preds: dict[int, list[int]] = {s: [] for s in cfg.statements}
    for s, targets in cfg.succ.items():
        for t in targets:
            if t != EXIT:
                preds[t].append(s)
    reach_in = {s: 0 for s in cfg.statements}
    reach_out = {s: gen[s] for s in cfg.statements}
    work = deque(sorted(cfg.statements))
    queued = set(work)
    while work:
        s = work.popleft()
        queued.discard(s)
        new_in = 0
        for p in preds[s]:
            new_in |= reach_out[p]
        reach_in[s] = new_in
        new_out = gen[s] | (new_in & ~kill[s])
        if new_out != reach_out[s]:
            reach_out[s] = new_out
            for t in cfg.succ[s]:
                if t != EXIT and t not in queued:
                    queued.add(t)
                    work.append(t)
    return defs, reach_in


def data_dependence(cfg: Cfg, symbols: SymbolTable) -> set[tuple[int, int]]:
    """D edges ``(defining statement, using statement or call argument)``."""
    accesses = function_accesses(cfg, symbols)
    defs, reach_in = reaching_definitions(cfg, accesses)
    key_mask: dict[str, int] = {}
    for i, (_, key) in enumerate(defs):
        key_mask[key] = key_mask.get(key, 0) | (1 << i)
    edges: set[tuple[int, int]] = set()
    for s, acc in accesses.items():
        incoming = reach_in[s]
        if not incoming:
            continue
        for use in acc.uses:
            bits = incoming & key_mask.get(use.key, 0)
            while bits:
                low = bits & -bits
                d_stmt = defs[low.bit_length() - 1][0]
                for anchor in use.anchors:
                    edges.add((d_stmt, anchor))
                bits ^= low
    return edges
