"""Statement-level control-flow graphs grouped into basic blocks."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..minic.ast import PREDICATE_KINDS, AstNode, NodeKind

K = NodeKind

EXIT = -1


@dataclass
class Cfg:
    """CFG of one function.

    ``blocks[i]`` lists statement node ids in execution order; the last block
    is the synthetic exit and is always empty.  ``succ`` is the underlying
    statement-level graph, with :data:`EXIT` standing for the exit block.
    """

    function: int
    blocks: list[list[int]]
    edges: list[tuple[int, int]]
    entry: int
    exit: int
    succ: dict[int, list[int]] = field(default_factory=dict)
    statements: dict[int, AstNode] = field(default_factory=dict)
    entry_statement: int = EXIT

    def block_of(self) -> dict[int, int]:
        return {s: b for b, stmts in enumerate(self.blocks) for s in stmts}

    def block_succ(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {b: [] for b in range(len(self.blocks))}
        for a, b in self.edges:
            out[a].append(b)
        return out

    def statement_edges(self) -> list[tuple[int, int]]:
        return [(s, t) for s, succs in self.succ.items() for t in succs if t != EXIT]


class _Lowering:
    def __init__(self) -> None:
        self.succ: dict[int, list[int]] = {}
        self.statements: dict[int, AstNode] = {}

    def add(self, node: AstNode, *targets: int) -> int:
        self.statements[node.id] = node
        out = self.succ.setdefault(node.id, [])
        for t in targets:
            if t not in out:
                out.append(t)
        return node.id

    def seq(self, stmts: list[AstNode], nxt: int, brk: int | None, cont: int | None) -> int:
        entry = nxt
        for s in reversed(stmts):
            entry = self.stmt(s, entry, brk, cont)
        return entry

    def stmt(self, s: AstNode, nxt: int, brk: int | None, cont: int | None) -> int:
        kind = s.kind
        if kind is K.Block:
            return self.seq(s.children, nxt, brk, cont)
        if kind is K.If:
            then_entry = self.stmt(s.children[1], nxt, brk, cont)
            else_entry = nxt
            if len(s.children) > 2:
                else_entry = self.stmt(s.children[2].children[0], nxt, brk, cont)
            return self.add(s, then_entry, else_entry)
        if kind is K.While:
            self.statements[s.id] = s
            body_entry = self.stmt(s.children[1], s.id, nxt, s.id)
            return self.add(s, body_entry, nxt)
        if kind is K.For:
            return self._for(s, nxt)
        if kind is K.Switch:
            return self._switch(s, nxt, cont)
        if kind is K.Return:
            return self.add(s, EXIT)
        if kind is K.Break:
            return self.add(s, nxt if brk is None else brk)
        if kind is K.Continue:
            return self.add(s, nxt if cont is None else cont)
        return self.add(s, nxt)

    def _for(self, s: AstNode, nxt: int) -> int:
        a = s.attrs
        self.statements[s.id] = s
        update_entry = s.id
        if a.get("update") is not None:
            update_entry = self.add(s.children[a["update"]], s.id)
        body_entry = self.stmt(s.children[a["body"]], update_entry, nxt, update_entry)
        # a missing condition still gets its structural exit edge so that
        # every statement can reach the function exit
        self.add(s, body_entry, nxt)
        if a.get("init") is not None:
            return self.add(s.children[a["init"]], s.id)
        return s.id

    def _switch(self, s: AstNode, nxt: int, cont: int | None) -> int:
        items = s.children[1].children
        follow = nxt
        labels: list[int] = []
        has_default = False
        for item in reversed(items):
            if item.kind in (K.Case, K.Default):
                has_default = has_default or item.kind is K.Default
                body = item.children[item.attrs.get("body_start", 0):]
                body_entry = self.seq(body, follow, nxt, cont)
                follow = self.add(item, body_entry)
                labels.append(item.id)
            else:
                follow = self.stmt(item, follow, nxt, cont)
        labels.reverse()
        targets = labels + ([] if has_default else [nxt])
        return self.add(s, *targets)


def _body(function: AstNode) -> AstNode | None:
    for child in function.children:
        if child.kind is K.Block:
            return child
    return None


def build_cfg(function: AstNode) -> Cfg:
    if function.kind is not K.FunctionDef:
        raise ValueError(f"build_cfg expects a FunctionDef, got {function.kind.value}")
    low = _Lowering()
    body = _body(function)
    entry_stmt = low.seq(body.children, EXIT, None, None) if body is not None else EXIT

    order = sorted(low.statements)
    preds: dict[int, list[int]] = {s: [] for s in order}
    for s in order:
        for t in low.succ[s]:
            if t != EXIT:
                preds[t].append(s)

    def ends_block(s: int) -> bool:
        return low.statements[s].kind in PREDICATE_KINDS or len(low.succ[s]) != 1

    leaders = set()
    for s in order:
        p = preds[s]
        if s == entry_stmt or len(p) != 1 or ends_block(p[0]):
            leaders.add(s)

    blocks: list[list[int]] = []
    block_of: dict[int, int] = {}
    # entry block first, then the remaining leaders in document order
    leader_order = sorted(leaders, key=lambda s: (s != entry_stmt, s))
    for leader in leader_order:
        chain = [leader]
        cur = leader
        while not ends_block(cur):
            nxt = low.succ[cur][0]
            if nxt == EXIT or nxt in leaders or nxt in block_of:
                break
            chain.append(nxt)
            cur = nxt
        for s in chain:
            block_of[s] = len(blocks)
        blocks.append(chain)
    for s in order:
        if s not in block_of:
            block_of[s] = len(blocks)
            blocks.append([s])

    exit_block = len(blocks)
    blocks.append([])
    edges: list[tuple[int, int]] = []
    seen = set()
    for b, stmts in enumerate(blocks[:-1]):
        for t in low.succ[stmts[-1]]:
            e = (b, exit_block if t == EXIT else block_of[t])
            if e not in seen:
                seen.add(e)
                edges.append(e)
    entry = block_of[entry_stmt] if entry_stmt != EXIT else exit_block
    return Cfg(
        function=function.id,
        blocks=blocks,
        edges=edges,
        entry=entry,
        exit=exit_block,
        succ=low.succ,
        statements=low.statements,
        entry_statement=entry_stmt,
    )
