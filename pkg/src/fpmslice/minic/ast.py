"""AST node types for the MiniC front end."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator


class NodeKind(str, Enum):
    TranslationUnit = "TranslationUnit"
    FunctionDef = "FunctionDef"
    FunctionDecl = "FunctionDecl"
    Param = "Param"
    VarDecl = "VarDecl"
    Assign = "Assign"
    Call = "Call"
    Arg = "Arg"
    If = "If"
    Else = "Else"
    Switch = "Switch"
    Case = "Case"
    Default = "Default"
    Block = "Block"
    While = "While"
    For = "For"
    Return = "Return"
    Break = "Break"
    Continue = "Continue"
    BinaryOp = "BinaryOp"
    UnaryOp = "UnaryOp"
    Identifier = "Identifier"
    Literal = "Literal"
    MemberAccess = "MemberAccess"
    InitList = "InitList"

    def __str__(self) -> str:
        return self.value


# Statement kinds that appear as nodes of a function's control-flow graph.
CFG_STATEMENT_KINDS = frozenset(
    {
        NodeKind.VarDecl,
        NodeKind.Assign,
        NodeKind.Call,
        NodeKind.UnaryOp,
        NodeKind.BinaryOp,
        NodeKind.Identifier,
        NodeKind.Literal,
        NodeKind.MemberAccess,
        NodeKind.If,
        NodeKind.Switch,
        NodeKind.Case,
        NodeKind.Default,
        NodeKind.While,
        NodeKind.For,
        NodeKind.Return,
        NodeKind.Break,
        NodeKind.Continue,
    }
)

PREDICATE_KINDS = frozenset({NodeKind.If, NodeKind.Switch, NodeKind.While, NodeKind.For})

# Containers whose direct statement children get structural edges.
SCOPE_KINDS = frozenset({NodeKind.Block, NodeKind.Case, NodeKind.Default})


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int
    column: int

    def __post_init__(self) -> None:
        if not self.file:
            raise ValueError("SourceLoc.file must be nonempty")
        if self.line < 1 or self.column < 1:
            raise ValueError(f"SourceLoc line/column must be >= 1, got {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(eq=False)
class AstNode:
    """One syntax node.

    ``start``/``end`` are byte offsets into the file; ``code`` is the verbatim
    text between them.  ``name`` holds the identifier, declared name or
    operator depending on ``kind``.  ``attrs`` carries role information the
    later passes need (e.g. ``cond``/``init`` children of a ``for``, storage
    class of a declaration).
    """

    id: int
    kind: NodeKind
    code: str
    loc: SourceLoc
    children: list[AstNode] = field(default_factory=list)
    enclosing_function: int | None = None
    name: str | None = None
    start: int = 0
    end: int = 0
    attrs: dict = field(default_factory=dict)

    def walk(self) -> Iterator[AstNode]:
        """Pre-order traversal (document order)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind.value,
            "name": self.name,
            "code": self.code,
            "loc": [self.loc.file, self.loc.line, self.loc.column],
            "span": [self.start, self.end],
            "function": self.enclosing_function,
            "attrs": {k: v for k, v in sorted(self.attrs.items())},
            "children": [c.to_dict() for c in self.children],
        }
        return out

    def __repr__(self) -> str:
        return f"AstNode({self.id}, {self.kind.value}, {self.code[:30]!r} @ {self.loc})"


def dump_ast(root: AstNode) -> str:
    """Canonical serialization; identical input bytes give identical output."""
    return json.dumps(root.to_dict(), sort_keys=True, separators=(",", ":"))

