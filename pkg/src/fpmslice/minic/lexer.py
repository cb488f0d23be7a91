"""Tokenizer for MiniC.

Works on raw bytes so that columns count bytes from the start of the line
(the Cppcheck convention).  Comments and preprocessor directive lines are
skipped; everything else either becomes a token or raises
:class:`MiniCSyntaxError`.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass

from .ast import SourceLoc


class MiniCSyntaxError(Exception):
    def __init__(self, loc: SourceLoc, message: str):
        super().__init__(f"{loc}: {message}")
        self.loc = loc
        self.message = message


KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if int long register return short signed sizeof static
    struct switch typedef union unsigned void volatile while inline _Bool bool
    """.split()
)

# Names usually provided by system headers; accepted as opaque type names.
BUILTIN_TYPE_NAMES = frozenset(
    """
    size_t ssize_t wchar_t ptrdiff_t intptr_t uintptr_t FILE
    int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t
    """.split()
)

_TOKEN_RE = re.compile(
    rb"""
    (?P<ws>[ \t\r\f\v]+|\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>(?:0[xX][0-9a-fA-F]+|(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)[uUlLfF]*)
  | (?P<char>L?'(?:\\.|[^\\'\n])+')
  | (?P<string>L?"(?:\\.|[^\\"\n])*")
  | (?P<punct>\.\.\.|<<=|>>=|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]=|[-+*/%&|^!~<>=?:;,.()\[\]{}])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | char | string | punct | eof
    text: str
    start: int
    end: int
    line: int
    column: int


class LineIndex:
    """Maps byte offsets to 1-based (line, column)."""

    def __init__(self, data: bytes):
        self.starts = [0]
        pos = data.find(b"\n")
        while pos != -1:
            self.starts.append(pos + 1)
            pos = data.find(b"\n", pos + 1)

    def position(self, offset: int) -> tuple[int, int]:
        i = bisect.bisect_right(self.starts, offset) - 1
        return i + 1, offset - self.starts[i] + 1

    @property
    def line_count(self) -> int:
        return len(self.starts)


def _strip_directives(data: bytes) -> bytes:
    """Blank out preprocessor lines, keeping byte offsets intact."""
    if b"#" not in data:
        return data
    out = bytearray(data)
    lines = data.split(b"\n")
    offset = 0
    in_directive = False
    for raw in lines:
        stripped = raw.lstrip(b" \t")
        if in_directive or stripped.startswith(b"#"):
            for i in range(offset, offset + len(raw)):
                out[i] = 0x20
            in_directive = raw.rstrip(b" \t\r").endswith(b"\\")
        offset += len(raw) + 1
    return bytes(out)


def tokenize(data: bytes, filename: str) -> tuple[list[Token], LineIndex]:
    index = LineIndex(data)
    scan = _strip_directives(data)
    tokens: list[Token] = []
    pos = 0
    n = len(scan)
    match = _TOKEN_RE.match
    while pos < n:
        m = match(scan, pos)
        if m is None:
            line, col = index.position(pos)
            if scan.startswith(b"/*", pos):
                msg = "unterminated comment"
            elif scan[pos : pos + 1] in (b'"', b"'"):
                msg = "unterminated literal"
            else:
                msg = f"unexpected character {scan[pos:pos + 1]!r}"
            raise MiniCSyntaxError(SourceLoc(filename, line, col), msg)
        kind = m.lastgroup
        end = m.end()
        if kind not in ("ws", "lcomment", "bcomment"):
            text = data[pos:end].decode("utf-8", "replace")
            if kind == "ident" and text in KEYWORDS:
                kind = "keyword"
            line, col = index.position(pos)
            tokens.append(Token(kind, text, pos, end, line, col))
        pos = end
    line, col = index.position(n)
    tokens.append(Token("eof", "", n, n, line, col))
    return tokens, index
