"""Recursive-descent parser for MiniC.

The grammar is documented in ``docs/minic-grammar.md``.  Every node records
its byte span, so ``node.code`` is always the verbatim source text of that
span and ``node.loc`` is the position of its first byte.
"""

from __future__ import annotations

from .ast import AstNode, NodeKind, SourceLoc
from .lexer import BUILTIN_TYPE_NAMES, LineIndex, MiniCSyntaxError, Token, tokenize

K = NodeKind

TYPE_KEYWORDS = frozenset(
    "void char short int long float double signed unsigned _Bool bool struct".split()
)
QUALIFIERS = frozenset("const volatile register auto inline".split())
STORAGE = frozenset("extern static".split())
UNSUPPORTED = frozenset("typedef union enum goto do".split())

ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>=".split())

# Binary operator precedence, loosest first.
BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    ">": 7,
    "<=": 7,
    ">=": 7,
    "<<": 8,
    ">>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}

LITERAL_NAMES = frozenset({"NULL", "true", "false"})

MAX_DEPTH = 120


class Parser:
    def __init__(self, data: bytes, filename: str, first_id: int = 0):
        self.data = data
        self.filename = filename
        self.tokens, self.index = tokenize(data, filename)
        self.pos = 0
        self.next_id = first_id
        self.depth = 0
        self.function: AstNode | None = None
        self.errors: list[MiniCSyntaxError] = []

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tokens[self.pos]
        return t.text == text and t.kind in ("punct", "keyword")

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of file'!r}")
        return self.advance()

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.tok
        raise MiniCSyntaxError(SourceLoc(self.filename, t.line, t.column), message)

    def last_end(self) -> int:
        return self.tokens[self.pos - 1].end if self.pos else 0

    # -- node construction ---------------------------------------------------

    def node(self, kind: NodeKind, start: int, end: int, children=(), name=None, **attrs) -> AstNode:
        line, col = self.index.position(start)
        n = AstNode(
            id=-1,
            kind=kind,
            code=self.data[start:end].decode("utf-8", "replace"),
            loc=SourceLoc(self.filename, line, col),
            children=list(children),
            name=name,
            start=start,
            end=end,
            attrs=attrs,
        )
        return n

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail("nesting too deep")

    def leave(self):
        self.depth -= 1

    # -- declarations --------------------------------------------------------

    def starts_declaration(self) -> bool:
        t = self.tok
        if t.kind == "keyword":
            if t.text in UNSUPPORTED:
                self.fail(f"unsupported construct {t.text!r}")
            return t.text in TYPE_KEYWORDS or t.text in QUALIFIERS or t.text in STORAGE
        return t.kind == "ident" and t.text in BUILTIN_TYPE_NAMES and self.peek().text not in ("(", "=", "[", ".", "->")

    def decl_specifiers(self) -> tuple[str, str | None, list[str]]:
        words: list[str] = []
        storage = None
        qualifiers: list[str] = []
        seen_type = False
        while True:
            t = self.tok
            if t.kind == "keyword" and t.text in STORAGE:
                storage = t.text
                self.advance()
            elif t.kind == "keyword" and t.text in QUALIFIERS:
                qualifiers.append(t.text)
                self.advance()
            elif t.kind == "keyword" and t.text == "struct":
                self.advance()
                if self.tok.kind != "ident":
                    self.fail("expected struct tag")
                words.append("struct " + self.advance().text)
                if self.at("{"):
                    self.skip_member_list()
                seen_type = True
            elif t.kind == "keyword" and t.text in TYPE_KEYWORDS:
                words.append(self.advance().text)
                seen_type = True
            elif t.kind == "ident" and t.text in BUILTIN_TYPE_NAMES and not seen_type:
                words.append(self.advance().text)
                seen_type = True
            elif t.kind == "keyword" and t.text in UNSUPPORTED:
                self.fail(f"unsupported construct {t.text!r}")
            else:
                break
        if not words:
            words = ["int"]
        return " ".join(words), storage, qualifiers

    def skip_member_list(self) -> None:
        # member layouts carry no dependences; only the tag is kept
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                self.fail("unterminated struct definition")
            self.advance()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    return

    def pointer_stars(self) -> int:
        n = 0
        while self.at("*") or (self.tok.kind == "keyword" and self.tok.text in QUALIFIERS):
            if self.at("*"):
                n += 1
            self.advance()
        return n

    def array_dims(self) -> tuple[list[AstNode], int]:
        dims: list[AstNode] = []
        count = 0
        while self.at("["):
            self.advance()
            count += 1
            if not self.at("]"):
                dims.append(self.conditional())
            self.expect("]")
        return dims, count

    def external_declaration(self, unit_children: list[AstNode]) -> None:
        start = self.tok.start
        type_name, storage, qualifiers = self.decl_specifiers()
        if self.at(";"):
            self.advance()
            return
        first = True
        while True:
            decl_start = start if first else self.tok.start
            stars = self.pointer_stars()
            if self.at("("):
                self.fail("function pointers are not supported")
            if self.tok.kind != "ident":
                self.fail(f"expected declarator name, found {self.tok.text!r}")
            name_tok = self.advance()
            if self.at("(") and first:
                unit_children.append(
                    self.function_definition(start, name_tok, type_name, stars, storage, qualifiers)
                )
                return
            unit_children.append(
                self.var_declarator(decl_start, name_tok, type_name, stars, storage, qualifiers, "global")
            )
            first = False
            if self.at(","):
                self.advance()
                continue
            self.expect(";")
            return

    def var_declarator(self, start, name_tok, type_name, stars, storage, qualifiers, scope) -> AstNode:
        dims, ndims = self.array_dims()
        children = list(dims)
        init_index = None
        if self.at("="):
            self.advance()
            init_index = len(children)
            children.append(self.initializer())
        return self.node(
            K.VarDecl,
            start,
            self.last_end(),
            children,
            name=name_tok.text,
            type=type_name + "*" * stars + "[]" * ndims,
            storage=storage,
            const="const" in qualifiers,
            init=init_index,
            scope=scope,
        )

    def initializer(self) -> AstNode:
        if self.at("{"):
            start = self.advance().start
            self.enter()
            items: list[AstNode] = []
            while not self.at("}"):
                items.append(self.initializer())
                if not self.at(","):
                    break
                self.advance()
            self.expect("}")
            self.leave()
            return self.node(K.InitList, start, self.last_end(), items)
        return self.assignment()

    def function_definition(self, start, name_tok, type_name, stars, storage, qualifiers) -> AstNode:
        self.expect("(")
        params: list[AstNode] = []
        variadic = False
        if self.at("void") and self.peek().text == ")":
            self.advance()
        while not self.at(")"):
            if self.at("..."):
                self.advance()
                variadic = True
                break
            params.append(self.parameter(len(params)))
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        attrs = dict(return_type=type_name + "*" * stars, storage=storage, variadic=variadic)
        if self.at(";"):
            self.advance()
            return self.node(K.FunctionDecl, start, self.last_end(), params, name=name_tok.text, **attrs)
        if not self.at("{"):
            self.fail("expected function body")
        fn = self.node(K.FunctionDef, start, start, params, name=name_tok.text, **attrs)
        self.function = fn
        body = self.block()
        self.function = None
        fn.children.append(body)
        fn.end = self.last_end()
        fn.code = self.data[start : fn.end].decode("utf-8", "replace")
        return fn

    def parameter(self, index: int) -> AstNode:
        start = self.tok.start
        if not self.starts_declaration():
            self.fail(f"expected parameter type, found {self.tok.text!r}")
        type_name, _, qualifiers = self.decl_specifiers()
        stars = self.pointer_stars()
        if self.at("("):
            self.fail("function pointers are not supported")
        name = None
        if self.tok.kind == "ident":
            name = self.advance().text
        _, ndims = self.array_dims()
        return self.node(
            K.Param,
            start,
            self.last_end(),
            name=name,
            type=type_name + "*" * (stars + ndims),
            index=index,
            const="const" in qualifiers,
        )

    # -- statements ----------------------------------------------------------

    def block(self, in_switch: bool = False) -> AstNode:
        start = self.expect("{").start
        self.enter()
        children: list[AstNode] = []
        current_case: AstNode | None = None
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("unexpected end of file inside block")
            if self.at("case") or self.at("default"):
                if not in_switch:
                    self.fail(f"{self.tok.text!r} outside of switch")
                if current_case is not None:
                    self._close_case(current_case)
                current_case = self.case_label()
                children.append(current_case)
                continue
            stmts = self.statement()
            if current_case is not None:
                current_case.children.extend(stmts)
            else:
                children.extend(stmts)
        if current_case is not None:
            self._close_case(current_case)
        self.expect("}")
        self.leave()
        return self.node(K.Block, start, self.last_end(), children)

    def _close_case(self, case: AstNode) -> None:
        case.end = self.last_end()
        case.code = self.data[case.start : case.end].decode("utf-8", "replace")

    def case_label(self) -> AstNode:
        t = self.advance()
        if t.text == "case":
            value = self.conditional()
            self.expect(":")
            return self.node(K.Case, t.start, self.last_end(), [value], body_start=1)
        self.expect(":")
        return self.node(K.Default, t.start, self.last_end(), [], body_start=0)

    def statement(self) -> list[AstNode]:
        """Parse one statement; declarations may yield several nodes."""
        t = self.tok
        if t.kind == "keyword":
            if t.text in UNSUPPORTED:
                self.fail(f"unsupported construct {t.text!r}")
            handler = _STATEMENT_KEYWORDS.get(t.text)
            if handler is not None:
                self.enter()
                try:
                    return [handler(self)]
                finally:
                    self.leave()
            if t.text in ("case", "default"):
                self.fail(f"{t.text!r} label outside of the switch body")
        if self.at("{"):
            return [self.block()]
        if self.at(";"):
            self.advance()
            return []
        if self.starts_declaration():
            return self.local_declaration()
        expr = self.expression()
        self.expect(";")
        return [expr]

    def local_declaration(self) -> list[AstNode]:
        start = self.tok.start
        type_name, storage, qualifiers = self.decl_specifiers()
        out: list[AstNode] = []
        first = True
        while True:
            decl_start = start if first else self.tok.start
            stars = self.pointer_stars()
            if self.at("("):
                self.fail("function pointers are not supported")
            if self.tok.kind != "ident":
                self.fail(f"expected declarator name, found {self.tok.text!r}")
            name_tok = self.advance()
            if self.at("("):
                self.fail("nested function declarations are not supported")
            out.append(self.var_declarator(decl_start, name_tok, type_name, stars, storage, qualifiers, "local"))
            first = False
            if self.at(","):
                self.advance()
                continue
            self.expect(";")
            return out

    def sub_statement(self) -> AstNode:
        t = self.tok
        stmts = self.statement()
        if len(stmts) != 1:
            if not stmts:
                # empty statement body: represent as an empty block at the ';'
                return self.node(K.Block, t.start, t.end, [])
            self.fail("declaration not allowed here", t)
        return stmts[0]

    def if_statement(self) -> AstNode:
        start = self.advance().start
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        then = self.sub_statement()
        children = [cond, then]
        if self.at("else"):
            else_tok = self.advance()
            body = self.sub_statement()
            children.append(self.node(K.Else, else_tok.start, self.last_end(), [body]))
        return self.node(K.If, start, self.last_end(), children)

    def switch_statement(self) -> AstNode:
        start = self.advance().start
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        if not self.at("{"):
            self.fail("switch body must be a block")
        body = self.block(in_switch=True)
        return self.node(K.Switch, start, self.last_end(), [cond, body])

    def while_statement(self) -> AstNode:
        start = self.advance().start
        self.expect("(")
        cond = self.expression()
        self.expect(")")
        body = self.sub_statement()
        return self.node(K.While, start, self.last_end(), [cond, body])

    def for_statement(self) -> AstNode:
        start = self.advance().start
        self.expect("(")
        children: list[AstNode] = []
        roles: dict = {"init": None, "cond": None, "update": None}
        if self.at(";"):
            self.advance()
        elif self.starts_declaration():
            decls = self.local_declaration()
            if len(decls) != 1:
                self.fail("only one declarator allowed in a for initializer")
            roles["init"] = len(children)
            children.append(decls[0])
        else:
            roles["init"] = len(children)
            children.append(self.expression())
            self.expect(";")
        if not self.at(";"):
            roles["cond"] = len(children)
            children.append(self.expression())
        self.expect(";")
        if not self.at(")"):
            roles["update"] = len(children)
            children.append(self.expression())
        self.expect(")")
        roles["body"] = len(children)
        children.append(self.sub_statement())
        return self.node(K.For, start, self.last_end(), children, **roles)

    def return_statement(self) -> AstNode:
        start = self.advance().start
        children = []
        if not self.at(";"):
            children.append(self.expression())
        self.expect(";")
        return self.node(K.Return, start, self.last_end(), children)

    def break_statement(self) -> AstNode:
        t = self.advance()
        self.expect(";")
        return self.node(K.Break, t.start, self.last_end())

    def continue_statement(self) -> AstNode:
        t = self.advance()
        self.expect(";")
        return self.node(K.Continue, t.start, self.last_end())

    # -- expressions ---------------------------------------------------------

    def expression(self) -> AstNode:
        expr = self.assignment()
        if self.at(","):
            self.fail("comma expressions are not supported")
        return expr

    def assignment(self) -> AstNode:
        self.enter()
        try:
            lhs = self.conditional()
            if self.tok.kind == "punct" and self.tok.text in ASSIGN_OPS:
                op = self.advance().text
                rhs = self.assignment()
                return self.node(K.Assign, lhs.start, rhs.end, [lhs, rhs], name=op)
            return lhs
        finally:
            self.leave()

    def conditional(self) -> AstNode:
        expr = self.binary(1)
        if self.at("?"):
            self.fail("conditional expressions are not supported")
        return expr

    def binary(self, min_prec: int) -> AstNode:
        lhs = self.unary()
        while True:
            t = self.tok
            prec = BINARY_PRECEDENCE.get(t.text) if t.kind == "punct" else None
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            rhs = self.binary(prec + 1)
            lhs = self.node(K.BinaryOp, lhs.start, rhs.end, [lhs, rhs], name=t.text)

    def unary(self) -> AstNode:
        t = self.tok
        self.enter()
        try:
            if t.kind == "punct" and t.text in ("-", "+", "!", "~", "*", "&", "++", "--"):
                self.advance()
                operand = self.unary()
                return self.node(K.UnaryOp, t.start, operand.end, [operand], name=t.text)
            if t.kind == "keyword" and t.text == "sizeof":
                self.advance()
                if self.at("(") and self._type_follows(1):
                    self.advance()
                    self.type_name()
                    self.expect(")")
                    return self.node(K.UnaryOp, t.start, self.last_end(), [], name="sizeof")
                operand = self.unary()
                return self.node(K.UnaryOp, t.start, operand.end, [operand], name="sizeof")
            if self.at("(") and self._type_follows(1):
                self.advance()
                type_text = self.type_name()
                self.expect(")")
                operand = self.unary()
                return self.node(K.UnaryOp, t.start, operand.end, [operand], name=f"({type_text})")
            return self.postfix()
        finally:
            self.leave()

    def _type_follows(self, k: int) -> bool:
        t = self.peek(k)
        if t.kind == "keyword":
            return t.text in TYPE_KEYWORDS or t.text in QUALIFIERS
        return t.kind == "ident" and t.text in BUILTIN_TYPE_NAMES

    def type_name(self) -> str:
        type_text, _, _ = self.decl_specifiers()
        stars = self.pointer_stars()
        return type_text + "*" * stars

    def postfix(self) -> AstNode:
        expr = self.primary()
        while True:
            t = self.tok
            if t.kind != "punct":
                return expr
            if t.text == "[":
                self.advance()
                index = self.expression()
                self.expect("]")
                expr = self.node(K.BinaryOp, expr.start, self.last_end(), [expr, index], name="[]")
            elif t.text == "(":
                expr = self.call(expr)
            elif t.text in (".", "->"):
                self.advance()
                if self.tok.kind != "ident":
                    self.fail("expected member name")
                member = self.advance().text
                expr = self.node(K.MemberAccess, expr.start, self.last_end(), [expr], name=t.text + member)
            elif t.text in ("++", "--"):
                self.advance()
                expr = self.node(K.UnaryOp, expr.start, self.last_end(), [expr], name="post" + t.text)
            else:
                return expr

    def call(self, callee: AstNode) -> AstNode:
        self.expect("(")
        args: list[AstNode] = []
        while not self.at(")"):
            value = self.assignment()
            args.append(self.node(K.Arg, value.start, value.end, [value], index=len(args)))
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        name = callee.name if callee.kind is K.Identifier else None
        return self.node(K.Call, callee.start, self.last_end(), [callee, *args], name=name)

    def primary(self) -> AstNode:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            if t.text in LITERAL_NAMES:
                return self.node(K.Literal, t.start, t.end, name=t.text)
            return self.node(K.Identifier, t.start, t.end, name=t.text)
        if t.kind in ("number", "char"):
            self.advance()
            return self.node(K.Literal, t.start, t.end, name=t.text)
        if t.kind == "string":
            self.advance()
            end = t.end
            while self.tok.kind == "string":
                end = self.advance().end
            return self.node(K.Literal, t.start, end, name=self.data[t.start:end].decode("utf-8", "replace"))
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if t.kind == "eof":
            self.fail("unexpected end of file in expression")
        self.fail(f"unexpected token {t.text!r}")

    # -- translation unit ----------------------------------------------------

    def translation_unit(self, recover: bool = False) -> AstNode:
        children: list[AstNode] = []
        while self.tok.kind != "eof":
            if self.at(";"):
                self.advance()
                continue
            mark = self.pos
            try:
                if not self.starts_declaration() and not (self.tok.kind == "ident" and self.peek().text == "("):
                    self.fail(f"expected a declaration, found {self.tok.text!r}")
                self.external_declaration(children)
            except MiniCSyntaxError as err:
                if not recover:
                    raise
                self.errors.append(err)
                self.depth = 0
                self.function = None
                self._skip_external(mark)
        root = self.node(K.TranslationUnit, 0, len(self.data), children)
        return root

    def _skip_external(self, mark: int) -> None:
        """Skip to the end of the broken top-level declaration."""
        self.pos = mark
        depth = 0
        while self.tok.kind != "eof":
            t = self.tok
            if depth > 0 and self.pos > mark and t.column == 1 and t.kind == "keyword" and (
                t.text in TYPE_KEYWORDS or t.text in STORAGE
            ):
                # unbalanced braces: resync at a declaration starting a line
                return
            self.advance()
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth <= 0:
                    return
            elif t.text == ";" and depth == 0:
                return


_STATEMENT_KEYWORDS = {
    "if": Parser.if_statement,
    "switch": Parser.switch_statement,
    "while": Parser.while_statement,
    "for": Parser.for_statement,
    "return": Parser.return_statement,
    "break": Parser.break_statement,
    "continue": Parser.continue_statement,
}


def _finalize(root: AstNode, first_id: int) -> int:
    """Assign pre-order ids and enclosing functions; returns the next free id."""
    next_id = first_id
    stack: list[tuple[AstNode, int | None]] = [(root, None)]
    while stack:
        node, fn = stack.pop()
        node.id = next_id
        next_id += 1
        if node.kind is K.FunctionDef:
            fn = node.id
        node.enclosing_function = fn
        for child in reversed(node.children):
            stack.append((child, fn))
    return next_id


def _as_bytes(source: str | bytes) -> bytes:
    return source.encode("utf-8") if isinstance(source, str) else bytes(source)


def parse_translation_unit(source: str | bytes, filename: str, first_id: int = 0) -> AstNode:
    """Parse one MiniC file; raises :class:`MiniCSyntaxError` on the first error."""
    if not filename:
        raise ValueError("filename must be nonempty")
    parser = Parser(_as_bytes(source), filename)
    root = parser.translation_unit()
    _finalize(root, first_id)
    return root


def parse_with_recovery(
    source: str | bytes, filename: str, first_id: int = 0
) -> tuple[AstNode, list[MiniCSyntaxError]]:
    """Parse what can be parsed; broken top-level declarations are skipped."""
    if not filename:
        raise ValueError("filename must be nonempty")
    data = _as_bytes(source)
    try:
        parser = Parser(data, filename)
    except MiniCSyntaxError as err:
        empty = AstNode(-1, K.TranslationUnit, data.decode("utf-8", "replace"), SourceLoc(filename, 1, 1), end=len(data))
        _finalize(empty, first_id)
        return empty, [err]
    root = parser.translation_unit(recover=True)
    _finalize(root, first_id)
    return root, parser.errors


def line_count(source: bytes) -> int:
    return LineIndex(source).line_count
