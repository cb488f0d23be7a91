"""MiniC front end: tokenizer, parser and project-wide symbol tables."""

from .ast import AstNode, NodeKind, SourceLoc, dump_ast
from .lexer import MiniCSyntaxError
from .parser import parse_translation_unit, parse_with_recovery
from .symbols import DuplicateDefinition, Symbol, SymbolKind, SymbolTable, build_symbol_tables

__all__ = [
    "AstNode",
    "NodeKind",
    "SourceLoc",
    "dump_ast",
    "MiniCSyntaxError",
    "parse_translation_unit",
    "parse_with_recovery",
    "DuplicateDefinition",
    "Symbol",
    "SymbolKind",
    "SymbolTable",
    "build_symbol_tables",
]
