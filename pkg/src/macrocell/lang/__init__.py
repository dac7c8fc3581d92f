"""Front-end for the adaptation language: lexing, parsing, checking."""

from macrocell.lang.analyzer import TypedProgram, analyze
from macrocell.lang.lexer import Token, TokenKind, tokenize
from macrocell.lang.parser import parse, parse_source
from macrocell.lang.printer import format_program


def check_source(source: str) -> TypedProgram:
    """Tokenize, parse and analyze ``source`` in one call."""
    return analyze(parse(tokenize(source)))


__all__ = [
    "Token",
    "TokenKind",
    "TypedProgram",
    "analyze",
    "check_source",
    "format_program",
    "parse",
    "parse_source",
    "tokenize",
]
