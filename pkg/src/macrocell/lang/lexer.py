"""Tokenizer for adaptation source code."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from macrocell.errors import LexError

KEYWORDS = frozenset(
    {"bool", "int8", "int16", "int32", "struct", "local", "if", "else", "for"}
)
BOOL_LITERALS = frozenset({"true", "false"})

# Longest match first: "..", "<=", "&&" and friends before their prefixes.
OPERATORS = ("++", "==", "!=", "<=", ">=", "&&", "||", "=", "<", ">", "+", "-", "*", "/", "!")
PUNCTUATION = ("..", ";", ",", "{", "}", "(", ")", "[", "]", ".")


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer-literal"
    BOOL = "bool-literal"
    PUNCT = "punctuation"
    OP = "operator"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int
    offset: int

    def __str__(self) -> str:
        return f"{self.kind.value} {self.lexeme}"


_SYMBOLS = sorted(OPERATORS + PUNCTUATION, key=len, reverse=True)
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + r")"
)
_PUNCT_SET = frozenset(PUNCTUATION)


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace and ``//`` comments.

    Raises :class:`LexError` at the first character outside the alphabet
    (a lone ``&`` or ``|``, ``#``, ``@``, quotes, non-ASCII letters...).
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        column = pos - line_start + 1
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}", line, column)
        group = m.lastgroup
        text = m.group()
        if group == "word":
            if text in KEYWORDS:
                kind = TokenKind.KEYWORD
            elif text in BOOL_LITERALS:
                kind = TokenKind.BOOL
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, text, line, column, pos))
        elif group == "int":
            tokens.append(Token(TokenKind.INT, text, line, column, pos))
        elif group == "sym":
            kind = TokenKind.PUNCT if text in _PUNCT_SET else TokenKind.OP
            tokens.append(Token(kind, text, line, column, pos))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    return tokens
