"""Recursive-descent parser for adaptation source code.

Grammar::

    program   := ext_decl* local_decl* stmt*
    ext_decl  := type declarator ";"
    local_decl:= "local" type declarator ";"
    type      := scalar | "struct" "{" (scalar IDENT ";")+ "}"
    scalar    := "bool" | "int8" | "int16" | "int32"
    declarator:= IDENT [ "[" sint ".." sint "]" ]
    stmt      := lvalue "=" expr ";"
               | "if" "(" expr ")" stmt [ "else" stmt ]
               | "for" "(" IDENT "=" expr ";" IDENT "<=" expr ";" IDENT "++" ")" stmt
               | "{" stmt* "}"
    lvalue    := IDENT [ "[" expr "]" ] [ "." IDENT ]
    expr      := or ;  or := and ("||" and)* ;  and := eq ("&&" eq)*
    eq        := rel (("=="|"!=") rel)* ;  rel := add (("<"|"<="|">"|">=") add)*
    add       := mul (("+"|"-") mul)* ;  mul := unary (("*"|"/") unary)*
    unary     := ("-"|"!") unary | primary
    primary   := INT | "true" | "false" | lvalue | "(" expr ")"
"""

from __future__ import annotations

from macrocell.errors import ParseError
from macrocell.lang import ast as A
from macrocell.lang.lexer import Token, TokenKind, tokenize

SCALARS = ("bool", "int8", "int16", "int32")
_TYPE_START = frozenset(SCALARS + ("struct",))

MAX_NESTING = 200

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/"),
)
_LEVEL_OF = {op: level for level, ops in enumerate(_BINARY_LEVELS) for op in ops}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # --- token helpers -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.lexeme == lexeme and tok.kind not in (TokenKind.IDENT, TokenKind.INT)

    def fail(self, expected: set[str] | frozenset[str]) -> ParseError:
        tok = self.peek()
        want = ", ".join(sorted(expected))
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column + len(last.lexeme) if last else 1
            return ParseError(f"expected {want} but reached end of input", line, col, frozenset(expected))
        return ParseError(f"expected {want}, found {tok.lexeme!r}", tok.line, tok.column, frozenset(expected))

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise self.fail({repr(lexeme)})
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_kind(self, kind: TokenKind) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            raise self.fail({kind.value})
        self.pos += 1
        return tok

    # --- declarations ------------------------------------------------------

    def program(self) -> A.Program:
        decls: list[A.VarDecl] = []
        seen_local = False
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind is TokenKind.KEYWORD and tok.lexeme == "local":
                seen_local = True
                self.pos += 1
                decls.append(self.declaration("local", len(decls), tok))
            elif tok.kind is TokenKind.KEYWORD and tok.lexeme in _TYPE_START:
                if seen_local:
                    raise ParseError(
                        "external declarations must precede local declarations",
                        tok.line, tok.column, frozenset({"'local'", "statement"}),
                    )
                decls.append(self.declaration("external", len(decls), tok))
            else:
                break
        stmts = []
        while self.peek() is not None:
            stmts.append(self.statement())
        return A.Program(tuple(decls), tuple(stmts))

    def scalar(self) -> A.ScalarType:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.KEYWORD or tok.lexeme not in SCALARS:
            raise self.fail({repr(s) for s in SCALARS})
        self.pos += 1
        return A.ScalarType(tok.lexeme)

    def declaration(self, storage: str, order: int, start: Token) -> A.VarDecl:
        vtype: A.VarType
        if self.at("struct"):
            self.pos += 1
            self.expect("{")
            fields = []
            while True:
                ftype = self.scalar()
                fname = self.expect_kind(TokenKind.IDENT)
                self.expect(";")
                fields.append(A.StructField(fname.lexeme, ftype, fname.line, fname.column))
                if self.at("}"):
                    self.pos += 1
                    break
            vtype = A.StructType(tuple(fields))
        else:
            vtype = self.scalar()
        name = self.expect_kind(TokenKind.IDENT)
        if self.at("["):
            self.pos += 1
            lo = self.signed_int()
            self.expect("..")
            hi = self.signed_int()
            self.expect("]")
            vtype = A.ArrayType(vtype, lo, hi)
        self.expect(";")
        return A.VarDecl(name.lexeme, storage, vtype, order, start.line, start.column)

    def signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.pos += 1
            sign = -1
        return sign * int(self.expect_kind(TokenKind.INT).lexeme)

    # --- statements --------------------------------------------------------

    def nest(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            tok = self.peek()
            line, col = (tok.line, tok.column) if tok else (0, 0)
            raise ParseError("nesting too deep", line, col)

    def statement(self) -> A.Stmt:
        self.nest()
        try:
            return self._statement()
        finally:
            self.depth -= 1

    def _statement(self) -> A.Stmt:
        tok = self.peek()
        assert tok is not None
        if tok.kind is TokenKind.KEYWORD and tok.lexeme == "if":
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            else_ = None
            if self.at("else"):
                self.pos += 1
                else_ = self.statement()
            return A.If(cond, then, else_, tok.line, tok.column)
        if tok.kind is TokenKind.KEYWORD and tok.lexeme == "for":
            return self.for_statement(tok)
        if tok.kind is TokenKind.PUNCT and tok.lexeme == "{":
            self.pos += 1
            body = []
            while not self.at("}"):
                if self.peek() is None:
                    raise self.fail({"'}'"})
                body.append(self.statement())
            self.pos += 1
            return A.Block(tuple(body), tok.line, tok.column)
        if tok.kind is TokenKind.IDENT:
            target = self.lvalue()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            return A.Assign(target, value, tok.line, tok.column)
        raise self.fail({"identifier", "'if'", "'for'", "'{'"})

    def for_statement(self, start: Token) -> A.For:
        self.pos += 1
        self.expect("(")
        var = self.expect_kind(TokenKind.IDENT)
        self.expect("=")
        first = self.expr()
        self.expect(";")
        self.loop_var(var.lexeme)
        self.expect("<=")
        last = self.expr()
        self.expect(";")
        self.loop_var(var.lexeme)
        self.expect("++")
        self.expect(")")
        body = self.statement()
        return A.For(var.lexeme, first, last, body, start.line, start.column)

    def loop_var(self, name: str) -> None:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT or tok.lexeme != name:
            raise self.fail({repr(name)})
        self.pos += 1

    def lvalue(self) -> A.VarRef:
        name = self.expect_kind(TokenKind.IDENT)
        index = None
        member = None
        if self.at("["):
            self.pos += 1
            index = self.expr()
            self.expect("]")
        if self.at("."):
            self.pos += 1
            member = self.expect_kind(TokenKind.IDENT).lexeme
        return A.VarRef(name.lexeme, index, member, name.line, name.column)

    # --- expressions -------------------------------------------------------

    def expr(self, min_level: int = 0) -> A.Expr:
        # precedence climbing keeps Python recursion to a few frames per nesting level
        left = self.unary()
        chained = 0
        try:
            while True:
                tok = self.peek()
                level = _LEVEL_OF.get(tok.lexeme) if tok is not None and tok.kind is TokenKind.OP else None
                if level is None or level < min_level:
                    return left
                self.pos += 1
                # left-deep chains count toward nesting: later passes recurse on them
                self.nest()
                chained += 1
                right = self.expr(level + 1)
                left = A.Binary(tok.lexeme, left, right, tok.line, tok.column)
        finally:
            self.depth -= chained

    def unary(self) -> A.Expr:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OP and tok.lexeme in ("-", "!"):
            self.pos += 1
            self.nest()
            try:
                return A.Unary(tok.lexeme, self.unary(), tok.line, tok.column)
            finally:
                self.depth -= 1
        return self.primary()

    def primary(self) -> A.Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail({"expression"})
        if tok.kind is TokenKind.INT:
            self.pos += 1
            return A.IntLit(int(tok.lexeme), tok.line, tok.column)
        if tok.kind is TokenKind.BOOL:
            self.pos += 1
            return A.BoolLit(tok.lexeme == "true", tok.line, tok.column)
        if tok.kind is TokenKind.IDENT:
            return self.lvalue()
        if self.at("("):
            self.pos += 1
            self.nest()
            try:
                inner = self.expr()
            finally:
                self.depth -= 1
            self.expect(")")
            return inner
        raise self.fail({"expression"})


def parse(tokens: list[Token]) -> A.Program:
    return _Parser(tokens).program()


def parse_source(source: str) -> A.Program:
    return parse(tokenize(source))
