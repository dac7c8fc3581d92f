"""Syntax tree and data types of the adaptation language.

Nodes are frozen dataclasses; source positions are excluded from equality so
that two parses of differently formatted text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

SCALAR_SIZES = {"bool": 1, "int8": 1, "int16": 2, "int32": 4}


@dataclass(frozen=True)
class ScalarType:
    kind: str

    @property
    def byte_size(self) -> int:
        return SCALAR_SIZES[self.kind]

    @property
    def is_bool(self) -> bool:
        return self.kind == "bool"

    def value_range(self) -> tuple[int, int]:
        if self.is_bool:
            return 0, 1
        bits = 8 * self.byte_size
        return -(1 << (bits - 1)), (1 << (bits - 1)) - 1


@dataclass(frozen=True)
class StructField:
    name: str
    type: ScalarType
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class StructType:
    fields: tuple[StructField, ...]

    @property
    def byte_size(self) -> int:
        return sum(f.type.byte_size for f in self.fields)

    def field_offset(self, name: str) -> tuple[int, ScalarType] | None:
        offset = 0
        for f in self.fields:
            if f.name == name:
                return offset, f.type
            offset += f.type.byte_size
        return None


@dataclass(frozen=True)
class ArrayType:
    element: Union[ScalarType, StructType]
    lo: int
    hi: int

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    @property
    def byte_size(self) -> int:
        return self.length * self.element.byte_size


VarType = Union[ScalarType, StructType, ArrayType]


@dataclass(frozen=True)
class VarDecl:
    name: str
    storage: str  # "external" | "local"
    type: VarType
    decl_order: int
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def is_local(self) -> bool:
        return self.storage == "local"


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class VarRef:
    """``name``, ``name[index]``, ``name.member`` or ``name[index].member``."""

    name: str
    index: "Expr | None" = None
    member: str | None = None
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Expr = Union[IntLit, BoolLit, VarRef, Unary, Binary]


# --- statements ------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    target: VarRef
    value: Expr
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    else_: "Stmt | None" = None
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class For:
    """``for (var = start; var <= end; var++) body``."""

    var: str
    start: Expr
    end: Expr
    body: "Stmt"
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Stmt = Union[Assign, If, For, Block]


@dataclass(frozen=True)
class Program:
    declarations: tuple[VarDecl, ...]
    statements: tuple[Stmt, ...]


def literal_value(expr: Expr) -> int | None:
    """Value of an integer literal, optionally negated; None otherwise."""
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Unary) and expr.op == "-" and isinstance(expr.operand, IntLit):
        return -expr.operand.value
    return None


def walk_statements(stmts):
    """Yield every statement in pre-order, descending into blocks and branches."""
    for s in stmts:
        yield s
        if isinstance(s, Block):
            yield from walk_statements(s.stmts)
        elif isinstance(s, If):
            yield from walk_statements((s.then,))
            if s.else_ is not None:
                yield from walk_statements((s.else_,))
        elif isinstance(s, For):
            yield from walk_statements((s.body,))
