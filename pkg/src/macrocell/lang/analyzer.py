"""Name resolution, type checking and static safety checks."""

from __future__ import annotations

from dataclasses import dataclass, field

from macrocell import errors as E
from macrocell.lang import ast as A

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1
MAX_REGION_BYTES = INT32_MAX  # every offset must fit an int32 operand

BOOL = "bool"
INT = "int"


@dataclass(frozen=True)
class Access:
    """A resolved variable reference: which scalar it reaches and how."""

    decl: A.VarDecl
    scalar: A.ScalarType
    member_offset: int  # byte offset of the member inside one element, 0 if none
    element_size: int  # 0 for non-array variables
    lo: int = 0
    hi: int = 0
    constant_index: int | None = None

    @property
    def is_dynamic(self) -> bool:
        return self.element_size > 0 and self.constant_index is None


@dataclass
class TypedProgram:
    program: A.Program
    symbols: dict[str, A.VarDecl]
    trip_counts: dict[A.For, int] = field(default_factory=dict)
    dynamic_accesses: list[A.VarRef] = field(default_factory=list)

    @property
    def declarations(self) -> tuple[A.VarDecl, ...]:
        return self.program.declarations

    @property
    def statements(self) -> tuple[A.Stmt, ...]:
        return self.program.statements


def resolve(symbols: dict[str, A.VarDecl], ref: A.VarRef) -> Access:
    """Resolve ``ref`` to the scalar it denotes, or raise a semantic error."""
    decl = symbols.get(ref.name)
    if decl is None:
        raise E.UndeclaredIdentifier(f"undeclared identifier {ref.name!r}", ref.line, ref.column)
    t = decl.type
    element_size = 0
    lo = hi = 0
    constant = None
    if isinstance(t, A.ArrayType):
        if ref.index is None:
            raise E.TypeMismatch(f"array {ref.name!r} used without an index", ref.line, ref.column)
        lo, hi = t.lo, t.hi
        element_size = t.element.byte_size
        constant = A.literal_value(ref.index)
        if constant is not None and not lo <= constant <= hi:
            raise E.ConstantIndexOutOfBounds(ref.name, constant, lo, hi, ref.line, ref.column)
        t = t.element
    elif ref.index is not None:
        raise E.TypeMismatch(f"{ref.name!r} is not an array", ref.line, ref.column)

    if isinstance(t, A.StructType):
        if ref.member is None:
            raise E.TypeMismatch(f"struct {ref.name!r} used without a member", ref.line, ref.column)
        found = t.field_offset(ref.member)
        if found is None:
            raise E.UndeclaredIdentifier(f"{ref.name!r} has no member {ref.member!r}", ref.line, ref.column)
        offset, scalar = found
        return Access(decl, scalar, offset, element_size, lo, hi, constant)
    if ref.member is not None:
        raise E.TypeMismatch(f"{ref.name!r} has no members", ref.line, ref.column)
    return Access(decl, t, 0, element_size, lo, hi, constant)


def value_kind(scalar: A.ScalarType) -> str:
    return BOOL if scalar.is_bool else INT


class _Analyzer:
    def __init__(self, program: A.Program):
        self.program = program
        self.symbols: dict[str, A.VarDecl] = {}
        self.trip_counts: dict[A.For, int] = {}
        self.dynamic: list[A.VarRef] = []
        self.active_loop_vars: list[str] = []

    def run(self) -> TypedProgram:
        ext_total = loc_total = 0
        for d in self.program.declarations:
            self.declare(d)
            if d.is_local:
                loc_total += d.type.byte_size
            else:
                ext_total += d.type.byte_size
        if ext_total > MAX_REGION_BYTES or loc_total > MAX_REGION_BYTES:
            raise E.InvalidArrayBounds("variables exceed the maximum region size")
        for s in self.program.statements:
            self.stmt(s)
        return TypedProgram(self.program, self.symbols, self.trip_counts, self.dynamic)

    def declare(self, d: A.VarDecl) -> None:
        if d.name in self.symbols:
            raise E.DuplicateDeclaration(f"{d.name!r} declared twice", d.line, d.column)
        t = d.type
        if isinstance(t, A.ArrayType):
            if not (INT32_MIN <= t.lo <= INT32_MAX and INT32_MIN <= t.hi <= INT32_MAX):
                raise E.InvalidArrayBounds(f"bounds of {d.name!r} exceed 32 bits", d.line, d.column)
            if t.lo > t.hi:
                raise E.InvalidArrayBounds(f"empty range {t.lo}..{t.hi} for {d.name!r}", d.line, d.column)
            t = t.element
        if isinstance(t, A.StructType):
            seen = set()
            for f in t.fields:
                if f.name in seen:
                    raise E.DuplicateDeclaration(f"member {f.name!r} declared twice", f.line, f.column)
                seen.add(f.name)
        self.symbols[d.name] = d

    # --- statements --------------------------------------------------------

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Assign):
            access = self.ref(s.target)
            if s.target.name in self.active_loop_vars:
                raise E.LoopVarAssigned(f"loop variable {s.target.name!r} assigned in its loop", s.line, s.column)
            want = value_kind(access.scalar)
            got = self.expr(s.value)
            if got != want:
                raise E.TypeMismatch(f"cannot assign {got} to {want} {s.target.name!r}", s.line, s.column)
        elif isinstance(s, A.If):
            self.require(s.cond, BOOL, "condition")
            self.stmt(s.then)
            if s.else_ is not None:
                self.stmt(s.else_)
        elif isinstance(s, A.For):
            self.loop(s)
        elif isinstance(s, A.Block):
            for inner in s.stmts:
                self.stmt(inner)
        else:
            raise TypeError(f"not a statement: {s!r}")

    def loop(self, s: A.For) -> None:
        decl = self.symbols.get(s.var)
        if decl is None:
            raise E.UndeclaredIdentifier(f"undeclared identifier {s.var!r}", s.line, s.column)
        if not decl.is_local or not isinstance(decl.type, A.ScalarType) or decl.type.is_bool:
            raise E.LoopVarNotLocalScalar(f"loop variable {s.var!r} must be a local integer scalar", s.line, s.column)
        if s.var in self.active_loop_vars:
            raise E.LoopVarAssigned(f"loop variable {s.var!r} reused by a nested loop", s.line, s.column)
        start = A.literal_value(s.start)
        end = A.literal_value(s.end)
        if start is None or end is None:
            raise E.NonLiteralLoopBound("loop bounds must be integer literals", s.line, s.column)
        self.expr(s.start)
        self.expr(s.end)
        vmin, vmax = decl.type.value_range()
        trips = max(0, end - start + 1)
        if not vmin <= start <= vmax or (trips and end + 1 > vmax):
            raise E.LoopBoundOutOfRange(
                f"bounds {start}..{end} do not fit loop variable {s.var!r} ({decl.type.kind})", s.line, s.column
            )
        self.trip_counts[s] = trips
        self.active_loop_vars.append(s.var)
        try:
            self.stmt(s.body)
        finally:
            self.active_loop_vars.pop()

    # --- expressions -------------------------------------------------------

    def require(self, e: A.Expr, kind: str, what: str) -> None:
        got = self.expr(e)
        if got != kind:
            raise E.TypeMismatch(f"{what} must be {kind}, got {got}", e.line, e.column)

    def ref(self, r: A.VarRef) -> Access:
        access = resolve(self.symbols, r)
        if r.index is not None:
            self.require(r.index, INT, "array index")
            if access.is_dynamic:
                self.dynamic.append(r)
        return access

    def expr(self, e: A.Expr) -> str:
        if isinstance(e, A.IntLit):
            if e.value > INT32_MAX:
                raise E.LiteralOutOfRange(f"literal {e.value} exceeds 32 bits", e.line, e.column)
            return INT
        if isinstance(e, A.BoolLit):
            return BOOL
        if isinstance(e, A.VarRef):
            return value_kind(self.ref(e).scalar)
        if isinstance(e, A.Unary):
            kind = INT if e.op == "-" else BOOL
            self.require(e.operand, kind, f"operand of {e.op!r}")
            return kind
        if isinstance(e, A.Binary):
            if e.op in ("+", "-", "*", "/"):
                self.require(e.left, INT, f"operand of {e.op!r}")
                self.require(e.right, INT, f"operand of {e.op!r}")
                return INT
            if e.op in ("<", "<=", ">", ">="):
                self.require(e.left, INT, f"operand of {e.op!r}")
                self.require(e.right, INT, f"operand of {e.op!r}")
                return BOOL
            if e.op in ("&&", "||"):
                self.require(e.left, BOOL, f"operand of {e.op!r}")
                self.require(e.right, BOOL, f"operand of {e.op!r}")
                return BOOL
            if e.op in ("==", "!="):
                left = self.expr(e.left)
                right = self.expr(e.right)
                if left != right:
                    raise E.TypeMismatch(f"cannot compare {left} with {right}", e.line, e.column)
                return BOOL
        raise TypeError(f"not an expression: {e!r}")


def analyze(program: A.Program) -> TypedProgram:
    return _Analyzer(program).run()
