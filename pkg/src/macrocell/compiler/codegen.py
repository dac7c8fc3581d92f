"""Translate a checked program to macro-code plus a structure map.

The structure map mirrors the statement tree: straight-line instruction
ranges, branches and counted loops. WCET analysis folds over it instead of
rediscovering control flow from the bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from macrocell import errors as E
from macrocell.compiler.layout import VariableLayout
from macrocell.isa import INT32_MAX, STACK_DEPTH, Instruction, MacroCode, Op
from macrocell.lang import ast as A
from macrocell.lang.analyzer import Access, TypedProgram, resolve


@dataclass(frozen=True)
class Straight:
    """Instructions ``[start, end)`` (indices), all executed once when entered."""

    start: int
    end: int
    node: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    parts: tuple["Structure", ...]


@dataclass(frozen=True)
class Branch:
    cond: Straight  # ends with the conditional jump
    then: "Structure"  # includes the jump over the else part, if any
    else_: "Structure | None"
    node: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Loop:
    init: Straight
    test: Straight  # ends with the exit jump
    body: "Structure"
    incr: Straight  # ends with the back jump
    trip_count: int
    node: object = field(default=None, compare=False, repr=False)


Structure = Union[Straight, Seq, Branch, Loop]

_STACK_EFFECT = {
    Op.PUSH_CONST: 1, Op.LOAD_EXT: 1, Op.LOAD_LOC: 1, Op.STORE_EXT: -1, Op.STORE_LOC: -1,
    Op.LOAD_EXT_DYN: 0, Op.LOAD_LOC_DYN: 0, Op.STORE_EXT_DYN: -2, Op.STORE_LOC_DYN: -2,
    Op.NEG: 0, Op.NOT: 0, Op.JUMP: 0, Op.JUMP_IF_FALSE: -1, Op.BOUNDS_CHECK: 0, Op.HALT: 0,
}
_BINOPS = {
    "+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "/": Op.DIV, "&&": Op.AND, "||": Op.OR,
    "==": Op.CMP_EQ, "!=": Op.CMP_NE, "<": Op.CMP_LT, "<=": Op.CMP_LE, ">": Op.CMP_GT, ">=": Op.CMP_GE,
}


class _Emitter:
    def __init__(self, program: TypedProgram, layout: VariableLayout):
        self.program = program
        self.symbols = program.symbols
        self.slots = {s.name: s for s in layout.externals + layout.locals}
        # entries are (op, operands) where a jump's operand is a label number
        self.code: list[tuple[Op, tuple[int, ...]]] = []
        self.labels: list[int | None] = []
        self.depth = 0
        self.max_depth = 0

    @property
    def here(self) -> int:
        return len(self.code)

    def emit(self, op: Op, *operands: int) -> None:
        self.code.append((op, operands))
        self.depth += _STACK_EFFECT.get(op, -1)
        if self.depth > self.max_depth:
            self.max_depth = self.depth

    def new_label(self) -> int:
        self.labels.append(None)
        return len(self.labels) - 1

    def place(self, label: int) -> None:
        self.labels[label] = self.here

    # --- variables ---------------------------------------------------------

    def access(self, ref: A.VarRef) -> tuple[Access, Op, Op, int]:
        """Emit index arithmetic if needed; return (access, load op, store op, static offset)."""
        acc = resolve(self.symbols, ref)
        base = self.slots[ref.name].offset + acc.member_offset
        local = acc.decl.is_local
        if acc.is_dynamic:
            self.expr(ref.index)
            self.emit(Op.BOUNDS_CHECK, acc.lo, acc.hi)
            self.emit(Op.PUSH_CONST, acc.lo)
            self.emit(Op.SUB)
            self.emit(Op.PUSH_CONST, acc.element_size)
            self.emit(Op.MUL)
            self.emit(Op.PUSH_CONST, base)
            self.emit(Op.ADD)
            if local:
                return acc, Op.LOAD_LOC_DYN, Op.STORE_LOC_DYN, 0
            return acc, Op.LOAD_EXT_DYN, Op.STORE_EXT_DYN, 0
        if acc.constant_index is not None:
            base += (acc.constant_index - acc.lo) * acc.element_size
        if local:
            return acc, Op.LOAD_LOC, Op.STORE_LOC, base
        return acc, Op.LOAD_EXT, Op.STORE_EXT, base

    def load(self, ref: A.VarRef) -> None:
        acc, load, _, offset = self.access(ref)
        width = acc.scalar.byte_size
        if acc.is_dynamic:
            self.emit(load, width)
        else:
            self.emit(load, width, offset)
        if acc.scalar.is_bool:
            # any nonzero byte reads as true; normalise to 0/1
            self.emit(Op.PUSH_CONST, 0)
            self.emit(Op.CMP_NE)

    def store(self, ref: A.VarRef) -> None:
        acc, _, store, offset = self.access(ref)
        width = acc.scalar.byte_size
        if acc.is_dynamic:
            self.emit(store, width)
        else:
            self.emit(store, width, offset)

    # --- expressions -------------------------------------------------------

    def expr(self, e: A.Expr) -> None:
        if isinstance(e, A.IntLit):
            self.emit(Op.PUSH_CONST, e.value)
        elif isinstance(e, A.BoolLit):
            self.emit(Op.PUSH_CONST, int(e.value))
        elif isinstance(e, A.VarRef):
            self.load(e)
        elif isinstance(e, A.Unary):
            self.expr(e.operand)
            self.emit(Op.NEG if e.op == "-" else Op.NOT)
        elif isinstance(e, A.Binary):
            self.expr(e.left)
            self.expr(e.right)
            self.emit(_BINOPS[e.op])
        else:
            raise TypeError(f"not an expression: {e!r}")

    # --- statements --------------------------------------------------------

    def stmt(self, s: A.Stmt) -> Structure:
        if isinstance(s, A.Assign):
            start = self.here
            self.max_depth = 0
            self.expr(s.value)
            self.store(s.target)
            self.check_depth(s)
            return Straight(start, self.here, s)
        if isinstance(s, A.Block):
            return Seq(tuple(self.stmt(inner) for inner in s.stmts))
        if isinstance(s, A.If):
            return self.if_stmt(s)
        if isinstance(s, A.For):
            return self.for_stmt(s)
        raise TypeError(f"not a statement: {s!r}")

    def check_depth(self, node) -> None:
        if self.max_depth > STACK_DEPTH:
            raise E.ExpressionTooDeep(
                f"expression needs {self.max_depth} stack slots, the machine has {STACK_DEPTH}",
                node.line, node.column,
            )

    def if_stmt(self, s: A.If) -> Branch:
        start = self.here
        self.max_depth = 0
        self.expr(s.cond)
        self.check_depth(s)
        skip = self.new_label()
        self.emit(Op.JUMP_IF_FALSE, skip)
        cond = Straight(start, self.here, s.cond)
        if s.else_ is None:
            then = self.stmt(s.then)
            self.place(skip)
            return Branch(cond, then, None, s)
        end = self.new_label()
        then_body = self.stmt(s.then)
        jump_start = self.here
        self.emit(Op.JUMP, end)
        then = Seq((then_body, Straight(jump_start, self.here)))
        self.place(skip)
        else_ = self.stmt(s.else_)
        self.place(end)
        return Branch(cond, then, else_, s)

    def for_stmt(self, s: A.For) -> Loop:
        slot = self.slots[s.var]
        width = slot.size
        start = self.here
        self.emit(Op.PUSH_CONST, A.literal_value(s.start))
        self.emit(Op.STORE_LOC, width, slot.offset)
        init = Straight(start, self.here)

        test_label = self.new_label()
        exit_label = self.new_label()
        self.place(test_label)
        test_start = self.here
        self.emit(Op.LOAD_LOC, width, slot.offset)
        self.emit(Op.PUSH_CONST, A.literal_value(s.end))
        self.emit(Op.CMP_LE)
        self.emit(Op.JUMP_IF_FALSE, exit_label)
        test = Straight(test_start, self.here)

        body = self.stmt(s.body)

        incr_start = self.here
        self.emit(Op.LOAD_LOC, width, slot.offset)
        self.emit(Op.PUSH_CONST, 1)
        self.emit(Op.ADD)
        self.emit(Op.STORE_LOC, width, slot.offset)
        self.emit(Op.JUMP, test_label)
        incr = Straight(incr_start, self.here)
        self.place(exit_label)
        return Loop(init, test, body, incr, self.program.trip_counts[s], s)

    # --- assembly ----------------------------------------------------------

    def finish(self) -> MacroCode:
        offsets = []
        pos = 0
        for op, _ in self.code:
            offsets.append(pos)
            pos += op.size
        if pos > INT32_MAX:
            raise E.JumpOutOfRange(f"macro code of {pos} bytes exceeds the 32-bit jump range")
        offsets.append(pos)
        instructions = []
        for op, operands in self.code:
            if op is Op.JUMP or op is Op.JUMP_IF_FALSE:
                operands = (offsets[self.labels[operands[0]]],)
            instructions.append(Instruction(op, operands))
        return MacroCode(tuple(instructions))


def generate_code(program: TypedProgram, layout: VariableLayout) -> tuple[MacroCode, Seq]:
    """Return the macro-code for ``program`` and its structure map."""
    em = _Emitter(program, layout)
    parts = [em.stmt(s) for s in program.statements]
    halt = em.here
    em.emit(Op.HALT)
    parts.append(Straight(halt, em.here))
    return em.finish(), Seq(tuple(parts))
