"""Platform-independent macro-code: opcodes, binary encoding, semantics.

The machine is a stack machine over 32-bit signed values with two byte
regions (locals and externals). Every instruction is one opcode byte followed
by zero to two little-endian int32 operands.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from macrocell import errors as E
from macrocell.memory import Region, RegionViolation

STACK_DEPTH = 64
STACK_SLOT_BYTES = 4
WIDTHS = (1, 2, 4)

INT32_MIN = -(1 << 31)
INT32_MAX = (1 << 31) - 1


class Op(enum.Enum):
    # name = (opcode byte, operand count)
    PUSH_CONST = (0x01, 1)
    LOAD_EXT = (0x02, 2)
    STORE_EXT = (0x03, 2)
    LOAD_LOC = (0x04, 2)
    STORE_LOC = (0x05, 2)
    LOAD_EXT_DYN = (0x06, 1)
    STORE_EXT_DYN = (0x07, 1)
    LOAD_LOC_DYN = (0x08, 1)
    STORE_LOC_DYN = (0x09, 1)
    ADD = (0x10, 0)
    SUB = (0x11, 0)
    MUL = (0x12, 0)
    DIV = (0x13, 0)
    NEG = (0x14, 0)
    AND = (0x18, 0)
    OR = (0x19, 0)
    NOT = (0x1A, 0)
    CMP_EQ = (0x20, 0)
    CMP_NE = (0x21, 0)
    CMP_LT = (0x22, 0)
    CMP_LE = (0x23, 0)
    CMP_GT = (0x24, 0)
    CMP_GE = (0x25, 0)
    JUMP = (0x30, 1)
    JUMP_IF_FALSE = (0x31, 1)
    BOUNDS_CHECK = (0x38, 2)
    HALT = (0xFF, 0)

    @property
    def code(self) -> int:
        return self.value[0]

    @property
    def arity(self) -> int:
        return self.value[1]

    @property
    def size(self) -> int:
        return 1 + 4 * self.arity


MNEMONICS = tuple(op.name for op in Op)
BY_CODE = {op.code: op for op in Op}
JUMPS = frozenset({Op.JUMP, Op.JUMP_IF_FALSE})
# ops whose first operand is an access width
WIDTH_OPS = frozenset({
    Op.LOAD_EXT, Op.STORE_EXT, Op.LOAD_LOC, Op.STORE_LOC,
    Op.LOAD_EXT_DYN, Op.STORE_EXT_DYN, Op.LOAD_LOC_DYN, Op.STORE_LOC_DYN,
})


@dataclass(frozen=True)
class Instruction:
    op: Op
    operands: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.operands) != self.op.arity:
            raise ValueError(f"{self.op.name} takes {self.op.arity} operands, got {len(self.operands)}")
        for v in self.operands:
            if not INT32_MIN <= v <= INT32_MAX:
                raise ValueError(f"operand {v} of {self.op.name} does not fit 32 bits")

    @property
    def size(self) -> int:
        return self.op.size

    def __str__(self) -> str:
        if not self.operands:
            return self.op.name
        if self.op in JUMPS:
            return f"{self.op.name} {self.operands[0]:04x}"
        return f"{self.op.name} " + ", ".join(str(v) for v in self.operands)


def ins(op: Op, *operands: int) -> Instruction:
    return Instruction(op, tuple(operands))


def encode(instructions: Iterable[Instruction]) -> bytes:
    out = bytearray()
    for i in instructions:
        out.append(i.op.code)
        for v in i.operands:
            out += struct.pack("<i", v)
    return bytes(out)


def decode(data: bytes) -> list[Instruction]:
    """Decode macro-code bytes, validating operands and jump targets."""
    result: list[Instruction] = []
    starts = set()
    pos = 0
    n = len(data)
    while pos < n:
        op = BY_CODE.get(data[pos])
        if op is None:
            raise E.UnknownOpcode(data[pos], pos)
        if pos + op.size > n:
            raise E.TruncatedInstruction(f"{op.name} at offset {pos} needs {op.size} bytes, {n - pos} left")
        operands = struct.unpack_from("<" + "i" * op.arity, data, pos + 1)
        if op in WIDTH_OPS and operands[0] not in WIDTHS:
            raise E.InvalidOperand(f"{op.name} at offset {pos}: width {operands[0]} not in {WIDTHS}")
        starts.add(pos)
        result.append(Instruction(op, operands))
        pos += op.size
    starts.add(n)
    for i in result:
        if i.op in JUMPS and i.operands[0] not in starts:
            raise E.MisalignedJumpTarget(i.operands[0])
    return result


@dataclass(frozen=True)
class MacroCode:
    instructions: tuple[Instruction, ...]
    offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        offsets = []
        pos = 0
        for i in self.instructions:
            offsets.append(pos)
            pos += i.size
        object.__setattr__(self, "offsets", tuple(offsets))

    @property
    def byte_length(self) -> int:
        if not self.instructions:
            return 0
        return self.offsets[-1] + self.instructions[-1].size

    def to_bytes(self) -> bytes:
        return encode(self.instructions)

    @classmethod
    def from_bytes(cls, data: bytes) -> "MacroCode":
        return cls(tuple(decode(data)))

    def disassemble(self) -> list[str]:
        return [f"{off:04x}: {i}" for off, i in zip(self.offsets, self.instructions)]


# --- semantics -------------------------------------------------------------


class TrapCode(enum.Enum):
    DIV_BY_ZERO = "DIV_BY_ZERO"
    INDEX_OUT_OF_BOUNDS = "INDEX_OUT_OF_BOUNDS"
    REGION_VIOLATION = "REGION_VIOLATION"
    STACK_OVERFLOW = "STACK_OVERFLOW"
    STACK_UNDERFLOW = "STACK_UNDERFLOW"
    FUEL_EXHAUSTED = "FUEL_EXHAUSTED"
    PC_OUT_OF_RANGE = "PC_OUT_OF_RANGE"


class Trap(Exception):
    def __init__(self, code: TrapCode, detail: str = ""):
        super().__init__(f"{code.value}: {detail}" if detail else code.value)
        self.code = code
        self.detail = detail


def wrap32(value: int) -> int:
    return ((value - INT32_MIN) & 0xFFFFFFFF) + INT32_MIN


def div_trunc(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap32(-q if (a < 0) != (b < 0) else q)


@dataclass
class MachineState:
    local: Region
    external: Region
    fuel: int
    pc: int = 0
    stack: list[int] = field(default_factory=list)
    consumed: int = 0
    halted: bool = False
    steps: int = 0


def _pop(state: MachineState) -> int:
    if not state.stack:
        raise Trap(TrapCode.STACK_UNDERFLOW, f"at pc {state.pc:04x}")
    return state.stack.pop()


def _push(state: MachineState, value: int) -> None:
    if len(state.stack) >= STACK_DEPTH:
        raise Trap(TrapCode.STACK_OVERFLOW, f"at pc {state.pc:04x}")
    state.stack.append(value)


_BINARY = {
    Op.ADD: lambda a, b: wrap32(a + b),
    Op.SUB: lambda a, b: wrap32(a - b),
    Op.MUL: lambda a, b: wrap32(a * b),
    Op.AND: lambda a, b: int(a != 0 and b != 0),
    Op.OR: lambda a, b: int(a != 0 or b != 0),
    Op.CMP_EQ: lambda a, b: int(a == b),
    Op.CMP_NE: lambda a, b: int(a != b),
    Op.CMP_LT: lambda a, b: int(a < b),
    Op.CMP_LE: lambda a, b: int(a <= b),
    Op.CMP_GT: lambda a, b: int(a > b),
    Op.CMP_GE: lambda a, b: int(a >= b),
}


def step(state: MachineState, instr: Instruction, costs: Mapping[str, int]) -> None:
    """Execute one instruction in place.

    Fuel is charged before anything else; an instruction the remaining fuel
    cannot pay for is not executed.
    """
    op = instr.op
    cost = costs[op.name]
    if cost > state.fuel:
        raise Trap(TrapCode.FUEL_EXHAUSTED, f"{op.name} costs {cost}, {state.fuel} left")
    state.fuel -= cost
    state.consumed += cost
    state.steps += 1
    next_pc = state.pc + op.size
    try:
        if op is Op.PUSH_CONST:
            _push(state, instr.operands[0])
        elif op in _BINARY:
            b = _pop(state)
            a = _pop(state)
            _push(state, _BINARY[op](a, b))
        elif op is Op.DIV:
            b = _pop(state)
            a = _pop(state)
            if b == 0:
                raise Trap(TrapCode.DIV_BY_ZERO, f"at pc {state.pc:04x}")
            _push(state, div_trunc(a, b))
        elif op is Op.NEG:
            _push(state, wrap32(-_pop(state)))
        elif op is Op.NOT:
            _push(state, int(_pop(state) == 0))
        elif op is Op.LOAD_EXT or op is Op.LOAD_LOC:
            width, offset = instr.operands
            region = state.external if op is Op.LOAD_EXT else state.local
            _push(state, region.load(offset, width))
        elif op is Op.STORE_EXT or op is Op.STORE_LOC:
            width, offset = instr.operands
            region = state.external if op is Op.STORE_EXT else state.local
            region.store(offset, width, _pop(state))
        elif op is Op.LOAD_EXT_DYN or op is Op.LOAD_LOC_DYN:
            region = state.external if op is Op.LOAD_EXT_DYN else state.local
            offset = _pop(state)
            _push(state, region.load(offset, instr.operands[0]))
        elif op is Op.STORE_EXT_DYN or op is Op.STORE_LOC_DYN:
            region = state.external if op is Op.STORE_EXT_DYN else state.local
            offset = _pop(state)
            value = _pop(state)
            region.store(offset, instr.operands[0], value)
        elif op is Op.JUMP:
            next_pc = instr.operands[0]
        elif op is Op.JUMP_IF_FALSE:
            if _pop(state) == 0:
                next_pc = instr.operands[0]
        elif op is Op.BOUNDS_CHECK:
            lo, hi = instr.operands
            index = _pop(state)
            if not lo <= index <= hi:
                raise Trap(TrapCode.INDEX_OUT_OF_BOUNDS, f"index {index} outside [{lo}, {hi}]")
            _push(state, index)
        elif op is Op.HALT:
            state.halted = True
            next_pc = state.pc
        else:  # pragma: no cover - enum is closed
            raise AssertionError(op)
    except RegionViolation as exc:
        raise Trap(TrapCode.REGION_VIOLATION, str(exc)) from None
    state.pc = next_pc


def run(code: MacroCode, state: MachineState, costs: Mapping[str, int]) -> MachineState:
    """Step from ``state.pc`` until HALT; traps propagate as :class:`Trap`."""
    index = {off: i for i, off in enumerate(code.offsets)}
    instructions = code.instructions
    while not state.halted:
        i = index.get(state.pc)
        if i is None:
            raise Trap(TrapCode.PC_OUT_OF_RANGE, f"pc {state.pc:04x}")
        step(state, instructions[i], costs)
    return state
