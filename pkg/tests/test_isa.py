from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from macrocell import errors as E
from macrocell.isa import (
    INT32_MAX, INT32_MIN, MNEMONICS, STACK_DEPTH, WIDTHS, Instruction, MacroCode, MachineState,
    Op, Trap, TrapCode, decode, encode, ins, run, step,
)
from macrocell.memory import Region

UNIT = {m: 1 for m in MNEMONICS}


def machine(local=8, external=8, fuel=10_000, **kw):
    return MachineState(Region(bytearray(local)), Region(bytearray(external)), fuel, **kw)


def exec_all(instrs, state=None, costs=UNIT):
    state = state or machine()
    return run(MacroCode(tuple(instrs)), state, costs)


# --- encoding --------------------------------------------------------------


def test_halt_is_one_byte():
    data = encode([ins(Op.HALT)])
    assert len(data) == 1
    assert decode(data) == [ins(Op.HALT)]


def test_push_halt_is_six_bytes():
    data = encode([ins(Op.PUSH_CONST, 5), ins(Op.HALT)])
    assert len(data) == 1 + 4 + 1
    assert data[1:5] == (5).to_bytes(4, "little")


def test_negative_operands_are_twos_complement():
    assert encode([ins(Op.PUSH_CONST, -1)])[1:] == b"\xff\xff\xff\xff"


def test_opcode_bytes_are_unique():
    assert len({op.code for op in Op}) == len(Op)


def test_operand_count_enforced():
    with pytest.raises(ValueError):
        Instruction(Op.PUSH_CONST, ())
    with pytest.raises(ValueError):
        Instruction(Op.PUSH_CONST, (INT32_MAX + 1,))


@pytest.mark.parametrize(
    "data, error",
    [
        (b"\x01\x05\x00", E.TruncatedInstruction),
        (b"\xee", E.UnknownOpcode),
        (encode([ins(Op.JUMP, 3), ins(Op.HALT)]), E.MisalignedJumpTarget),
        (encode([ins(Op.JUMP, 99), ins(Op.HALT)]), E.MisalignedJumpTarget),
        (encode([ins(Op.LOAD_EXT, 3, 0), ins(Op.HALT)]), E.InvalidOperand),
    ],
)
def test_decode_errors(data, error):
    with pytest.raises(error):
        decode(data)


def test_jump_to_end_is_aligned():
    code = [ins(Op.JUMP, 5)]
    assert decode(encode(code)) == code


def _instruction_lists():
    def build(specs):
        instrs = []
        for op, a, b in specs:
            if op in (Op.JUMP, Op.JUMP_IF_FALSE):
                instrs.append((op, a))
            elif op.arity == 2:
                instrs.append(Instruction(op, (WIDTHS[a % 3] if op.name.startswith(("LOAD", "STORE")) else a, b)))
            elif op.arity == 1:
                instrs.append(Instruction(op, (WIDTHS[a % 3] if op.name.endswith("_DYN") else a,)))
            else:
                instrs.append(Instruction(op))
        # place jumps at real instruction boundaries
        sizes = [1 + 4 if isinstance(i, tuple) else i.size for i in instrs]
        starts = [sum(sizes[:k]) for k in range(len(sizes) + 1)]
        out = []
        for i in instrs:
            if isinstance(i, tuple):
                out.append(Instruction(i[0], (starts[i[1] % len(starts)],)))
            else:
                out.append(i)
        return out

    ints = st.integers(INT32_MIN, INT32_MAX)
    return st.lists(st.tuples(st.sampled_from(list(Op)), ints, ints), max_size=40).map(build)


@settings(max_examples=300)
@given(_instruction_lists())
def test_encode_decode_inverse(instrs):
    assert decode(encode(instrs)) == instrs
    assert MacroCode(tuple(instrs)).byte_length == len(encode(instrs))


# --- semantics -------------------------------------------------------------


def test_push_store_local():
    s = exec_all([ins(Op.PUSH_CONST, 7), ins(Op.STORE_LOC, 1, 0), ins(Op.HALT)])
    assert s.local.buffer[0] == 7
    assert s.halted and s.stack == []


def test_div_by_zero():
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.PUSH_CONST, 1), ins(Op.PUSH_CONST, 0), ins(Op.DIV), ins(Op.HALT)])
    assert exc.value.code is TrapCode.DIV_BY_ZERO


def test_bounds_check_rejects_eleven():
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.PUSH_CONST, 11), ins(Op.BOUNDS_CHECK, 1, 10), ins(Op.HALT)])
    assert exc.value.code is TrapCode.INDEX_OUT_OF_BOUNDS


def test_bounds_check_passes_index_through():
    s = exec_all([ins(Op.PUSH_CONST, 10), ins(Op.BOUNDS_CHECK, 1, 10), ins(Op.HALT)])
    assert s.stack == [10]


@pytest.mark.parametrize("a, b, q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3), (INT32_MIN, -1, INT32_MIN)])
def test_division_truncates_toward_zero_and_wraps(a, b, q):
    s = exec_all([ins(Op.PUSH_CONST, a), ins(Op.PUSH_CONST, b), ins(Op.DIV), ins(Op.HALT)])
    assert s.stack == [q]


def test_arithmetic_wraps():
    s = exec_all([ins(Op.PUSH_CONST, INT32_MAX), ins(Op.PUSH_CONST, 1), ins(Op.ADD),
                  ins(Op.PUSH_CONST, INT32_MIN), ins(Op.NEG), ins(Op.HALT)])
    assert s.stack == [INT32_MIN, INT32_MIN]


def test_logic_treats_nonzero_as_true():
    s = exec_all([ins(Op.PUSH_CONST, 5), ins(Op.PUSH_CONST, -3), ins(Op.AND),
                  ins(Op.PUSH_CONST, 0), ins(Op.NOT), ins(Op.PUSH_CONST, 0), ins(Op.PUSH_CONST, 0), ins(Op.OR),
                  ins(Op.HALT)])
    assert s.stack == [1, 1, 0]


@pytest.mark.parametrize("op, expected", [
    (Op.CMP_EQ, 0), (Op.CMP_NE, 1), (Op.CMP_LT, 1), (Op.CMP_LE, 1), (Op.CMP_GT, 0), (Op.CMP_GE, 0),
])
def test_comparisons(op, expected):
    s = exec_all([ins(Op.PUSH_CONST, -2), ins(Op.PUSH_CONST, 3), ins(op), ins(Op.HALT)])
    assert s.stack == [expected]


def test_store_truncates_and_load_sign_extends():
    s = exec_all([
        ins(Op.PUSH_CONST, 200), ins(Op.STORE_EXT, 1, 0),
        ins(Op.PUSH_CONST, 0x12345678), ins(Op.STORE_EXT, 2, 1),
        ins(Op.LOAD_EXT, 1, 0), ins(Op.LOAD_EXT, 2, 1), ins(Op.HALT),
    ])
    assert s.external.buffer[:3] == bytes([200, 0x78, 0x56])
    assert s.stack == [200 - 256, 0x5678]


def test_dynamic_access_pops_offset():
    s = exec_all([
        ins(Op.PUSH_CONST, -9), ins(Op.PUSH_CONST, 4), ins(Op.STORE_EXT_DYN, 4),
        ins(Op.PUSH_CONST, 4), ins(Op.LOAD_EXT_DYN, 4), ins(Op.HALT),
    ])
    assert s.stack == [-9]


@pytest.mark.parametrize("instr", [
    ins(Op.STORE_EXT, 1, 8), ins(Op.STORE_EXT, 4, 5), ins(Op.STORE_LOC, 1, -1), ins(Op.LOAD_LOC, 2, 7),
])
def test_region_violation(instr):
    state = machine()
    prog = ([ins(Op.PUSH_CONST, 1)] if instr.op.name.startswith("STORE") else []) + [instr, ins(Op.HALT)]
    with pytest.raises(Trap) as exc:
        exec_all(prog, state)
    assert exc.value.code is TrapCode.REGION_VIOLATION
    assert bytes(state.external.buffer) == bytes(8) and bytes(state.local.buffer) == bytes(8)


def test_stack_overflow_at_fixed_depth():
    prog = [ins(Op.PUSH_CONST, k) for k in range(STACK_DEPTH)]
    assert len(exec_all(prog + [ins(Op.HALT)]).stack) == STACK_DEPTH
    with pytest.raises(Trap) as exc:
        exec_all(prog + [ins(Op.PUSH_CONST, 0), ins(Op.HALT)])
    assert exc.value.code is TrapCode.STACK_OVERFLOW


def test_stack_underflow_and_runaway_pc():
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.ADD), ins(Op.HALT)])
    assert exc.value.code is TrapCode.STACK_UNDERFLOW
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.PUSH_CONST, 1)])
    assert exc.value.code is TrapCode.PC_OUT_OF_RANGE


def test_fuel_exhaustion_leaves_instruction_unexecuted():
    state = machine(fuel=2)
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.PUSH_CONST, 7), ins(Op.STORE_LOC, 1, 0), ins(Op.HALT)], state,
                 costs={**UNIT, "STORE_LOC": 5})
    assert exc.value.code is TrapCode.FUEL_EXHAUSTED
    assert state.local.buffer[0] == 0
    assert state.fuel == 1 and state.consumed == 1


def test_infinite_loop_terminates_by_fuel():
    state = machine(fuel=1000)
    with pytest.raises(Trap) as exc:
        exec_all([ins(Op.JUMP, 0)], state)
    assert exc.value.code is TrapCode.FUEL_EXHAUSTED
    assert state.consumed == 1000


def test_step_charges_platform_cost():
    state = machine(fuel=100)
    step(state, ins(Op.PUSH_CONST, 1), {**UNIT, "PUSH_CONST": 7})
    assert (state.fuel, state.consumed, state.pc, state.stack) == (93, 7, 5, [1])


def _programs():
    ints = st.integers(-12, 12)
    simple = st.one_of(
        st.builds(lambda v: ins(Op.PUSH_CONST, v), ints),
        st.builds(lambda w, o: ins(Op.STORE_EXT, w, o), st.sampled_from(WIDTHS), ints),
        st.builds(lambda w, o: ins(Op.STORE_LOC, w, o), st.sampled_from(WIDTHS), ints),
        st.builds(lambda w, o: ins(Op.LOAD_EXT, w, o), st.sampled_from(WIDTHS), ints),
        st.builds(lambda w: ins(Op.STORE_EXT_DYN, w), st.sampled_from(WIDTHS)),
        st.builds(lambda w: ins(Op.STORE_LOC_DYN, w), st.sampled_from(WIDTHS)),
        st.sampled_from([ins(Op.ADD), ins(Op.SUB), ins(Op.NEG), ins(Op.DIV), ins(Op.MUL), ins(Op.NOT)]),
    )
    return st.lists(simple, max_size=40)


@settings(max_examples=300, deadline=None)
@given(_programs(), st.binary(min_size=6, max_size=6), st.binary(min_size=5, max_size=5),
       st.dictionaries(st.sampled_from(MNEMONICS), st.integers(1, 50)))
def test_writes_stay_inside_regions_and_fuel_strictly_decreases(prog, ext0, loc0, costs):
    canary = b"\xc3" * 16
    ext_buf = bytearray(canary + ext0 + canary)
    loc_buf = bytearray(canary + loc0 + canary)
    state = MachineState(Region(loc_buf, 16, 21), Region(ext_buf, 16, 22), fuel=400)
    code = MacroCode(tuple(prog) + (ins(Op.HALT),))
    costs = {**UNIT, **costs}
    fuel_seen = [state.fuel]
    index = {off: k for k, off in enumerate(code.offsets)}
    try:
        while not state.halted:
            step(state, code.instructions[index[state.pc]], costs)
            assert state.fuel < fuel_seen[-1]
            fuel_seen.append(state.fuel)
    except Trap:
        pass
    assert ext_buf[:16] == canary and ext_buf[22:] == canary
    assert loc_buf[:16] == canary and loc_buf[21:] == canary
