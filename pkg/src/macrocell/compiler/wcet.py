"""Structural worst-case execution time over a structure map."""

from __future__ import annotations

from macrocell import errors as E
from macrocell.compiler.codegen import Branch, Loop, Seq, Straight, Structure
from macrocell.isa import MacroCode
from macrocell.perfdata import PerfData


def _range_cost(code: MacroCode, r: Straight, costs) -> int:
    total = 0
    for instr in code.instructions[r.start:r.end]:
        cost = costs.get(instr.op.name)
        if cost is None:
            raise E.MissingOpcode(instr.op.name)
        total += cost
    return total


def structural_wcet(code: MacroCode, node: Structure, costs) -> int:
    """Worst-case cost of the instructions covered by ``node``.

    Sequences add, branches take the costlier arm, counted loops pay
    ``trips`` full iterations plus the final failing test.
    """
    if isinstance(node, Straight):
        return _range_cost(code, node, costs)
    if isinstance(node, Seq):
        return sum(structural_wcet(code, part, costs) for part in node.parts)
    if isinstance(node, Branch):
        then = structural_wcet(code, node.then, costs)
        else_ = structural_wcet(code, node.else_, costs) if node.else_ is not None else 0
        return _range_cost(code, node.cond, costs) + max(then, else_)
    if isinstance(node, Loop):
        test = _range_cost(code, node.test, costs)
        iteration = test + structural_wcet(code, node.body, costs) + _range_cost(code, node.incr, costs)
        return _range_cost(code, node.init, costs) + node.trip_count * iteration + test
    raise TypeError(f"not a structure node: {node!r}")


def compute_wcet(code: MacroCode, structure: Structure, perf: PerfData) -> int:
    """Declared WCET for one platform: request overhead plus the program body."""
    return perf.request_overhead + structural_wcet(code, structure, perf.op_costs)
