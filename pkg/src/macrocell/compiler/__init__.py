"""Macro-compiler: adaptation source + performance data -> compiled file."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from macrocell import __version__
from macrocell import errors as E
from macrocell.binfmt import CompiledFile, WcetEntry, make_compiled_file
from macrocell.compiler.codegen import Branch, Loop, Seq, Straight, Structure, generate_code
from macrocell.compiler.layout import Slot, VariableLayout, layout_declarations, layout_variables
from macrocell.compiler.wcet import compute_wcet, structural_wcet
from macrocell.isa import MacroCode
from macrocell.lang import check_source
from macrocell.lang.analyzer import TypedProgram
from macrocell.perfdata import PerfData

COMPILER_TYPE = "macrocell"


@dataclass(frozen=True)
class Compilation:
    """Everything produced along the way, for tools that need more than bytes."""

    program: TypedProgram
    layout: VariableLayout
    macro_code: MacroCode
    structure: Seq
    compiled: CompiledFile


def _check_perf_set(perfs: Iterable[PerfData]) -> list[PerfData]:
    perfs = list(perfs)
    if not perfs:
        raise E.EmptyPerfSet("at least one performance data file is required")
    seen = set()
    for p in perfs:
        if p.identity in seen:
            raise E.DuplicatePlatformType(f"platform type {p.identity} given twice")
        seen.add(p.identity)
    return perfs


def build(source: str, perfs: Iterable[PerfData]) -> Compilation:
    perfs = _check_perf_set(perfs)
    program = check_source(source)
    layout = layout_variables(program)
    code, structure = generate_code(program, layout)
    table = [WcetEntry(p.platform, compute_wcet(code, structure, p)) for p in perfs]
    compiled = make_compiled_file(
        code, table, layout.external_total, layout.local_total, COMPILER_TYPE, __version__
    )
    return Compilation(program, layout, code, structure, compiled)


def compile_source(source: str, perfs: Iterable[PerfData]) -> CompiledFile:
    """Compile ``source`` for every platform type in ``perfs`` (input order kept)."""
    return build(source, perfs).compiled


__all__ = [
    "COMPILER_TYPE", "Branch", "Compilation", "Loop", "Seq", "Slot", "Straight", "Structure",
    "VariableLayout", "build", "compile_source", "compute_wcet", "generate_code",
    "layout_declarations", "layout_variables", "structural_wcet",
]
