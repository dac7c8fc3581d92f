"""Packed placement of variables in the external and local regions."""

from __future__ import annotations

from dataclasses import dataclass

from macrocell.lang import ast as A
from macrocell.lang.analyzer import TypedProgram


@dataclass(frozen=True)
class Slot:
    name: str
    offset: int
    size: int
    type: A.VarType


@dataclass(frozen=True)
class VariableLayout:
    externals: tuple[Slot, ...]
    locals: tuple[Slot, ...]

    @property
    def external_total(self) -> int:
        return sum(s.size for s in self.externals)

    @property
    def local_total(self) -> int:
        return sum(s.size for s in self.locals)

    def slot(self, name: str) -> Slot | None:
        for s in self.externals + self.locals:
            if s.name == name:
                return s
        return None


def _pack(decls) -> tuple[Slot, ...]:
    slots = []
    offset = 0
    for d in decls:
        size = d.type.byte_size
        slots.append(Slot(d.name, offset, size, d.type))
        offset += size
    return tuple(slots)


def layout_declarations(decls) -> VariableLayout:
    return VariableLayout(
        externals=_pack(d for d in decls if not d.is_local),
        locals=_pack(d for d in decls if d.is_local),
    )


def layout_variables(program: TypedProgram) -> VariableLayout:
    """Pack variables in declaration order with no padding, one region per class."""
    return layout_declarations(program.declarations)
