"""Layout sidecar (``.layout``): external/local placement for host tools.

One variable per line, ``<offset> <size> <declaration>``, where the
declaration is the variable's source declaration, for example::

    # macrocell layout 1
    0 1 bool ground;
    1 20 struct { bool powered; int8 criticity; } calculator[1..10];
    0 1 local int8 i;

Reading re-parses the declarations and re-derives the packing, and refuses
a file whose recorded offsets disagree with it.
"""

from __future__ import annotations

from macrocell.compiler.layout import VariableLayout, layout_declarations
from macrocell.errors import MacrocellError
from macrocell.lang import check_source
from macrocell.lang.printer import format_decl

HEADER = "# macrocell layout 1"


class LayoutFileError(MacrocellError):
    pass


def format_layout(program_decls, layout: VariableLayout) -> str:
    slots = {s.name: s for s in layout.externals + layout.locals}
    lines = [HEADER]
    for d in program_decls:
        s = slots[d.name]
        lines.append(f"{s.offset} {s.size} {format_decl(d)}")
    return "\n".join(lines) + "\n"


def parse_layout(text: str) -> VariableLayout:
    recorded = []
    decl_lines = []
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise LayoutFileError(f"first line must be {HEADER!r}")
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        if len(parts) != 3 or not parts[0].isdigit() or not parts[1].isdigit():
            raise LayoutFileError(f"line {lineno}: expected '<offset> <size> <declaration>'")
        recorded.append((int(parts[0]), int(parts[1])))
        decl_lines.append(parts[2])
    try:
        program = check_source("\n".join(decl_lines))
    except MacrocellError as exc:
        raise LayoutFileError(f"bad declaration: {exc}") from None
    if program.statements:
        raise LayoutFileError("layout files hold declarations only")
    layout = layout_declarations(program.declarations)
    slots = {s.name: s for s in layout.externals + layout.locals}
    for d, (offset, size) in zip(program.declarations, recorded):
        s = slots[d.name]
        if (s.offset, s.size) != (offset, size):
            raise LayoutFileError(f"{d.name}: recorded {offset}/{size}, declaration packs to {s.offset}/{s.size}")
    return layout
