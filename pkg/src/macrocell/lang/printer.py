"""Render a syntax tree back to source text.

Binary and unary expressions are fully parenthesised, so printing never has
to reason about precedence and the output re-parses to an equal tree.
"""

from __future__ import annotations

from macrocell.lang import ast as A

INDENT = "    "


def format_type_prefix(t: A.VarType) -> str:
    base = t.element if isinstance(t, A.ArrayType) else t
    if isinstance(base, A.StructType):
        fields = " ".join(f"{f.type.kind} {f.name};" for f in base.fields)
        return f"struct {{ {fields} }}"
    return base.kind


def format_decl(d: A.VarDecl) -> str:
    prefix = "local " if d.is_local else ""
    suffix = f"[{d.type.lo}..{d.type.hi}]" if isinstance(d.type, A.ArrayType) else ""
    return f"{prefix}{format_type_prefix(d.type)} {d.name}{suffix};"


def format_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.VarRef):
        text = e.name
        if e.index is not None:
            text += f"[{format_expr(e.index)}]"
        if e.member is not None:
            text += f".{e.member}"
        return text
    if isinstance(e, A.Unary):
        return f"({e.op}{format_expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


def _stmt_lines(s: A.Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, A.Assign):
        return [f"{pad}{format_expr(s.target)} = {format_expr(s.value)};"]
    if isinstance(s, A.Block):
        lines = [f"{pad}{{"]
        for inner in s.stmts:
            lines += _stmt_lines(inner, depth + 1)
        return lines + [f"{pad}}}"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({format_expr(s.cond)})"] + _branch(s.then, depth)
        if s.else_ is not None:
            lines += [f"{pad}else"] + _branch(s.else_, depth)
        return lines
    if isinstance(s, A.For):
        v = s.var
        head = f"for ({v} = {format_expr(s.start)}; {v} <= {format_expr(s.end)}; {v}++)"
        return [pad + head] + _branch(s.body, depth)
    raise TypeError(f"not a statement: {s!r}")


def _branch(s: A.Stmt, depth: int) -> list[str]:
    # blocks stay at the parent's indentation, C style
    return _stmt_lines(s, depth if isinstance(s, A.Block) else depth + 1)


def format_program(p: A.Program) -> str:
    lines = [format_decl(d) for d in p.declarations]
    for s in p.statements:
        lines += _stmt_lines(s, 0)
    return "\n".join(lines) + "\n"
