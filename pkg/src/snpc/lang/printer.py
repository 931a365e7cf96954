"""Canonical text rendering of programs (inverse of the parser)."""
from __future__ import annotations

from .ast import (AddConst, Assign, BinaryOp, Call, ForLoop, If, MulConst,
                  Program, Return, Statement, UnaryCmp)

INDENT = "    "


def render_statement(s: Statement) -> str:
    if isinstance(s, Assign):
        return f"{s.target} = {s.src}"
    if isinstance(s, AddConst):
        if s.const < 0:
            return f"{s.target} = {s.src} - {-s.const}"
        return f"{s.target} = {s.src} + {s.const}"
    if isinstance(s, MulConst):
        return f"{s.target} = {s.const} * {s.src}"
    if isinstance(s, UnaryCmp):
        return f"{s.target} = ({s.operand} {s.op} {s.const})"
    if isinstance(s, BinaryOp):
        if s.is_comparison:
            return f"{s.target} = ({s.left} {s.op} {s.right})"
        return f"{s.target} = {s.left} {s.op} {s.right}"
    if isinstance(s, If):
        return f"{s.target} = {s.then} if {s.cond} else {s.orelse}"
    if isinstance(s, ForLoop):
        return f"for {s.counter} = {s.start},...,{s.end}:"
    if isinstance(s, Call):
        return f"{s.target} = {s.name}({', '.join(s.args)})"
    if isinstance(s, Return):
        return f"return {s.var}"
    raise TypeError(f"unknown statement {s!r}")


def _render_body(body, level: int, out: list[str]) -> None:
    for s in body:
        out.append(INDENT * level + render_statement(s))
        if isinstance(s, ForLoop):
            _render_body(s.body, level + 1, out)


def _render_program(p: Program, level: int, out: list[str]) -> None:
    pad = INDENT * level
    for d in p.decls:
        if d.is_input:
            out.append(f"{pad}input {d.name}")
        else:
            out.append(f"{pad}{d.kind} {d.name} = {d.init}")
    _render_body(p.body, level, out)


def render(p: Program) -> str:
    """Render ``p`` (and its ``def`` library) in canonical form."""
    out: list[str] = []
    for sub in p.library:
        out.append(f"def {sub.name}:")
        _render_program(sub, 1, out)
        out.append("")
    _render_program(p, 0, out)
    return "\n".join(out) + "\n"
