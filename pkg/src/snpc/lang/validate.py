"""Static checks for SNP programs."""
from __future__ import annotations

from dataclasses import dataclass

from .ast import (AddConst, Assign, BinaryOp, Call, Const, ForLoop, If,
                  MulConst, Program, Return, Statement, UnaryCmp, Var, walk)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    message: str
    line: int = 0

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{self.level}: {where}{self.message}"


class SNPValidationError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def errors(diags) -> list[Diagnostic]:
    return [d for d in diags if d.level == "error"]


def _is_boolean_valued(s: Statement, p: Program, kinds: dict) -> bool:
    if isinstance(s, (UnaryCmp,)):
        return True
    if isinstance(s, BinaryOp):
        return s.is_comparison
    if isinstance(s, Assign):
        return _bool_operand(s.src, kinds)
    if isinstance(s, If):
        return _bool_operand(s.then, kinds) and _bool_operand(s.orelse, kinds)
    if isinstance(s, Call):
        callee = p.subprogram(s.name)
        if callee is None or callee.return_var is None:
            return True  # reported elsewhere
        d = callee.decl(callee.return_var)
        return d is not None and d.kind == "bool"
    return False


def _bool_operand(op, kinds) -> bool:
    if isinstance(op, Const):
        return op.value in (0, 1)
    return kinds.get(op.name) == "bool"


def _check_body(p: Program, body, kinds, out: list, guarded: dict, top: bool):
    """Structural checks. ``guarded`` maps variable -> loop line for loops
    currently enclosing the statements (their counter/end may not be written)."""
    n = len(body)
    for k, s in enumerate(body):
        for name in s.reads() + s.writes():
            if name not in kinds:
                out.append(Diagnostic("error", f"undeclared variable {name!r}", s.line))
        for name in s.writes():
            if name in guarded:
                out.append(Diagnostic("error", f"loop clause writes its counter or end variable {name!r} "
                                      f"(loop on line {guarded[name]})", s.line))
        if isinstance(s, Return):
            if not top:
                out.append(Diagnostic("error", "return inside a loop clause", s.line))
            elif k != n - 1:
                out.append(Diagnostic("error", "statement after return", body[k + 1].line))
            continue
        if isinstance(s, MulConst) and s.const < 0:
            out.append(Diagnostic("error", "multiplication constant must be nonnegative", s.line))
        if isinstance(s, UnaryCmp) and s.const < 0:
            out.append(Diagnostic("error", "comparison constant must be nonnegative", s.line))
        if isinstance(s, If) and s.cond in kinds and kinds[s.cond] != "bool":
            out.append(Diagnostic("error", f"if condition {s.cond!r} must be a bool variable", s.line))
        for op in _operands(s):
            if isinstance(op, Const) and op.value < 0:
                out.append(Diagnostic("error", "negative literal", s.line))
        tgt = s.writes()[0] if s.writes() and not isinstance(s, ForLoop) else None
        if tgt is not None and kinds.get(tgt) == "bool" and not _is_boolean_valued(s, p, kinds):
            out.append(Diagnostic("error", f"bool variable {tgt!r} assigned a non-boolean value", s.line))
        if isinstance(s, Call):
            _check_call(p, s, out)
        if isinstance(s, ForLoop):
            inner = dict(guarded)
            inner[s.counter] = s.line
            if isinstance(s.end, Var):
                inner[s.end.name] = s.line
            if not s.body:
                out.append(Diagnostic("error", "empty loop clause", s.line))
            _check_body(p, s.body, kinds, out, inner, top=False)


def _operands(s):
    if isinstance(s, (Assign, AddConst, MulConst)):
        return (s.src,)
    if isinstance(s, If):
        return (s.then, s.orelse)
    if isinstance(s, ForLoop):
        return (s.start, s.end)
    return ()


def _check_call(p: Program, s: Call, out: list):
    callee = p.subprogram(s.name)
    if callee is None:
        out.append(Diagnostic("error", f"call to undefined program {s.name!r}", s.line))
        return
    if len(s.args) != callee.I:
        out.append(Diagnostic("error", f"{s.name!r} takes {callee.I} arguments, got {len(s.args)}", s.line))


def _call_graph_errors(p: Program) -> list[Diagnostic]:
    out = []
    order = {q.name: k for k, q in enumerate(p.library)}
    for k, q in enumerate(p.library):
        for s in walk(q.body):
            if isinstance(s, Call):
                if s.name == q.name:
                    out.append(Diagnostic("error", f"recursive call to {q.name!r}", s.line))
                elif s.name in order and order[s.name] > k:
                    out.append(Diagnostic("error", f"{q.name!r} calls {s.name!r} before it is defined", s.line))
    if p.name is not None:
        for s in walk(p.body):
            if isinstance(s, Call) and s.name == p.name:
                out.append(Diagnostic("error", f"recursive call to {p.name!r}", s.line))
    return out


def _stale_reads(body, stale: set, out: list, seen: set) -> set:
    """Warn on reads of loop counters whose loop has finished and that were
    not overwritten since. Returns the stale set after ``body``."""
    stale = set(stale)
    for s in body:
        for name in s.reads():
            if name in stale and (s.line, name) not in seen:
                seen.add((s.line, name))
                out.append(Diagnostic(
                    "warning",
                    f"{name!r} is read after its loop ended; its value there is implementation defined",
                    s.line))
        if isinstance(s, ForLoop):
            inner = stale - {s.counter}
            # the clause runs repeatedly: analyse twice so state from the end
            # of one iteration reaches the start of the next
            after = _stale_reads(s.body, inner, out, seen)
            _stale_reads(s.body, after - {s.counter}, out, seen)
            stale = (stale | after) | {s.counter}
        else:
            stale -= set(s.writes())
    return stale


def validate(p: Program, *, warnings: bool = True) -> list[Diagnostic]:
    """Check the SNP well-formedness rules.

    Returns a list of :class:`Diagnostic`; an empty list means the program is
    valid and triggers no warnings. Subprograms in ``p.library`` are checked
    too, with their messages prefixed by the subprogram name.
    """
    out: list[Diagnostic] = []
    kinds: dict[str, str] = {}
    for d in p.decls:
        if d.name in kinds:
            out.append(Diagnostic("error", f"variable {d.name!r} declared twice", d.line))
            continue
        kinds[d.name] = d.kind
        if d.kind == "bool" and d.init not in (0, 1):
            out.append(Diagnostic("error", f"bool {d.name!r} must be initialised to 0 or 1", d.line))
        if d.kind != "input" and (d.init is None or d.init < 0):
            out.append(Diagnostic("error", f"initializer of {d.name!r} must be a nonnegative integer", d.line))
    if p.return_var is None:
        line = p.body[-1].line if p.body else 0
        if not any(isinstance(s, Return) for s in walk(p.body)):
            out.append(Diagnostic("error", "program must end with a return statement", line))
    _check_body(p, p.body, kinds, out, {}, top=True)
    out.extend(_call_graph_errors(p))
    if warnings:
        _stale_reads(p.body, set(), out, set())
    for q in p.library:
        sub = Program(q.decls, q.body, q.name, p.library[: p.library.index(q)])
        for d in validate(sub, warnings=warnings):
            out.append(Diagnostic(d.level, f"in {q.name}: {d.message}", d.line))
    return out


def check(p: Program) -> Program:
    """Raise :class:`SNPValidationError` if ``p`` has errors; return ``p``."""
    errs = errors(validate(p, warnings=False))
    if errs:
        raise SNPValidationError(errs)
    return p
