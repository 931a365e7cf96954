"""Reduce composite programs (with ``def`` subprograms) to atomic ones."""
from __future__ import annotations

import dataclasses
import itertools

from .ast import (AddConst, Assign, BinaryOp, Call, Const, ForLoop, If,
                  MulConst, Program, Return, Statement, UnaryCmp, Var, VarDecl,
                  walk)


class InlineError(ValueError):
    pass


def _rename_operand(op, ren):
    if isinstance(op, Var):
        return Var(ren.get(op.name, op.name))
    return op


def rename(s: Statement, ren: dict[str, str]) -> Statement:
    """Apply a variable renaming to one statement (recursively)."""
    r = lambda n: ren.get(n, n)  # noqa: E731
    if isinstance(s, Assign):
        return dataclasses.replace(s, target=r(s.target), src=_rename_operand(s.src, ren))
    if isinstance(s, AddConst):
        return dataclasses.replace(s, target=r(s.target), src=_rename_operand(s.src, ren))
    if isinstance(s, MulConst):
        return dataclasses.replace(s, target=r(s.target), src=_rename_operand(s.src, ren))
    if isinstance(s, UnaryCmp):
        return dataclasses.replace(s, target=r(s.target), operand=r(s.operand))
    if isinstance(s, BinaryOp):
        return dataclasses.replace(s, target=r(s.target), left=r(s.left), right=r(s.right))
    if isinstance(s, If):
        return dataclasses.replace(s, target=r(s.target), cond=r(s.cond),
                                   then=_rename_operand(s.then, ren),
                                   orelse=_rename_operand(s.orelse, ren))
    if isinstance(s, ForLoop):
        return dataclasses.replace(s, counter=r(s.counter), start=_rename_operand(s.start, ren),
                                   end=_rename_operand(s.end, ren),
                                   body=tuple(rename(t, ren) for t in s.body))
    if isinstance(s, Call):
        return dataclasses.replace(s, target=r(s.target), args=tuple(r(a) for a in s.args))
    if isinstance(s, Return):
        return dataclasses.replace(s, var=r(s.var))
    raise TypeError(f"unknown statement {s!r}")


class _Inliner:
    def __init__(self, main: Program):
        self.main = main
        self.lib = {q.name: (k, q) for k, q in enumerate(main.library)}
        self.decls: list[VarDecl] = list(main.decls)
        self.taken = {d.name for d in main.decls}
        for q in main.library:
            self.taken.update(d.name for d in q.decls)
        self.sites = itertools.count(1)
        self.cache: dict[str, Program] = {}

    def fresh(self, base: str) -> str:
        name = base
        while name in self.taken:
            name += "_"
        self.taken.add(name)
        return name

    def atomic(self, name: str, stack: tuple[str, ...]) -> Program:
        if name in stack:
            raise InlineError(f"recursive call: {' -> '.join(stack + (name,))}")
        if name not in self.lib:
            raise InlineError(f"call to undefined program {name!r}")
        if name in self.cache:
            return self.cache[name]
        k, q = self.lib[name]
        for s in walk(q.body):
            if isinstance(s, Call) and s.name in self.lib and self.lib[s.name][0] >= k:
                if s.name == name:
                    raise InlineError(f"recursive call: {name} -> {name}")
                raise InlineError(f"{name!r} calls {s.name!r}, which is defined later")
        sub = _Inliner(Program(q.decls, q.body, q.name, self.main.library[:k]))
        sub.taken |= self.taken
        body = sub.body(q.body, stack + (name,))
        out = Program(tuple(sub.decls), tuple(body), q.name)
        self.cache[name] = out
        return out

    def body(self, body, stack) -> list[Statement]:
        out: list[Statement] = []
        for s in body:
            if isinstance(s, ForLoop):
                out.append(dataclasses.replace(s, body=tuple(self.body(s.body, stack))))
            elif isinstance(s, Call):
                out.extend(self.expand(s, stack))
            else:
                out.append(s)
        return out

    def expand(self, call: Call, stack) -> list[Statement]:
        callee = self.atomic(call.name, stack)
        if len(call.args) != callee.I:
            raise InlineError(f"line {call.line}: {call.name!r} takes {callee.I} arguments, got {len(call.args)}")
        site = next(self.sites)
        written = {w for s in walk(callee.body) for w in s.writes()}
        ren: dict[str, str] = {}
        prologue: list[Statement] = []
        args = iter(call.args)
        for d in callee.decls:
            if d.is_input:
                arg = next(args)
                if d.name in written:
                    # the callee overwrites its parameter: work on a copy
                    local = self.fresh(f"{d.name}_{call.name}_{site}")
                    self.decls.append(VarDecl(local, "int", 0))
                    prologue.append(Assign(local, Var(arg), line=call.line))
                    ren[d.name] = local
                else:
                    ren[d.name] = arg
            else:
                local = self.fresh(f"{d.name}_{call.name}_{site}")
                self.decls.append(VarDecl(local, d.kind, d.init))
                prologue.append(Assign(local, Const(d.init), line=call.line))
                ren[d.name] = local
        stmts = [rename(s, ren) for s in callee.body if not isinstance(s, Return)]
        stmts = [_relined(s, call.line) for s in stmts]
        result = ren.get(callee.return_var, callee.return_var)
        return prologue + stmts + [Assign(call.target, Var(result), line=call.line)]


def _relined(s: Statement, line: int) -> Statement:
    if isinstance(s, ForLoop):
        return dataclasses.replace(s, line=line, body=tuple(_relined(t, line) for t in s.body))
    return dataclasses.replace(s, line=line)


def inline_composite(p: Program) -> Program:
    """Expand every subprogram call into atomic statements.

    Callee locals get a call-site suffix (``res`` -> ``res_multiply_1``) so
    that nothing is captured; callee initializers are re-emitted as
    assignments at every call site, so calls inside loops start fresh each
    time. Atomic programs are returned unchanged.
    """
    if p.is_atomic:
        return Program(p.decls, p.body, p.name) if p.library else p
    inl = _Inliner(p)
    body = inl.body(p.body, (p.name,) if p.name else ())
    return Program(tuple(inl.decls), tuple(body), p.name)
