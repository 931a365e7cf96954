"""Syntax tree for simple neural programs (SNPs).

All nodes are frozen dataclasses; a parsed :class:`Program` can be shared
freely. Source line numbers ride along on statements but never take part in
equality, so ``parse(render(p)) == p`` holds structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

COMPARISONS = ("==", "<", ">", "<=", ">=")
BINARY_OPS = ("+", "-") + COMPARISONS


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Operand = Union[Var, Const]


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str  # "input", "int" or "bool"
    init: int | None = None
    line: int = field(default=0, compare=False)

    @property
    def is_input(self) -> bool:
        return self.kind == "input"


@dataclass(frozen=True)
class Statement:
    line: int = field(default=0, compare=False, kw_only=True)

    def writes(self) -> tuple[str, ...]:
        return ()

    def reads(self) -> tuple[str, ...]:
        return ()


def _names(*ops: Operand) -> tuple[str, ...]:
    return tuple(op.name for op in ops if isinstance(op, Var))


@dataclass(frozen=True)
class Assign(Statement):
    target: str
    src: Operand

    def writes(self):
        return (self.target,)

    def reads(self):
        return _names(self.src)


@dataclass(frozen=True)
class AddConst(Statement):
    """``target = src + const``; ``const`` may be negative."""

    target: str
    src: Operand
    const: int

    def writes(self):
        return (self.target,)

    def reads(self):
        return _names(self.src)


@dataclass(frozen=True)
class MulConst(Statement):
    """``target = const * src`` with ``const >= 0``."""

    target: str
    const: int
    src: Operand

    def writes(self):
        return (self.target,)

    def reads(self):
        return _names(self.src)


@dataclass(frozen=True)
class UnaryCmp(Statement):
    """``target = (operand op const)``."""

    target: str
    op: str
    operand: str
    const: int

    def writes(self):
        return (self.target,)

    def reads(self):
        return (self.operand,)


@dataclass(frozen=True)
class BinaryOp(Statement):
    """``target = left op right`` for two variables."""

    target: str
    op: str
    left: str
    right: str

    @property
    def is_comparison(self) -> bool:
        return self.op in COMPARISONS

    def writes(self):
        return (self.target,)

    def reads(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class If(Statement):
    """``target = then if cond else orelse``."""

    target: str
    cond: str
    then: Operand
    orelse: Operand

    def writes(self):
        return (self.target,)

    def reads(self):
        return (self.cond,) + _names(self.then, self.orelse)


@dataclass(frozen=True)
class ForLoop(Statement):
    counter: str
    start: Operand
    end: Operand
    body: tuple[Statement, ...]

    def writes(self):
        return (self.counter,)

    def reads(self):
        return _names(self.start, self.end)


@dataclass(frozen=True)
class Call(Statement):
    """``target = name(args...)``, a call to a previously defined program."""

    target: str
    name: str
    args: tuple[str, ...]

    def writes(self):
        return (self.target,)

    def reads(self):
        return self.args


@dataclass(frozen=True)
class Return(Statement):
    var: str

    def reads(self):
        return (self.var,)


def walk(body: tuple[Statement, ...]) -> Iterator[Statement]:
    """Pre-order walk over statements, descending into loop clauses."""
    for s in body:
        yield s
        if isinstance(s, ForLoop):
            yield from walk(s.body)


def _depth(body) -> int:
    return max((1 + _depth(s.body) for s in body if isinstance(s, ForLoop)), default=0)


@dataclass(frozen=True)
class Program:
    """A variable context plus a statement list ending in ``return``.

    ``library`` holds programs defined before this one with ``def`` blocks;
    they are only needed until :func:`snpc.lang.inline_composite` runs.
    """

    decls: tuple[VarDecl, ...]
    body: tuple[Statement, ...]
    name: str | None = None
    library: tuple["Program", ...] = ()

    @property
    def V(self) -> int:
        return len(self.decls)

    @property
    def I(self) -> int:
        return sum(d.is_input for d in self.decls)

    @property
    def L(self) -> int:
        return sum(1 for _ in walk(self.body))

    @property
    def depth(self) -> int:
        return _depth(self.body)

    @property
    def n_loops(self) -> int:
        return sum(isinstance(s, ForLoop) for s in walk(self.body))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls)

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.is_input)

    @property
    def index(self) -> dict[str, int]:
        return {d.name: k for k, d in enumerate(self.decls)}

    @property
    def return_var(self) -> str | None:
        if self.body and isinstance(self.body[-1], Return):
            return self.body[-1].var
        return None

    @property
    def is_atomic(self) -> bool:
        return not any(isinstance(s, Call) for s in walk(self.body))

    def decl(self, name: str) -> VarDecl | None:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def subprogram(self, name: str) -> "Program | None":
        for p in self.library:
            if p.name == name:
                return p
        return None

    def __str__(self) -> str:
        from .printer import render

        return render(self)
