"""Reference interpreter and runtime-bound sweep."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ast import (AddConst, Assign, BinaryOp, Call, Const, ForLoop, If,
                  MulConst, Program, Return, UnaryCmp)

DEFAULT_SWEEP_CAP = 10**6

_CMP = {
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


class SNPRuntimeError(RuntimeError):
    pass


class SweepCapExceeded(ValueError):
    pass


@dataclass
class ExecResult:
    value: int
    state: dict[str, int]
    max_value: int
    steps: int
    trace: list[str] | None = None


class _Machine:
    def __init__(self, p: Program, loop_bound, trace: bool, max_steps):
        self.p = p
        self.loop_bound = loop_bound
        self.trace = [] if trace else None
        self.max_steps = max_steps
        self.steps = 0
        self.maxv = 0
        self.env: dict[str, int] = {}

    def val(self, op) -> int:
        return op.value if isinstance(op, Const) else self.env[op.name]

    def set(self, name: str, v: int, s):
        if v < 0:
            raise SNPRuntimeError(f"line {s.line}: {name} would become negative ({v})")
        self.env[name] = v
        if v > self.maxv:
            self.maxv = v

    def tick(self, s):
        self.steps += 1
        if self.max_steps is not None and self.steps > self.max_steps:
            raise SNPRuntimeError(f"step limit {self.max_steps} exceeded")
        if self.trace is not None:
            vals = " ".join(f"{k}={v}" for k, v in self.env.items())
            self.trace.append(f"{self.steps} {vals}")

    def run(self, body):
        env = self.env
        for s in body:
            if isinstance(s, ForLoop):
                self.loop(s)
                continue
            if isinstance(s, Return):
                self.tick(s)
                return env[s.var]
            if isinstance(s, Assign):
                v = self.val(s.src)
            elif isinstance(s, AddConst):
                v = self.val(s.src) + s.const
            elif isinstance(s, MulConst):
                v = s.const * self.val(s.src)
            elif isinstance(s, UnaryCmp):
                v = int(_CMP[s.op](env[s.operand], s.const))
            elif isinstance(s, BinaryOp):
                a, b = env[s.left], env[s.right]
                if s.op == "+":
                    v = a + b
                elif s.op == "-":
                    v = a - b
                else:
                    v = int(_CMP[s.op](a, b))
            elif isinstance(s, If):
                v = self.val(s.then) if env[s.cond] == 1 else self.val(s.orelse)
            elif isinstance(s, Call):
                raise SNPRuntimeError("composite program: inline calls before interpreting")
            else:
                raise TypeError(f"unknown statement {s!r}")
            self.set(s.writes()[0], v, s)
            self.tick(s)
        return None

    def loop(self, s: ForLoop):
        env = self.env
        end_is_var = not isinstance(s.end, Const)
        self.set(s.counter, self.val(s.start), s)
        self.tick(s)
        if self.loop_bound is None:
            while env[s.counter] <= self.val(s.end):
                self.run(s.body)
                self.set(s.counter, env[s.counter] + 1, s)
            return
        # fixed number of physical repetitions, as in the compiled network
        for _ in range(self.loop_bound + 1):
            end = env[s.end.name] if end_is_var else s.end.value
            if env[s.counter] <= end:
                self.run(s.body)
            self.set(s.counter, env[s.counter] + 1, s)


def execute(p: Program, x, *, loop_bound: int | None = None, trace: bool = False,
            max_steps: int | None = None) -> ExecResult:
    """Run ``p`` on input vector ``x`` and return the full machine state.

    With ``loop_bound=None`` loops have their usual meaning and the counter
    leaves a loop at ``max(start, end + 1)``. With an integer ``loop_bound``
    every loop takes exactly ``loop_bound + 1`` counter steps and only the
    steps with ``counter <= end`` run the clause, which is what the compiled
    network does; the counter then leaves the loop at ``start + loop_bound + 1``.
    """
    if not p.is_atomic:
        raise SNPRuntimeError("composite program: inline calls before interpreting")
    x = [int(v) for v in x]
    if len(x) != p.I:
        raise SNPRuntimeError(f"expected {p.I} inputs, got {len(x)}")
    m = _Machine(p, loop_bound, trace, max_steps)
    it = iter(x)
    for d in p.decls:
        v = next(it) if d.is_input else d.init
        m.set(d.name, v, d)
    if m.trace is not None:
        m.trace.append("0 " + " ".join(f"{k}={v}" for k, v in m.env.items()))
    out = m.run(p.body)
    if out is None:
        raise SNPRuntimeError("program finished without return")
    return ExecResult(out, dict(m.env), m.maxv, m.steps, m.trace)


def interpret(p: Program, x, *, loop_bound: int | None = None) -> int:
    """Return the value of ``p`` on input ``x`` (see :func:`execute`)."""
    return execute(p, x, loop_bound=loop_bound).value


def input_grid(N: int, I: int):
    """All points of ``{1..N}^I`` in lexicographic order."""
    return itertools.product(range(1, N + 1), repeat=I)


@dataclass
class BoundProfile:
    N: int
    B: int
    measured: int
    declared: int | None = None
    per_input_max: dict | None = field(default=None, repr=False)


def bound_profile(p: Program, N: int, *, cap: int = DEFAULT_SWEEP_CAP,
                  declared: int | None = None, keep_table: bool = False) -> BoundProfile:
    """Largest runtime value of any variable over all inputs in ``[N]^I``.

    Counts inputs, initializers and every value written while running,
    including loop counters. If ``declared`` is given the result is
    ``max(measured, declared)``.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N ** p.I > cap:
        if declared is None:
            raise SweepCapExceeded(f"{N}^{p.I} inputs exceed the sweep cap {cap}; supply a declared bound")
        return BoundProfile(N, declared, 0, declared)
    best = 0
    table = {} if keep_table else None
    for x in input_grid(N, p.I):
        r = execute(p, x)
        best = max(best, r.max_value)
        if table is not None:
            table[x] = r.max_value
    B = best if declared is None else max(best, declared)
    return BoundProfile(N, B, best, declared, table)
