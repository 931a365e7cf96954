"""Random generator of small valid atomic programs, for differential tests."""
from __future__ import annotations

import random

from .ast import (COMPARISONS, AddConst, Assign, BinaryOp, Const, ForLoop, If,
                  MulConst, Program, Return, UnaryCmp, Var, VarDecl)
from .interp import SNPRuntimeError, execute, input_grid
from .validate import errors, validate


class _Gen:
    def __init__(self, rng: random.Random, max_len: int, max_vars: int):
        self.rng = rng
        self.max_len = max_len
        n_vars = rng.randint(2, max_vars)
        n_inputs = rng.randint(1, min(2, n_vars - 1))
        decls = [VarDecl(f"x{k}", "input") for k in range(n_inputs)]
        for k in range(n_vars - n_inputs):
            if rng.random() < 0.3:
                decls.append(VarDecl(f"b{k}", "bool", rng.randint(0, 1)))
            else:
                decls.append(VarDecl(f"v{k}", "int", rng.randint(0, 3)))
        self.decls = decls
        self.ints = [d.name for d in decls if d.kind != "bool"]
        self.bools = [d.name for d in decls if d.kind == "bool"]
        self.budget = max_len - 1  # keep one statement for return

    def operand(self, small=True):
        if self.rng.random() < 0.35:
            return Const(self.rng.randint(0, 3 if small else 5))
        return Var(self.rng.choice(self.ints + self.bools))

    def statement(self, frozen: set, depth: int):
        rng = self.rng
        writable_ints = [v for v in self.ints if v not in frozen]
        writable_bools = [v for v in self.bools if v not in frozen]
        choices = []
        if writable_ints:
            choices += ["assign", "addc", "mulc", "add", "sub", "if_int"]
            if depth < 2 and self.budget >= 2 and len(writable_ints) >= 1:
                choices += ["for", "for"]
        if writable_bools or writable_ints:
            choices += ["ucmp", "bcmp"]
        if writable_bools:
            choices += ["if_bool", "assign_bool"]
        if not choices:
            return None
        kind = rng.choice(choices)
        everything = self.ints + self.bools
        self.budget -= 1
        if kind == "for":
            counter = rng.choice(writable_ints)
            start = Const(rng.randint(0, 2)) if rng.random() < 0.6 else Var(rng.choice(everything))
            end = Const(rng.randint(0, 3)) if rng.random() < 0.4 else Var(rng.choice([v for v in everything if v != counter]))
            inner = set(frozen) | {counter}
            if isinstance(end, Var):
                inner.add(end.name)
            body = []
            n_body = rng.randint(1, max(1, min(3, self.budget)))
            for _ in range(n_body):
                if self.budget <= 0:
                    break
                s = self.statement(inner, depth + 1)
                if s is not None:
                    body.append(s)
            if not body:
                self.budget += 1
                return None
            return ForLoop(counter, start, end, tuple(body))
        if kind in ("ucmp", "bcmp"):
            tgt = rng.choice(writable_bools + writable_ints)
            op = rng.choice(COMPARISONS)
            a = rng.choice(everything)
            if kind == "ucmp":
                return UnaryCmp(tgt, op, a, rng.randint(0, 4))
            return BinaryOp(tgt, op, a, rng.choice(everything))
        if kind == "if_bool":
            tgt = rng.choice(writable_bools)
            cond = rng.choice(self.bools)
            pick = lambda: Const(rng.randint(0, 1)) if rng.random() < 0.5 else Var(rng.choice(self.bools))  # noqa: E731
            return If(tgt, cond, pick(), pick())
        if kind == "assign_bool":
            tgt = rng.choice(writable_bools)
            src = Const(rng.randint(0, 1)) if rng.random() < 0.5 else Var(rng.choice(self.bools))
            return Assign(tgt, src)
        tgt = rng.choice(writable_ints)
        if kind == "assign":
            return Assign(tgt, self.operand())
        if kind == "addc":
            return AddConst(tgt, self.operand(), rng.randint(-1, 3))
        if kind == "mulc":
            return MulConst(tgt, rng.randint(0, 2), self.operand())
        if kind in ("add", "sub"):
            return BinaryOp(tgt, "+" if kind == "add" else "-", rng.choice(everything), rng.choice(everything))
        if kind == "if_int" and self.bools:
            return If(tgt, rng.choice(self.bools), self.operand(), self.operand())
        return Assign(tgt, self.operand())

    def program(self) -> Program:
        body = []
        while self.budget > 0:
            s = self.statement(set(), 0)
            if s is None:
                break
            body.append(s)
        ret = self.rng.choice(self.ints + self.bools)
        body.append(Return(ret))
        return Program(tuple(self.decls), tuple(body))


def random_program(rng: random.Random, *, max_len: int = 8, max_vars: int = 6,
                   N: int = 3, max_value: int = 60, tries: int = 1000) -> Program:
    """Draw a valid atomic program that runs without negative values on
    every input in ``[N]^I`` and whose values stay at most ``max_value``."""
    for _ in range(tries):
        p = _Gen(rng, rng.randint(1, max_len), max_vars).program()
        if p.L > max_len or errors(validate(p, warnings=False)):
            continue
        try:
            top = max(execute(p, x, max_steps=20_000).max_value for x in input_grid(N, p.I))
        except SNPRuntimeError:
            continue
        if top <= max_value:
            return p
    raise RuntimeError("could not draw a suitable program")
