"""Compile atomic SNP programs into exact integer ReLU networks.

The network state is the vector of program variables in declaration order.
Every plain statement becomes one or two layers; a for-loop becomes a
set-up layer, a block of layers repeated ``B + 1`` times and a tear-down
layer. The repeated block evaluates the loop condition into a flag ``c``,
snapshots the variables, runs the clause, and keeps either the new or the
old values depending on ``c``, so every repetition is the same block of
layers whatever the input.

The keep-new-or-old selection uses the ReLU "if" gadget

    relu(2G*c + new - G) + relu(-2G*c + old + G) - G

which is exact only while ``new`` and ``old`` are at most ``G``. Repetitions
with ``c = 0`` still run the clause on whatever values are around, and those
throw-away values can exceed the program's runtime bound ``B``. ``G`` (the
write-back bound) is therefore kept separate from ``B``: by default it is
measured by running the network on every input (see
:class:`CompileOptions`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .lang import (AddConst, Assign, BinaryOp, Const, ForLoop, If, MulConst,
                   Program, Return, Statement, UnaryCmp, Var, bound_profile,
                   check, input_grid, interpret)
from .lang.interp import DEFAULT_SWEEP_CAP
from .nn import Layer, Network, Repeat, iter_layers

# gadget terms: coeff * relu(sign * d + offset), where d = x - c or x_l - x_r
GADGETS = {
    "==": ((1, 1, 1), (1, -1, 1), (1, 0, -2)),
    ">": ((1, 0, 1), (1, -1, -1)),
    ">=": ((1, 1, 1), (1, 0, -1)),
    "<": ((-1, 0, 1), (-1, -1, -1)),
    "<=": ((-1, 1, 1), (-1, 0, -1)),
}

AUTO = "auto"
_PROVISIONAL_G = 2**30


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CompileOptions:
    """Settings for :func:`compile_program`.

    Parameters
    ----------
    N : int
        Inputs range over ``{1..N}``.
    B : int, optional
        Runtime bound; measured with :func:`snpc.lang.bound_profile` when
        omitted. Loops are unrolled ``B + 1`` times.
    write_back_bound : int, "auto" or None
        Constant ``G`` of the conditional write-back and ``if`` gadgets.
        ``None`` uses ``G = B``. ``"auto"`` runs the network over all of
        ``[N]^I`` and sets ``G`` to the largest value any program variable
        reaches, including in repetitions whose results are discarded
        (never less than ``B``). Only ``"auto"`` guarantees agreement with
        the program when loops are present.
    strict_checks : bool
        Cross-check a declared ``B`` against a measured one when the input
        grid is small enough, and re-verify the result exhaustively.
    """

    N: int
    B: int | None = None
    write_back_bound: Union[int, str, None] = AUTO
    strict_checks: bool = False
    cap: int = DEFAULT_SWEEP_CAP


@dataclass
class LayerGroup:
    """The layers produced for one statement."""

    statement_ref: int
    body: tuple
    statement: Statement | None = None

    @property
    def layers(self) -> list[Layer]:
        return list(iter_layers(self.body))


class RCWord:
    """Repetition-compressed parameter word: the network body as a tree of
    layer atoms and repeat groups."""

    def __init__(self, body):
        self.body = tuple(body)

    def flatten(self) -> list[Layer]:
        return list(iter_layers(self.body))

    def atoms(self) -> list[Layer]:
        seen: dict[Layer, None] = {}

        def walk(b):
            for n in b:
                if isinstance(n, Layer):
                    seen.setdefault(n, None)
                else:
                    walk(n.body)

        walk(self.body)
        return list(seen)

    def groups(self) -> list[Repeat]:
        out = []

        def walk(b):
            for n in b:
                if isinstance(n, Repeat):
                    out.append(n)
                    walk(n.body)

        walk(self.body)
        return out

    def render(self) -> str:
        ids: dict[Layer, int] = {}

        def walk(b):
            parts = []
            for n in b:
                if isinstance(n, Layer):
                    parts.append(f"atom#{ids.setdefault(n, len(ids))}")
                else:
                    parts.append(f"( {walk(n.body)} )^{{{n.count}}}")
            return " ".join(parts)

        return walk(self.body)

    def __repr__(self):
        return f"RCWord(atoms={len(self.atoms())}, groups={len(self.groups())})"


def _layer(rows, bias, n_in) -> Layer:
    return Layer.from_rows(rows, bias, n_in)


def _ident(n):
    return [{r: 1} for r in range(n)]


class _Builder:
    def __init__(self, p: Program, B: int, G: int):
        self.p = p
        self.V = p.V
        self.idx = p.index
        self.B = B
        self.G = G
        self._aug: dict = {}

    # operands -----------------------------------------------------------
    def _term(self, op, coeff=1):
        """(row dict, bias) for ``coeff * op``."""
        if isinstance(op, Const):
            return {}, coeff * op.value
        return {self.idx[op.name]: coeff}, 0

    # plain statements -----------------------------------------------------
    def statement(self, s: Statement) -> tuple:
        V, ix = self.V, self.idx
        if isinstance(s, Return):
            return (_layer([{ix[s.var]: 1}], [0], V),)
        if isinstance(s, (Assign, AddConst, MulConst)):
            rows, bias = _ident(V), [0] * V
            i = ix[s.target]
            if isinstance(s, Assign):
                rows[i], bias[i] = self._term(s.src)
            elif isinstance(s, AddConst):
                rows[i], b0 = self._term(s.src)
                bias[i] = b0 + s.const
            else:
                rows[i], bias[i] = self._term(s.src, s.const)
            return (_layer(rows, bias, V),)
        if isinstance(s, BinaryOp) and not s.is_comparison:
            rows, bias = _ident(V), [0] * V
            i = ix[s.target]
            row: dict[int, int] = {}
            row[ix[s.left]] = row.get(ix[s.left], 0) + 1
            sign = 1 if s.op == "+" else -1
            row[ix[s.right]] = row.get(ix[s.right], 0) + sign
            rows[i] = {k: v for k, v in row.items() if v}
            return (_layer(rows, bias, V),)
        if isinstance(s, (UnaryCmp, BinaryOp)):
            if isinstance(s, UnaryCmp):
                diff, dbias = {ix[s.operand]: 1}, -s.const
            else:
                diff = {}
                diff[ix[s.left]] = diff.get(ix[s.left], 0) + 1
                diff[ix[s.right]] = diff.get(ix[s.right], 0) - 1
                diff = {k: v for k, v in diff.items() if v}
                dbias = 0
            terms = GADGETS[s.op]
            rows1, bias1 = _ident(V), [0] * V
            for sign, off, _ in terms:
                rows1.append({k: sign * v for k, v in diff.items()})
                bias1.append(sign * dbias + off)
            rows2 = _ident(V)
            rows2[ix[s.target]] = {V + t: coeff for t, (_, _, coeff) in enumerate(terms)}
            return (_layer(rows1, bias1, V), _layer(rows2, [0] * V, V + len(terms)))
        if isinstance(s, If):
            G = self.G
            c = ix[s.cond]
            r1, b1 = self._term(s.then)
            r2, b2 = self._term(s.orelse)
            t1 = dict(r1)
            t1[c] = t1.get(c, 0) + 2 * G
            t2 = dict(r2)
            t2[c] = t2.get(c, 0) - 2 * G
            rows1 = _ident(V) + [t1, t2]
            bias1 = [0] * V + [b1 - G, b2 + G]
            rows2 = _ident(V)
            rows2[ix[s.target]] = {V: 1, V + 1: 1}
            bias2 = [0] * V
            bias2[ix[s.target]] = -G
            return (_layer(rows1, bias1, V), _layer(rows2, bias2, V + 2))
        raise CompileError(f"cannot compile statement {s!r}")

    # loops ------------------------------------------------------------------
    def augment(self, node, extra: int):
        """Extend a clause layer (or repeat) with ``extra`` pass-through rows."""
        key = (node, extra)
        hit = self._aug.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Layer):
            W = [row + (0,) * extra for row in node.W]
            for k in range(extra):
                W.append((0,) * node.n_in + tuple(int(k == j) for j in range(extra)))
            out = Layer(tuple(W), node.b + (0,) * extra, node.n_in + extra)
        else:
            out = Repeat(tuple(self.augment(n, extra) for n in node.body), node.count)
        self._aug[key] = out
        return out

    def loop(self, s: ForLoop) -> tuple:
        V, ix, G = self.V, self.idx, self.G
        i = ix[s.counter]
        others = [k for k in range(V) if k != i]
        n_old = len(others)
        # L1: counter <- start, c <- 0
        rows, bias = _ident(V), [0] * V
        rows[i], bias[i] = self._term(s.start)
        L1 = _layer(rows + [{}], bias + [0], V)
        # L2: t1 = relu(end - x_i + 1), t2 = relu(end - x_i)
        er, eb = self._term(s.end)
        t = dict(er)
        t[i] = t.get(i, 0) - 1
        t = {k: v for k, v in t.items() if v}
        L2 = _layer(_ident(V + 1) + [t, dict(t)], [0] * (V + 1) + [eb + 1, eb], V + 1)
        # L3: c = t1 - t2 = 1{x_i <= end}
        L3 = _layer(_ident(V) + [{V + 1: 1, V + 2: -1}], [0] * (V + 1), V + 3)
        # L4: snapshot the non-counter variables
        L4 = _layer(_ident(V + 1) + [{k: 1} for k in others], [0] * (2 * V), V + 1)
        clause = tuple(self.augment(n, 1 + n_old) for n in self.body(s.body))
        # L5: p_k = relu(2G c + x_k - G), q_k = relu(-2G c + old_k + G)
        w4 = V + 1 + n_old
        rows5 = _ident(w4)
        bias5 = [0] * w4
        for j, k in enumerate(others):
            rows5.append({V: 2 * G, k: 1})
            bias5.append(-G)
        for j, k in enumerate(others):
            rows5.append({V: -2 * G, V + 1 + j: 1})
            bias5.append(G)
        L5 = _layer(rows5, bias5, w4)
        # L6: x_k = p_k + q_k - G
        rows6, bias6 = _ident(w4), [0] * w4
        for j, k in enumerate(others):
            rows6[k] = {w4 + j: 1, w4 + n_old + j: 1}
            bias6[k] = -G
        L6 = _layer(rows6, bias6, w4 + 2 * n_old)
        # L7: drop the snapshot, counter += 1
        bias7 = [0] * (V + 1)
        bias7[i] = 1
        L7 = _layer(_ident(V + 1), bias7, w4)
        # L8: drop c
        L8 = _layer(_ident(V), [0] * V, V + 1)
        block = (L2, L3, L4) + clause + (L5, L6, L7)
        return (L1, Repeat(block, self.B + 1), L8)

    def body(self, stmts) -> tuple:
        out = []
        for s in stmts:
            out.extend(self.loop(s) if isinstance(s, ForLoop) else self.statement(s))
        return tuple(out)

    def groups(self) -> list[LayerGroup]:
        return [LayerGroup(k, self.loop(s) if isinstance(s, ForLoop) else self.statement(s), s)
                for k, s in enumerate(self.p.body)]


def _network(p: Program, B: int, G: int) -> Network:
    b = _Builder(p, B, G)
    spec = [None if d.is_input else d.init for d in p.decls]
    net = Network(spec, b.body(p.body), relu_after_last=False)
    return net


def measure_write_back_bound(p: Program, N: int, B: int, *, cap: int = DEFAULT_SWEEP_CAP) -> int:
    """Largest value any program variable takes inside the network on
    ``[N]^I``, including repetitions whose results are discarded."""
    if N ** p.I > cap:
        raise CompileError(f"{N}^{p.I} inputs exceed the sweep cap; pass write_back_bound explicitly")
    grid = list(input_grid(N, p.I))
    G0 = max(_PROVISIONAL_G, 4 * B)
    while True:
        net = _network(p, B, G0)
        _, seen = net.eval_batch(grid, track_rows=p.V)
        if seen <= G0:
            return max(B, seen)
        G0 = 4 * seen


def compile_program(p: Program, opts: CompileOptions) -> tuple[Network, RCWord]:
    """Compile an atomic valid program into a network and its RC word.

    The returned network maps the free inputs (the program's ``input``
    variables, in order) to a one-element output vector.
    """
    check(p)
    if not p.is_atomic:
        raise CompileError("program has subprogram calls; inline it first")
    if opts.N < 1:
        raise CompileError("N must be positive")
    if opts.B is None:
        B = max(2, bound_profile(p, opts.N, cap=opts.cap).B)
    else:
        B = int(opts.B)
        if B < 2:
            raise CompileError("B must be at least 2")
        if opts.strict_checks and opts.N ** p.I <= opts.cap:
            measured = bound_profile(p, opts.N, cap=opts.cap).measured
            if measured > B:
                raise CompileError(f"declared B={B} is below the measured runtime bound {measured}")
    wb = opts.write_back_bound
    if wb is None:
        G = B
    elif wb == AUTO:
        G = B if p.n_loops == 0 else measure_write_back_bound(p, opts.N, B, cap=opts.cap)
    else:
        G = int(wb)
        if G < B:
            raise CompileError("write_back_bound must be at least B")
    net = _network(p, B, G)
    net.meta = {"program": p.name, "N": opts.N, "B": B, "G": G, "V": p.V, "L": p.L, "I": p.I}
    if opts.strict_checks and opts.N ** p.I <= opts.cap:
        rep = verify_equivalence(p, net, opts.N, cap=opts.cap)
        if rep.mismatches:
            raise CompileError(f"compiled network disagrees with the program on {len(rep.mismatches)} inputs")
    return net, RCWord(net.body)


def compile_source(source: str, N: int, **kw) -> tuple[Network, RCWord]:
    from .lang import inline_composite, parse

    return compile_program(inline_composite(parse(source)), CompileOptions(N, **kw))


def encode_statement(s: Statement, p: Program, B: int, G: int | None = None) -> LayerGroup:
    """Layers for a single non-loop statement of ``p``."""
    if isinstance(s, ForLoop):
        raise CompileError("use encode_for_loop for loops")
    return LayerGroup(-1, _Builder(p, B, B if G is None else G).statement(s), s)


def encode_for_loop(s: ForLoop, p: Program, B: int, G: int | None = None) -> LayerGroup:
    """Layers ``L1, Repeat(L2..L7, B+1), L8`` for one loop of ``p``."""
    return LayerGroup(-1, _Builder(p, B, B if G is None else G).loop(s), s)


@dataclass
class VerifyReport:
    checked: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_equivalence(p: Program, net: Network, N: int, *, cap: int = DEFAULT_SWEEP_CAP,
                       loop_bound: int | None = None) -> VerifyReport:
    """Compare the network with the interpreter on every input in ``[N]^I``.

    The interpreter runs with the network's loop semantics (``loop_bound``
    defaults to the ``B`` the network was compiled with).
    """
    if N ** p.I > cap:
        raise CompileError(f"{N}^{p.I} inputs exceed the sweep cap {cap}")
    if loop_bound is None:
        loop_bound = getattr(net, "meta", {}).get("B")
    grid = list(input_grid(N, p.I))
    got = net.eval_batch(grid)
    rep = VerifyReport(len(grid))
    for x, out in zip(grid, got):
        want = interpret(p, x, loop_bound=loop_bound)
        if out != [want]:
            rep.mismatches.append((x, want, out[0] if len(out) == 1 else out))
    return rep
