import random

import pytest

from snpc import corpus
from snpc.compiler import (GADGETS, CompileError, CompileOptions, RCWord,
                           compile_program, compile_source, encode_for_loop,
                           encode_statement, verify_equivalence)
from snpc.lang import (AddConst, Assign, BinaryOp, Const, MulConst, UnaryCmp,
                       input_grid, interpret, parse)
from snpc.lang.fuzz import random_program
from snpc.nn import Network


def relu(v):
    return v if v > 0 else 0


@pytest.mark.parametrize("op, fn", [
    ("==", lambda d: d == 0), (">", lambda d: d > 0), (">=", lambda d: d >= 0),
    ("<", lambda d: d < 0), ("<=", lambda d: d <= 0),
])
def test_comparison_gadgets_on_integers(op, fn):
    for d in range(-60, 61):
        got = sum(coeff * relu(sign * d + off) for sign, off, coeff in GADGETS[op])
        assert got == int(fn(d)), (op, d)


def _run_group(group, p, state):
    net = Network([None] * p.V, group.body)
    return net.eval(state)


SRC = """\
input x
input y
int z = 0
bool t = 1
bool u = 0
z = x + y
z = y - 1
z = 3 * x
z = 4
t = (x <= 2)
u = (x == y)
z = x - y
z = y if t else 7
return z
"""


OPS = {"==": lambda a, b: a == b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
       "<": lambda a, b: a < b, "<=": lambda a, b: a <= b}


def reference(s, env):
    """Value written by statement ``s`` in state ``env`` (None if negative)."""
    val = lambda op: op.value if isinstance(op, Const) else env[op.name]  # noqa: E731
    if isinstance(s, Assign):
        v = val(s.src)
    elif isinstance(s, AddConst):
        v = val(s.src) + s.const
    elif isinstance(s, MulConst):
        v = s.const * val(s.src)
    elif isinstance(s, UnaryCmp):
        v = int(OPS[s.op](env[s.operand], s.const))
    elif isinstance(s, BinaryOp) and s.is_comparison:
        v = int(OPS[s.op](env[s.left], env[s.right]))
    elif isinstance(s, BinaryOp):
        v = env[s.left] + (env[s.right] if s.op == "+" else -env[s.right])
    else:
        v = val(s.then) if env[s.cond] else val(s.orelse)
    return v if v >= 0 else None


def test_each_statement_layer_group_matches_its_meaning():
    p = parse(SRC)
    for s in p.body[:-1]:
        g = encode_statement(s, p, 50)
        for x, y, z in input_grid(5, 3):
            for t in (0, 1):
                state = [x, y, z, t, 1 - t]
                want = reference(s, dict(zip(p.names, state)))
                if want is None:
                    continue
                out = _run_group(g, p, state)
                expect = list(state)
                expect[p.index[s.target]] = want
                assert out == expect, (s, state)


def test_return_layer_selects_variable():
    p = parse(SRC)
    g = encode_statement(p.body[-1], p, 10)
    assert _run_group(g, p, [3, 4, 9, 1, 0]) == [9]


def test_for_loop_layers_shape():
    p = corpus.load("multiply")
    g = encode_for_loop(p.body[0], p, 25, 30)
    assert len(g.body) == 3
    rep = g.body[1]
    assert rep.count == 26
    layers = g.layers
    assert layers[0].n_out == p.V + 1 and layers[-1].n_out == p.V


@pytest.mark.parametrize("name, N", [("identity", 6), ("multiply", 5), ("triangle", 4), ("fibonacci", 8)])
def test_small_corpus_programs_compile_exactly(name, N):
    p = corpus.load(name)
    net, rc = compile_program(p, CompileOptions(N))
    assert verify_equivalence(p, net, N).ok
    # network semantics equal natural semantics at the compiled B
    for x in input_grid(N, p.I):
        assert net.eval(x) == [interpret(p, x)]


def test_fuzzed_programs_compile_exactly():
    rng = random.Random(2024)
    for _ in range(60):
        p = random_program(rng, N=3)
        net, _ = compile_program(p, CompileOptions(3))
        rep = verify_equivalence(p, net, 3)
        assert rep.ok, (str(p), rep.mismatches[:3])


def test_write_back_bound_equal_to_runtime_bound_is_unsound():
    # discarded repetitions can push values past B, so G = B breaks the
    # selection gadget; the measured G fixes it
    p = corpus.load("multiply")
    naive, _ = compile_program(p, CompileOptions(5, write_back_bound=None))
    assert naive.eval([5, 5]) != [25]
    good, _ = compile_program(p, CompileOptions(5))
    assert good.eval([5, 5]) == [25]
    assert good.meta["G"] > good.meta["B"] == 25


def test_parameters_bounded_by_twice_write_back_bound():
    for name, N in [("multiply", 5), ("fibonacci", 8), ("triangle", 4)]:
        net, _ = compile_program(corpus.load(name), CompileOptions(N))
        assert net.stats().max_abs_param <= 2 * max(net.meta["G"], 1)


def test_rc_word_structure():
    p = corpus.load("multiply")
    net, rc = compile_program(p, CompileOptions(5))
    assert isinstance(rc, RCWord)
    assert rc.flatten() == list(net.layers)
    assert len(rc.groups()) == p.n_loops == 1
    assert rc.groups()[0].count == net.meta["B"] + 1
    assert len(rc.atoms()) <= 8 * p.L
    assert rc.render().count("^{26}") == 1


def test_compile_errors():
    with pytest.raises(CompileError):
        compile_program(corpus.load("prime_composite", atomic=False), CompileOptions(5))
    with pytest.raises(CompileError):
        compile_program(corpus.load("multiply"), CompileOptions(5, B=1))
    with pytest.raises(CompileError):
        compile_program(corpus.load("multiply"), CompileOptions(5, B=30, write_back_bound=10))
    with pytest.raises(CompileError):
        compile_program(corpus.load("multiply"), CompileOptions(5, B=10, strict_checks=True))


def test_compile_source_and_declared_bound():
    net, _ = compile_source(corpus.source("multiply"), 4, B=16)
    assert net.meta["B"] == 16
    assert [net.eval(x)[0] for x in input_grid(4, 2)] == [a * b for a, b in input_grid(4, 2)]
