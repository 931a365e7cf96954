import random

import pytest

from snpc import corpus
from snpc.lang import (AddConst, Assign, BinaryOp, Call, ForLoop, If, MulConst,
                       Return, SNPRuntimeError, SNPSyntaxError,
                       SNPValidationError, SweepCapExceeded, UnaryCmp,
                       bound_profile, check, errors, execute, inline_composite,
                       input_grid, interpret, parse, render, validate)
from snpc.lang.fuzz import random_program

MULTIPLY = """\
input x
input y
int i = 0
int res = 0
for i = 1,...,x:
    res = res + y
return res
"""


def is_prime(n):
    return n >= 2 and all(n % d for d in range(2, n))


# ---------------------------------------------------------------------------
# parsing and printing

def test_parse_multiply_structure():
    p = parse(MULTIPLY)
    assert (p.V, p.I, p.L, p.depth) == (4, 2, 3, 1)
    assert p.inputs == ("x", "y")
    loop = p.body[0]
    assert isinstance(loop, ForLoop) and loop.counter == "i"
    assert isinstance(loop.body[0], BinaryOp) and loop.body[0].op == "+"
    assert p.return_var == "res"


def test_statement_kinds():
    src = """\
input a
int b = 3
int c = 0
bool t = 0
c = b
c = b + 2
c = b - 2
c = 3 * b
t = (a > 2)
t = (a == b)
c = a - b
c = a if t else 4
return c
"""
    p = parse(src)
    kinds = [type(s) for s in p.body]
    assert kinds == [Assign, AddConst, AddConst, MulConst, UnaryCmp, BinaryOp, BinaryOp, If, Return]
    assert p.body[2].const == -2


@pytest.mark.parametrize("name", corpus.names())
def test_render_round_trip(name):
    p = parse(corpus.source(name), name=name)
    again = parse(render(p), name=name)
    assert again == p


@pytest.mark.parametrize("src, fragment", [
    ("input x\nx = 2 - x\nreturn x\n", "constant minus"),
    ("input x\nint y = 0\ny = x * 2\nreturn y\n", None),
    ("input x\nint y = -1\nreturn y\n", None),
    ("input x\nbool t = 0\nt = x > 1\nreturn t\n", None),
    ("input x\n  int y = 0\nreturn x\n", None),
    ("input x\nfor i = 1,...,x\n    x = x\nreturn x\n", None),
])
def test_syntax_errors(src, fragment):
    with pytest.raises(SNPSyntaxError) as e:
        parse(src)
    assert e.value.line >= 1


def test_comments_and_blank_lines():
    p = parse("# leading\ninput x  # trailing\n\nint y = 1\ny = x + 1\nreturn y\n")
    assert interpret(p, [4]) == 5


# ---------------------------------------------------------------------------
# validation

@pytest.mark.parametrize("src", [
    "input x\ninput x\nreturn x\n",
    "input x\ny = x\nreturn x\n",
    "input x\nbool b = 2\nreturn x\n",
    "input x\nint i = 0\nfor i = 1,...,x:\n    i = i + 1\nreturn x\n",
    "input x\nint i = 0\nfor i = 1,...,x:\n    x = x + 1\nreturn x\n",
    "input x\nint y = 0\nint z = 0\ny = x if z else 1\nreturn y\n",
    "input x\nbool b = 0\nb = x + 1\nreturn b\n",
    "input x\nint y = 0\ny = f(x)\nreturn y\n",
    "input x\nreturn x\nx = 1\n",
])
def test_validation_errors(src):
    p = parse(src)
    assert errors(validate(p))
    with pytest.raises(SNPValidationError):
        check(p)


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_is_valid(name):
    p = parse(corpus.source(name), name=name)
    assert not errors(validate(p))


def test_call_arity_and_recursion():
    src = "def f:\n    input a\n    return a\n\ninput x\nint y = 0\ny = f(x, x)\nreturn y\n"
    assert errors(validate(parse(src)))
    rec = "def f:\n    input a\n    int b = 0\n    b = f(a)\n    return b\n\ninput x\nint y = 0\ny = f(x)\nreturn y\n"
    assert errors(validate(parse(rec)))


# ---------------------------------------------------------------------------
# inlining

def test_inline_composite_prime_matches_atomic():
    comp = corpus.load("prime_composite", atomic=False)
    assert not comp.is_atomic
    flat = inline_composite(comp)
    assert flat.is_atomic
    assert (flat.V, flat.L) == (9, 11)
    atomic = corpus.load("prime")
    for n in range(1, 16):
        assert interpret(flat, [n]) == interpret(atomic, [n])


def test_inline_keeps_inputs_intact():
    src = ("def bump:\n    input a\n    a = a + 1\n    return a\n\n"
           "input x\nint y = 0\ny = bump(x)\ny = y + x\nreturn y\n")
    p = inline_composite(parse(src))
    assert interpret(p, [3]) == 7


def test_inline_without_calls_is_identity():
    p = corpus.load("multiply")
    assert inline_composite(p) is p or inline_composite(p) == p


# ---------------------------------------------------------------------------
# interpretation

def test_corpus_semantics():
    assert [interpret(corpus.load("multiply"), [x, y]) for x in range(1, 4) for y in range(1, 4)] == \
        [x * y for x in range(1, 4) for y in range(1, 4)]
    fib = [0, 1]
    while len(fib) < 12:
        fib.append(fib[-1] + fib[-2])
    assert [interpret(corpus.load("fibonacci"), [n]) for n in range(1, 11)] == fib[1:11]
    tri = corpus.load("triangle")
    for x in input_grid(4, 3):
        a, b, c = x
        assert interpret(tri, x) == int(a + b > c and b + c > a and a + c > b)
    prime = corpus.load("prime")
    corrected = corpus.load("prime_corrected")
    for n in range(2, 20):
        assert interpret(prime, [n]) == int(not is_prime(n))
        assert interpret(corrected, [n]) == int(is_prime(n))
    assert interpret(corpus.load("constant0"), [5]) == 0
    assert interpret(corpus.load("constant1"), [5]) == 1


def test_sum_of_squares_semantics():
    p = corpus.load("sum_of_squares")
    for n in range(1, 9):
        want = int(any(a * a + b * b == n for a in range(n + 1) for b in range(n + 1)))
        assert interpret(p, [n]) == want


def test_prime_as_printed_outputs_at_small_n():
    p = corpus.load("prime")
    assert [interpret(p, [n]) for n in range(1, 11)] == [0, 0, 0, 1, 0, 1, 0, 1, 1, 1]


def test_loop_exit_semantics():
    p = parse("input x\nint i = 0\nint s = 0\nfor i = 3,...,x:\n    s = s + 1\nreturn i\n")
    assert interpret(p, [1]) == 3      # empty loop leaves the counter at start
    assert interpret(p, [5]) == 6
    # fixed repetition count: the counter always advances loop_bound + 1 times
    assert interpret(p, [5], loop_bound=10) == 3 + 11
    q = parse("input x\nint i = 0\nint s = 0\nfor i = 3,...,x:\n    s = s + 1\nreturn s\n")
    assert interpret(q, [5], loop_bound=10) == interpret(q, [5]) == 3


def test_trace_and_steps():
    r = execute(corpus.load("multiply"), [2, 3], trace=True)
    assert r.value == 6
    assert r.trace[0].startswith("0 x=2 y=3")
    assert r.steps == len(r.trace) - 1


def test_runtime_errors():
    p = parse("input x\nint y = 0\ny = y - x\nreturn y\n")
    with pytest.raises(SNPRuntimeError):
        interpret(p, [1])
    with pytest.raises(SNPRuntimeError):
        interpret(corpus.load("multiply"), [1])
    with pytest.raises(SNPRuntimeError):
        execute(corpus.load("fibonacci"), [10], max_steps=5)


def test_bound_profile_corpus():
    assert bound_profile(corpus.load("prime"), 10).B == 100
    assert bound_profile(corpus.load("sum_of_squares"), 4).B == 32
    assert bound_profile(corpus.load("multiply"), 5).B == 25
    assert bound_profile(corpus.load("fibonacci"), 10).B == 55


def test_bound_profile_cap():
    with pytest.raises(SweepCapExceeded):
        bound_profile(corpus.load("multiply"), 2000, cap=1000)
    assert bound_profile(corpus.load("multiply"), 2000, cap=1000, declared=7).B == 7


def test_input_grid_order():
    assert list(input_grid(2, 2)) == [(1, 1), (1, 2), (2, 1), (2, 2)]


# ---------------------------------------------------------------------------
# fuzzing

def test_random_programs_are_valid_and_bounded():
    rng = random.Random(3)
    for _ in range(50):
        p = random_program(rng)
        assert not errors(validate(p, warnings=False))
        assert p.L <= 8 and p.V <= 6
        for x in input_grid(3, p.I):
            assert execute(p, x).max_value <= 60


def test_random_programs_print_and_reparse():
    rng = random.Random(11)
    for _ in range(50):
        p = random_program(rng)
        assert parse(render(p)) == p
