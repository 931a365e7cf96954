"""Symbol-sequence encoding of networks and description lengths.

Alphabet (10 symbols; internal one-character codes in brackets)::

    input marker [I], comma [,], minus [-], 0, 1, star [*],
    weight marker [W], bias marker [B], ( and )

A full encoding is a comma separated list of items: first the input spec
(``I`` for a free coordinate, the binary value for a fixed one), then for
each layer ``W``, its weights row by row, ``B`` and its biases. Layer shapes
are not transmitted: a layer's input width is the previous layer's output
width, and its row count is the number of weights divided by that width,
which must also equal the number of biases.

``( ... )*k`` stands for ``k`` copies of the bracketed symbols, ``k`` written
in binary without leading zeros. The count is read greedily, so a group must
never be followed directly by ``0`` or ``1``.

In ``.nnsym`` files the symbols are written ``I , - 0 1 * W Bv ( )``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .nn import Layer, Network, Repeat, body_length

ALPHABET = ("I", ",", "-", "0", "1", "*", "W", "B", "(", ")")
ALPHABET_SIZE = len(ALPHABET)
_ORDER = {s: k for k, s in enumerate(ALPHABET)}
_FILE = {"B": "Bv"}
_UNICODE = {"I": "\U0001d4d8", "W": "\U0001d4b2", "B": "ℬ"}
_FROM_UNICODE = {v: k for k, v in _UNICODE.items()}

DEFAULT_C_IMPL = 64
EXPANSION_CAP = 10**8
EMIT_CAP = 5 * 10**7


class CodecError(ValueError):
    pass


class SymbolSeq:
    """A string over the 10-symbol alphabet. ``len`` counts symbols."""

    __slots__ = ("text",)

    def __init__(self, text: str):
        bad = set(text) - set(ALPHABET)
        if bad:
            raise CodecError(f"not in the alphabet: {sorted(bad)!r}")
        self.text = text

    def __len__(self):
        return len(self.text)

    def __str__(self):
        return self.text

    def __repr__(self):
        t = self.text if len(self.text) <= 60 else self.text[:57] + "..."
        return f"SymbolSeq({t!r}, len={len(self.text)})"

    def __eq__(self, other):
        return isinstance(other, SymbolSeq) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def sort_key(self):
        """Lexicographic key in alphabet order (used to break ties)."""
        return tuple(_ORDER[c] for c in self.text)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    # renderings ---------------------------------------------------------
    def to_file_text(self) -> str:
        return "".join(_FILE.get(c, c) for c in self.text)

    @classmethod
    def from_file_text(cls, text: str) -> "SymbolSeq":
        """Parse the ``.nnsym`` rendering (a single trailing newline is allowed)."""
        if text.endswith("\n"):
            text = text[:-1]
        out = []
        k = 0
        while k < len(text):
            ch = text[k]
            if ch == "B":
                if text[k + 1: k + 2] != "v":
                    raise CodecError(f"position {k}: 'B' must be written 'Bv'")
                out.append("B")
                k += 2
                continue
            if ch not in ALPHABET:
                raise CodecError(f"position {k}: unexpected character {ch!r}")
            out.append(ch)
            k += 1
        return cls("".join(out))

    def to_unicode(self) -> str:
        return "".join(_UNICODE.get(c, c) for c in self.text)

    @classmethod
    def from_unicode(cls, text: str) -> "SymbolSeq":
        """Parse the display form; whitespace is ignored."""
        return cls("".join(_FROM_UNICODE.get(c, c) for c in text if not c.isspace()))

    def has_groups(self) -> bool:
        return "(" in self.text

    def expand(self, cap: int = EXPANSION_CAP) -> "SymbolSeq":
        """Write out every group; raises if the result would exceed ``cap``."""
        tree = _parse_groups(self.text)
        out: list[str] = []
        size = [0]

        def rec(elems):
            for e in elems:
                if isinstance(e, str):
                    size[0] += len(e)
                    if size[0] > cap:
                        raise CodecError("expansion exceeds the cap")
                    out.append(e)
                else:
                    for _ in range(e.count):
                        rec(e.children)

        rec(tree)
        return SymbolSeq("".join(out))


# ---------------------------------------------------------------------------
# numbers

def bin_int(v: int) -> str:
    v = int(v)
    return "-" + format(-v, "b") if v < 0 else format(v, "b")


def _bin_len(v: int) -> int:
    v = int(v)
    return (v < 0) + max(1, abs(v).bit_length())


def _parse_number(tok: str, *, signed=True) -> int:
    neg = tok.startswith("-")
    digits = tok[1:] if neg else tok
    if neg and not signed:
        raise CodecError(f"negative value {tok!r} not allowed here")
    if not digits or any(c not in "01" for c in digits):
        raise CodecError(f"malformed number {tok!r}")
    if len(digits) > 1 and digits[0] == "0":
        raise CodecError(f"leading zero in {tok!r}")
    if neg and digits == "0":
        raise CodecError("negative zero")
    v = int(digits, 2)
    return -v if neg else v


# ---------------------------------------------------------------------------
# emission

def _s2_items(net: Network) -> list[str]:
    return ["I" if v is None else bin_int(v) for v in net.input_spec]


def _entries(values, runs: bool) -> str:
    """``,v`` for each value, with runs of equal values as ``(,v)*k``."""
    out = []
    vals = list(values)
    k = 0
    while k < len(vals):
        j = k
        while j < len(vals) and vals[j] == vals[k]:
            j += 1
        n = j - k
        one = "," + bin_int(vals[k])
        plain = one * n
        if runs and n > 1:
            grouped = "(" + one + ")*" + format(n, "b")
            if len(grouped) < len(plain):
                plain = grouped
        out.append(plain)
        k = j
    return "".join(out)


class _Emitter:
    def __init__(self, runs: bool):
        self.runs = runs
        self.cache: dict[Layer, str] = {}
        self.len_cache: dict = {}

    def layer(self, l: Layer) -> str:
        s = self.cache.get(l)
        if s is None:
            s = ("W" + _entries((v for r in l.W for v in r), self.runs)
                 + ",B" + _entries(l.b, self.runs))
            self.cache[l] = s
        return s

    def body(self, body) -> str:
        parts = []
        for n in body:
            if isinstance(n, Layer):
                parts.append(self.layer(n))
                parts.append(",")
            elif n.count == 1:
                parts.append(self.body(n.body))
            elif n.count > 1:
                parts.append("(" + self.body(n.body) + ")*" + format(n.count, "b"))
        return "".join(parts)

    def body_len(self, body) -> int:
        total = 0
        for n in body:
            if isinstance(n, Layer):
                total += len(self.layer(n)) + 1
            elif n.count == 1:
                total += self._cached_len(n)
            elif n.count > 1:
                total += 3 + self._cached_len(n) + n.count.bit_length()
        return total

    def _cached_len(self, r: Repeat) -> int:
        v = self.len_cache.get(r)
        if v is None:
            v = self.body_len(r.body)
            self.len_cache[r] = v
        return v


def _peel_last(body):
    from ._engine import _peel_last as peel

    return peel(body)


def layer_full_length(l: Layer) -> int:
    """Symbols used by ``W,<weights>,B,<biases>`` without groups."""
    return (1 + sum(1 + _bin_len(v) for r in l.W for v in r)
            + 2 + sum(1 + _bin_len(v) for v in l.b))


def raw_length(net: Network) -> int:
    """Length of :func:`emit_full` computed without materialising it."""
    s2 = sum(len(t) for t in _s2_items(net)) + len(net.input_spec) - 1
    layers = sum(m * (layer_full_length(l) + 1) for l, m in net.unique_layers().items())
    return s2 + 1 + layers - 1


def emit_full(net: Network, *, cap: int = EMIT_CAP) -> SymbolSeq:
    """Plain encoding: input spec, then every layer written out."""
    n = raw_length(net)
    if n > cap:
        raise CodecError(f"full encoding has {n} symbols (cap {cap}); use emit_compressed")
    em = _Emitter(runs=False)
    parts = [",".join(_s2_items(net))]
    for l in net.layers:
        parts.append(em.layer(l))
    return SymbolSeq(",".join(parts))


def emit_compressed(net: Network, rc=None, *, runs: bool = True) -> SymbolSeq:
    """Encoding with one group per repeat node of the network (or of ``rc``).

    Each loop block is written once as ``( ... )*bin(count)``. With
    ``runs=True`` runs of equal entries inside a layer are also grouped,
    written ``(,v)*k``.
    """
    body = net.body
    if rc is not None:
        rbody = tuple(rc.body)
        if rbody != body:
            if body_length(rbody) != net.depth or any(a != b for a, b in zip(rc.flatten(), net.layers)):
                raise CodecError("RC word does not match the network")
            body = rbody
    em = _Emitter(runs)
    text = ",".join(_s2_items(net)) + "," + em.body(_peel_last(body))
    return SymbolSeq(text[:-1])


def compressed_length(net: Network, *, runs: bool = True) -> int:
    """``len(emit_compressed(net))`` without building the string."""
    em = _Emitter(runs)
    s2 = sum(len(t) for t in _s2_items(net)) + len(net.input_spec)
    return s2 + em.body_len(_peel_last(net.body)) - 1


# ---------------------------------------------------------------------------
# decoding

@dataclass
class _Group:
    children: list
    count: int


def _parse_groups(text: str):
    """Split into a tree of plain strings and groups; checks brackets and counts."""
    stack: list[list] = [[]]
    buf: list[str] = []
    k = 0
    n = len(text)

    def flush():
        if buf:
            stack[-1].append("".join(buf))
            buf.clear()

    while k < n:
        ch = text[k]
        if ch == "(":
            flush()
            stack.append([])
            k += 1
        elif ch == ")":
            flush()
            if len(stack) == 1:
                raise CodecError(f"position {k}: unmatched ')'")
            if k + 1 >= n or text[k + 1] != "*":
                raise CodecError(f"position {k}: ')' must be followed by '*'")
            j = k + 2
            while j < n and text[j] in "01":
                j += 1
            digits = text[k + 2: j]
            if not digits:
                raise CodecError(f"position {k}: missing repeat count")
            if digits[0] == "0":
                raise CodecError(f"position {k}: repeat count must be positive without leading zeros")
            children = stack.pop()
            if not children:
                raise CodecError(f"position {k}: empty group")
            stack[-1].append(_Group(children, int(digits, 2)))
            k = j
        elif ch == "*":
            raise CodecError(f"position {k}: '*' outside a group suffix")
        else:
            buf.append(ch)
            k += 1
    flush()
    if len(stack) != 1:
        raise CodecError("unmatched '('")
    return stack[0]


S2, WEIGHTS, BIAS, AFTER = 0, 1, 2, 3


class _Decoder:
    def __init__(self, cap: int):
        self.phase = S2
        self.buf: list[str] = []
        self.spec: list = []
        self.width = 0
        self.weights: list[int] = []
        self.bias: list[int] = []
        self.rows = 0
        self.out: list[list] = [[]]
        self.budget = cap

    # characters ---------------------------------------------------------
    def feed(self, s: str):
        self.budget -= len(s)
        if self.budget < 0:
            raise CodecError("expansion exceeds the cap")
        for ch in s:
            if ch == ",":
                self.token()
            else:
                self.buf.append(ch)

    def token(self):
        if not self.buf:
            raise CodecError("empty item (two commas in a row or a leading comma)")
        tok = "".join(self.buf)
        self.buf.clear()
        ph = self.phase
        if ph == S2:
            if tok == "W":
                if not self.spec:
                    raise CodecError("missing input spec before the first layer")
                self.width = len(self.spec)
                self.phase, self.weights = WEIGHTS, []
            elif tok == "I":
                self.spec.append(None)
            elif tok == "B":
                raise CodecError("bias marker before any layer")
            else:
                self.spec.append(_parse_number(tok, signed=False))
        elif ph == WEIGHTS:
            if tok == "B":
                n = len(self.weights)
                if n == 0 or n % self.width:
                    raise CodecError(f"{n} weights do not fill rows of width {self.width}")
                self.rows = n // self.width
                self.phase, self.bias = BIAS, []
            elif tok in ("W", "I"):
                raise CodecError(f"unexpected {tok!r} inside a weight list")
            else:
                self.weights.append(_parse_number(tok))
        elif ph == BIAS:
            if tok in ("W", "B", "I"):
                raise CodecError(f"bias list ended after {len(self.bias)} of {self.rows} entries")
            self.bias.append(_parse_number(tok))
            if len(self.bias) == self.rows:
                w = self.width
                W = tuple(tuple(self.weights[r * w:(r + 1) * w]) for r in range(self.rows))
                self.out[-1].append(Layer(W, tuple(self.bias), w))
                self.width = self.rows
                self.phase = AFTER
        else:
            if tok != "W":
                raise CodecError(f"expected a new layer, found {tok!r}")
            self.phase, self.weights = WEIGHTS, []

    # groups ---------------------------------------------------------------
    def run(self, elems):
        for e in elems:
            if isinstance(e, str):
                self.feed(e)
            else:
                self.group(e)

    def group(self, g: _Group):
        if self.phase == AFTER and not self.buf:
            width = self.width
            self.out.append([])
            self.run(g.children)
            inner = self.out.pop()
            if self.phase == AFTER and not self.buf and self.width == width and inner:
                if g.count == 1:
                    self.out[-1].extend(inner)
                else:
                    self.out[-1].append(Repeat(tuple(inner), g.count))
                return
            self.out[-1].extend(inner)
            remaining = g.count - 1
        else:
            remaining = g.count
        for _ in range(remaining):
            self.run(g.children)

    def finish(self) -> Network:
        if self.buf:
            self.token()
        else:
            raise CodecError("sequence is empty or ends with a comma")
        if self.phase == S2:
            raise CodecError("no layers")
        if self.phase != AFTER:
            raise CodecError("last layer is incomplete")
        return Network(self.spec, self.out[0], relu_after_last=False)


def decode(seq, *, cap: int = EXPANSION_CAP) -> Network:
    """Rebuild the network described by ``seq``.

    Groups that start and end on layer boundaries with the same width become
    repeat nodes; any other group is expanded in place (at most ``cap``
    symbols are processed). Raises :class:`CodecError` for invalid input.
    """
    if isinstance(seq, str):
        seq = SymbolSeq(seq)
    d = _Decoder(cap)
    d.run(_parse_groups(seq.text))
    return d.finish()


def is_valid(seq) -> bool:
    try:
        decode(seq)
    except CodecError:
        return False
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# lengths and counting

@dataclass(frozen=True)
class DescLen:
    """Measured encoding lengths of one network.

    ``compressed_length`` is a certified upper bound on the description
    length (the shortest valid sequence for the network); ``bound`` is
    ``ceil(c_impl * L^3 * V^2 * log2(2B))`` when program sizes are known.
    """

    raw_length: int
    compressed_length: int
    bound: int | None = None
    c_impl: float | None = None


def description_length_bound(L: int, V: int, B: int, c_impl=DEFAULT_C_IMPL) -> int:
    """``ceil(c_impl * L^3 * V^2 * log2(2B))``."""
    if L < 1 or V < 1:
        raise ValueError("L and V must be positive")
    if B < 2:
        raise ValueError("B must be at least 2")
    c = Fraction(c_impl)
    x = c * L**3 * V**2
    val = x * (1 + Fraction(math.log2(B)))
    est = math.ceil(val)
    # log2(B) is irrational unless B is a power of two; make the ceiling exact
    if B & (B - 1) == 0:
        return math.ceil(x * (1 + (B.bit_length() - 1)))
    return est


def desclen(net: Network, *, L: int | None = None, V: int | None = None, B: int | None = None,
            c_impl=DEFAULT_C_IMPL, runs: bool = True) -> DescLen:
    bound = None
    if L is not None and V is not None and B is not None:
        bound = description_length_bound(L, V, B, c_impl)
    return DescLen(raw_length(net), compressed_length(net, runs=runs), bound, c_impl)


def count_networks_upper(K: int) -> int:
    """Number of symbol strings of length exactly ``K``: an upper bound on the
    number of networks with description length ``K``."""
    if K < 1:
        raise ValueError("K must be positive")
    return ALPHABET_SIZE ** K


def enumerate_strings(max_len: int):
    """All strings over the alphabet of length 1..max_len."""
    import itertools

    for n in range(1, max_len + 1):
        for t in itertools.product(ALPHABET, repeat=n):
            yield "".join(t)
