"""Integer-weight feedforward ReLU networks.

A :class:`Network` is a sequence of affine :class:`Layer` objects with ReLU
between them. Long runs of identical layer blocks are stored once inside a
:class:`Repeat` node, so a loop unrolled a million times costs one block of
memory; ``net.layers`` gives the flattened sequence lazily.
"""
from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Union

import numpy as np


@dataclass(frozen=True, eq=True)
class Layer:
    """Affine map ``x -> W x + b`` with exact integer entries.

    ``W`` is stored densely as a tuple of rows; the evaluation engine works
    from a sparse row-compressed copy built on first use.
    """

    W: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]
    n_in: int = field(default=-1)

    def __post_init__(self):
        W = tuple(tuple(int(v) for v in row) for row in self.W)
        b = tuple(int(v) for v in self.b)
        n_in = self.n_in
        if W:
            widths = {len(r) for r in W}
            if len(widths) != 1:
                raise ValueError("ragged weight matrix")
            w = widths.pop()
            if n_in not in (-1, w):
                raise ValueError("n_in does not match weight matrix")
            n_in = w
        if len(b) != len(W):
            raise ValueError(f"bias length {len(b)} != row count {len(W)}")
        if not W:
            raise ValueError("layer must have at least one output")
        if n_in < 1:
            raise ValueError("layer must have at least one input")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n_in", n_in)

    @classmethod
    def from_rows(cls, rows, b, n_in: int) -> "Layer":
        """Build from sparse rows: each row is a ``{col: coeff}`` mapping."""
        W = []
        for r in rows:
            dense = [0] * n_in
            for c, v in r.items():
                dense[c] += v
            W.append(tuple(dense))
        return cls(tuple(W), tuple(b), n_in)

    @classmethod
    def identity(cls, n: int) -> "Layer":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), (0,) * n, n)

    @property
    def n_out(self) -> int:
        return len(self.W)

    @cached_property
    def _hash(self) -> int:
        return hash((self.W, self.b))

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def sparse_rows(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(tuple((c, v) for c, v in enumerate(r) if v) for r in self.W)

    @cached_property
    def max_abs(self) -> int:
        return max(max((abs(v) for r in self.W for v in r), default=0), max((abs(v) for v in self.b), default=0))

    @cached_property
    def gain(self) -> int:
        """Largest row 1-norm; bounds how much the layer can grow values."""
        return max(sum(abs(v) for v in r) for r in self.W)

    def apply(self, x, relu: bool = True) -> list[int]:
        """Exact evaluation on one vector of Python ints."""
        out = []
        for row, bias in zip(self.sparse_rows, self.b):
            s = bias
            for c, v in row:
                s += v * x[c]
            out.append(s if not relu or s > 0 else 0)
        return out

    def dump(self) -> str:
        entries = " ".join(str(v) for r in self.W for v in r)
        return f"W {self.n_out} {self.n_in}: {entries}; B: {' '.join(map(str, self.b))}"


@dataclass(frozen=True)
class Repeat:
    """``count`` consecutive copies of ``body`` (layers or nested repeats)."""

    body: tuple["Node", ...]
    count: int

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if self.count < 0:
            raise ValueError("repeat count must be nonnegative")
        if not self.body:
            raise ValueError("empty repeat body")

    @cached_property
    def _hash(self) -> int:
        return hash((self.body, self.count))

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def n_layers(self) -> int:
        return self.count * body_length(self.body)


Node = Union[Layer, Repeat]


def body_length(body) -> int:
    return sum(1 if isinstance(n, Layer) else n.n_layers for n in body)


def iter_layers(body) -> Iterator[Layer]:
    for n in body:
        if isinstance(n, Layer):
            yield n
        else:
            for _ in range(n.count):
                yield from iter_layers(n.body)


def _width_check(body, w: int, where="network") -> int:
    for n in body:
        if isinstance(n, Layer):
            if n.n_in != w:
                raise ValueError(f"{where}: layer expects width {n.n_in}, got {w}")
            w = n.n_out
        else:
            w2 = _width_check(n.body, w, "repeat body")
            if w2 != w and n.count > 1:
                raise ValueError("repeat body must map a width to itself")
            w = w2 if n.count else w
    return w


def _unique_layers(body, mult: int, acc: dict):
    for n in body:
        if isinstance(n, Layer):
            acc[n] = acc.get(n, 0) + mult
        elif n.count:
            _unique_layers(n.body, mult * n.count, acc)
    return acc


class LayerView(Sequence):
    """Read-only flattened view of a network's layers."""

    def __init__(self, body):
        self._body = body
        self._len = body_length(body)

    def __len__(self):
        return self._len

    def __iter__(self):
        return iter_layers(self._body)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(self._len))]
        if k < 0:
            k += self._len
        if not 0 <= k < self._len:
            raise IndexError(k)
        body = self._body
        while True:
            for n in body:
                size = 1 if isinstance(n, Layer) else n.n_layers
                if k < size:
                    if isinstance(n, Layer):
                        return n
                    k %= body_length(n.body)
                    body = n.body
                    break
                k -= size


@dataclass(frozen=True)
class NetStats:
    depth: int
    max_width: int
    max_abs_param: int
    param_count: int


FREE = None


class Network:
    """Feedforward ReLU network with exact integer parameters.

    Parameters
    ----------
    input_spec : sequence of (int or None)
        One entry per input coordinate: ``None`` marks a free input, an
        integer fixes the coordinate to that value.
    body : sequence of Layer or Repeat
        The layers, possibly run-length compressed.
    relu_after_last : bool
        Whether the final layer is followed by a ReLU.
    """

    def __init__(self, input_spec, body, relu_after_last: bool = False):
        self.input_spec = tuple(None if v is None else int(v) for v in input_spec)
        self.body = tuple(body)
        self.relu_after_last = bool(relu_after_last)
        if not self.input_spec:
            raise ValueError("network needs at least one input coordinate")
        if any(v is not None and v < 0 for v in self.input_spec):
            raise ValueError("fixed inputs must be nonnegative")
        if body_length(self.body) == 0:
            raise ValueError("network must have at least one layer")
        self.out_width = _width_check(self.body, len(self.input_spec))

    # structure -------------------------------------------------------
    @property
    def layers(self) -> LayerView:
        return LayerView(self.body)

    @property
    def depth(self) -> int:
        return body_length(self.body)

    @property
    def in_width(self) -> int:
        return len(self.input_spec)

    @property
    def n_free(self) -> int:
        return sum(v is None for v in self.input_spec)

    def unique_layers(self) -> dict[Layer, int]:
        """Distinct layers mapped to how often each occurs when flattened."""
        return _unique_layers(self.body, 1, {})

    def stats(self) -> NetStats:
        uniq = self.unique_layers()
        return NetStats(
            depth=self.depth,
            max_width=max(max(l.n_in, l.n_out) for l in uniq),
            max_abs_param=max(l.max_abs for l in uniq),
            param_count=sum(m * l.n_out * (l.n_in + 1) for l, m in uniq.items()),
        )

    def full_input(self, x) -> list[int]:
        x = [int(v) for v in x]
        if len(x) != self.n_free:
            raise ValueError(f"expected {self.n_free} free inputs, got {len(x)}")
        it = iter(x)
        return [next(it) if v is None else v for v in self.input_spec]

    # evaluation ------------------------------------------------------
    def eval(self, x) -> list[int]:
        """Exact output on one vector of free inputs."""
        return self.eval_batch([x])[0]

    def eval_batch(self, X, *, track_rows: int = 0, engine: str = "auto"):
        """Evaluate on many inputs at once; returns a list of int lists.

        ``track_rows`` > 0 additionally records the largest value seen in the
        first ``track_rows`` coordinates after any layer; it is then returned
        as a second value.
        """
        from . import _engine

        full = [self.full_input(x) for x in X]
        out, tracked = _engine.evaluate(self, full, track_rows=track_rows, engine=engine)
        return (out, tracked) if track_rows else out

    def __call__(self, x):
        return self.eval(x)

    # equality --------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        if (self.input_spec, self.relu_after_last) != (other.input_spec, other.relu_after_last):
            return False
        if self.body == other.body:
            return True
        if self.depth != other.depth:
            return False
        return all(a == b for a, b in zip(iter_layers(self.body), iter_layers(other.body)))

    def __hash__(self):
        return hash((self.input_spec, self.depth, self.relu_after_last))

    def __repr__(self):
        return f"Network(inputs={len(self.input_spec)}, free={self.n_free}, depth={self.depth}, out={self.out_width})"

    def dump(self) -> str:
        """One line per (flattened) layer, for debugging small networks."""
        return "\n".join(l.dump() for l in self.layers)


def compose(f: Network, g: Network) -> Network:
    """Network computing ``g(relu(f(x)))``: f's layers followed by g's.

    Equal to ``g o f`` whenever f's outputs are nonnegative, which holds for
    every compiled program.
    """
    if any(v is not None for v in g.input_spec):
        raise ValueError("second network may not have fixed inputs")
    if f.out_width != g.in_width:
        raise ValueError(f"width mismatch: {f.out_width} outputs vs {g.in_width} inputs")
    return Network(f.input_spec, f.body + g.body, g.relu_after_last)


def identity_network(n: int) -> Network:
    return Network([None] * n, [Layer.identity(n)])


def layers_to_numpy(layer: Layer):
    """Row-compressed int64 arrays (indptr, indices, data, bias)."""
    indptr = [0]
    indices, data = [], []
    for row in layer.sparse_rows:
        for c, v in row:
            indices.append(c)
            data.append(v)
        indptr.append(len(indices))
    return (np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
            np.asarray(data, dtype=np.int64), np.asarray(layer.b, dtype=np.int64))


def flatten(body) -> list[Layer]:
    return list(iter_layers(body))


def chain(*bodies):
    return tuple(itertools.chain(*bodies))
