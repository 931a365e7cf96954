"""Correction networks for corrupted labels, and label-corruption models.

:func:`build_correction_net` takes a network ``F`` and a finite table of
overrides ``E`` and returns a network that equals ``E[x]`` on the keys of
``E`` and ``F(x)`` everywhere else. It threads the raw input alongside ``F``
and appends five layers:

1. ``relu(x_i - e_i + 1)``, ``relu(x_i - e_i - 1)``, ``relu(x_i - e_i)`` for
   every override point ``e`` and coordinate ``i``;
2. ``1{x_i = e_i}`` from those three terms;
3. ``relu(s_e - I + 1)`` and ``relu(s_e - I)`` where ``s_e`` counts the
   matching coordinates;
4. ``P = sum_e d+_e 1{x = e}`` and ``M = sum_e d-_e 1{x = e}``, the positive
   and negative parts of the corrections ``d_e = E[e] - F(e)``;
5. the output ``y + P - M`` (no ReLU).
"""
from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .nn import Layer, Network, Repeat

APPENDED_LAYERS = 5
WIDTH_FACTOR = 4  # appended widths are at most WIDTH_FACTOR * I * |E|
MODES = ("arbitrary-adversarial", "value-flip", "fixed-seed-random")
SCOPES = ("index", "point")


class CorrectionError(ValueError):
    pass


@dataclass
class CorrectionSet:
    """Overrides ``x -> value`` on points of ``[N]^I``."""

    entries: dict
    N: int | None = None
    B: int | None = None

    def __post_init__(self):
        self.entries = {tuple(int(v) for v in k): int(y) for k, y in dict(self.entries).items()}
        I = {len(k) for k in self.entries}
        if len(I) > 1:
            raise CorrectionError("points of different dimension")
        for k, y in self.entries.items():
            if self.N is not None and any(not 1 <= v <= self.N for v in k):
                raise CorrectionError(f"point {k} is outside [{self.N}]^{len(k)}")
            if y < 0 or (self.B is not None and y > self.B):
                raise CorrectionError(f"value {y} at {k} is outside [0, {self.B}]")

    def __len__(self):
        return len(self.entries)


def _peel_first(body):
    """Body whose first node is a plain layer."""
    body = list(body)
    while body and isinstance(body[0], Repeat):
        r = body.pop(0)
        if r.count == 0:
            continue
        rest = [Repeat(r.body, r.count - 1)] if r.count > 1 else []
        body = list(_peel_first(r.body)) + rest + body
        break
    return tuple(body)


class _Threader:
    """Widen every layer by ``extra`` identity rows (memoised so repeated
    blocks stay shared)."""

    def __init__(self, extra: int):
        self.extra = extra
        self.memo: dict = {}

    def __call__(self, node):
        hit = self.memo.get(node)
        if hit is not None:
            return hit
        k = self.extra
        if isinstance(node, Layer):
            W = [row + (0,) * k for row in node.W]
            for j in range(k):
                W.append((0,) * node.n_in + tuple(int(j == t) for t in range(k)))
            out = Layer(tuple(W), node.b + (0,) * k, node.n_in + k)
        else:
            out = Repeat(tuple(self(n) for n in node.body), node.count)
        self.memo[node] = out
        return out


def thread_inputs(F: Network) -> Network:
    """Network computing ``[F(x), x_free...]`` (the free inputs carried along)."""
    free = [k for k, v in enumerate(F.input_spec) if v is None]
    I = len(free)
    body = _peel_first(F.body)
    first = body[0]
    W = list(first.W) + [tuple(int(c == f) for c in range(first.n_in)) for f in free]
    head = Layer(tuple(W), first.b + (0,) * I, first.n_in)
    t = _Threader(I)
    rest = tuple(t(n) for n in body[1:])
    return Network(F.input_spec, (head,) + rest, relu_after_last=False)


def correction_layers(points, deltas, I: int) -> tuple[Layer, ...]:
    """The five layers mapping ``[y, x_1..x_I]`` to the corrected output."""
    E = len(points)
    # 1: per (point, coordinate) the three ReLU terms of the equality gadget
    rows, bias = [{0: 1}], [0]
    for e in points:
        for i in range(I):
            for off in (1, -1, 0):
                rows.append({1 + i: 1})
                bias.append(off - e[i])
    A1 = Layer.from_rows(rows, bias, 1 + I)
    # 2: 1{x_i = e_i}
    rows = [{0: 1}]
    for t in range(E * I):
        base = 1 + 3 * t
        rows.append({base: 1, base + 1: 1, base + 2: -2})
    A2 = Layer.from_rows(rows, [0] * len(rows), 1 + 3 * E * I)
    # 3: relu(s - I + 1), relu(s - I) with s the number of matching coordinates
    rows, bias = [{0: 1}], [0]
    for k in range(E):
        s = {1 + k * I + i: 1 for i in range(I)}
        rows += [dict(s), dict(s)]
        bias += [1 - I, -I]
    A3 = Layer.from_rows(rows, bias, 1 + E * I)
    # 4: positive and negative parts of the correction
    pos, neg = {}, {}
    for k, d in enumerate(deltas):
        tgt = pos if d > 0 else neg
        if d:
            tgt[1 + 2 * k] = abs(d)
            tgt[2 + 2 * k] = -abs(d)
    A4 = Layer.from_rows([{0: 1}, pos, neg], [0, 0, 0], 1 + 2 * E)
    # 5: y + P - M
    A5 = Layer.from_rows([{0: 1, 1: 1, 2: -1}], [0], 3)
    return (A1, A2, A3, A4, A5)


def build_correction_net(F: Network, E, N: int | None = None, I: int | None = None,
                         B: int | None = None, *, base_values=None) -> Network:
    """Network equal to ``E[x]`` on the keys of ``E`` and to ``F`` elsewhere.

    ``base_values`` may supply ``F`` on the keys (saves evaluating ``F``).
    An empty ``E`` returns ``F`` itself.
    """
    if not isinstance(E, CorrectionSet):
        E = CorrectionSet(E, N, B)
    elif N is not None or B is not None:
        E = CorrectionSet(E.entries, N if N is not None else E.N, B if B is not None else E.B)
    if not E.entries:
        return F
    if F.out_width != 1:
        raise CorrectionError("base network must have a single output")
    I = F.n_free if I is None else I
    if I != F.n_free:
        raise CorrectionError(f"network has {F.n_free} free inputs, not {I}")
    points = sorted(E.entries)
    if any(len(k) != I for k in points):
        raise CorrectionError(f"override points must have {I} coordinates")
    if base_values is None:
        base_values = [v[0] for v in F.eval_batch(points)]
    else:
        base_values = [int(base_values[k]) for k in points]
    if any(v < 0 for v in base_values):
        raise CorrectionError("base network produced a negative value")
    deltas = [E.entries[k] - v for k, v in zip(points, base_values)]
    threaded = thread_inputs(F)
    net = Network(F.input_spec, threaded.body + correction_layers(points, deltas, I), relu_after_last=False)
    return net


class CorrectionCost:
    """Compressed length of ``build_correction_net(F, E)`` for many ``E``.

    The threaded copy of ``F`` is measured once; each query only measures
    the five appended layers.
    """

    def __init__(self, F: Network, runs: bool = True):
        from .codec import _Emitter, _s2_items, compressed_length

        self.F = F
        self.I = F.n_free
        self.base_length = compressed_length(F, runs=runs)
        self._em = _Emitter(runs)
        threaded = thread_inputs(F)
        s2 = sum(len(t) for t in _s2_items(threaded)) + len(threaded.input_spec)
        # the threaded body is followed by plain layers, so it is not peeled
        self._prefix = s2 + self._em.body_len(threaded.body)

    def length(self, points, deltas) -> int:
        """Length with overrides at ``points`` shifting ``F`` by ``deltas``."""
        if not len(points):
            return self.base_length
        layers = correction_layers(points, deltas, self.I)
        return self._prefix + sum(len(self._em.layer(l)) + 1 for l in layers) - 1


# ---------------------------------------------------------------------------
# datasets

@dataclass
class CorruptedDataset:
    points: list  # (x, y_clean, y_corrupt)
    rho: Fraction
    corrupted: list = field(default_factory=list)  # indices whose label changed

    @property
    def n(self) -> int:
        return len(self.points)

    def clean(self):
        return [(x, y) for x, y, _ in self.points]

    def noisy(self):
        return [(x, z) for x, _, z in self.points]


def _flip(y: int, B: int) -> int:
    return 1 - y if B == 1 else B - y


def corrupt_dataset(clean, rho, mode: str = "fixed-seed-random", B: int = 1, seed: int = 0) -> CorruptedDataset:
    """Replace exactly ``floor(rho * n)`` labels.

    ``value-flip`` maps a label ``y`` to ``1 - y`` when labels are binary
    (``B == 1``) and to ``B - y`` otherwise; ``fixed-seed-random`` picks the
    indices and new (different) labels from ``random.Random(seed)``;
    ``arbitrary-adversarial`` sets the labels of the lexicographically first
    points to ``B``.
    """
    rho = Fraction(rho).limit_denominator(10**9) if not isinstance(rho, Fraction) else rho
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    clean = [(tuple(int(v) for v in x), int(y)) for x, y in clean]
    n = len(clean)
    m = math.floor(rho * n)
    rng = random.Random(seed)
    if mode == "arbitrary-adversarial":
        idx = sorted(range(n), key=lambda k: (clean[k][0], k))[:m]
    else:
        idx = sorted(rng.sample(range(n), m))
    labels = [y for _, y in clean]
    for k in idx:
        y = labels[k]
        if mode == "value-flip":
            labels[k] = _flip(y, B)
        elif mode == "arbitrary-adversarial":
            labels[k] = B
        else:
            choices = [v for v in range(B + 1) if v != y] or [y]
            labels[k] = rng.choice(choices)
    pts = [(x, y, z) for (x, y), z in zip(clean, labels)]
    return CorruptedDataset(pts, rho, idx)


def corrupt_points(clean, rho, mode: str = "fixed-seed-random", B: int = 1, seed: int = 0) -> CorruptedDataset:
    """Corrupt whole points of the domain rather than single samples.

    Distinct observed points are visited in a seeded random order and a point
    is corrupted (at every one of its occurrences, with one shared new label)
    while the number of changed samples stays at most ``floor(rho * n)``. The
    corrupted labels are therefore consistent, so the data stays
    interpolable. ``mode`` chooses the new label as in :func:`corrupt_dataset`;
    ``arbitrary-adversarial`` visits points in lexicographic order.
    """
    rho = Fraction(rho).limit_denominator(10**9) if not isinstance(rho, Fraction) else rho
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    clean = [(tuple(int(v) for v in x), int(y)) for x, y in clean]
    n = len(clean)
    budget = math.floor(rho * n)
    occ: dict = {}
    for k, (x, _) in enumerate(clean):
        occ.setdefault(x, []).append(k)
    for x, ks in occ.items():
        if len({clean[k][1] for k in ks}) > 1:
            raise ValueError(f"clean labels disagree at {x}")
    rng = random.Random(seed)
    order = sorted(occ)
    if mode != "arbitrary-adversarial":
        rng.shuffle(order)
    labels = [y for _, y in clean]
    idx = []
    for x in order:
        ks = occ[x]
        if len(ks) > budget:
            continue
        y = labels[ks[0]]
        if mode == "value-flip":
            z = _flip(y, B)
        elif mode == "arbitrary-adversarial":
            z = B
        else:
            choices = [v for v in range(B + 1) if v != y] or [y]
            z = rng.choice(choices)
        if z == y:
            continue
        for k in ks:
            labels[k] = z
        idx += ks
        budget -= len(ks)
    pts = [(x, y, z) for (x, y), z in zip(clean, labels)]
    return CorruptedDataset(pts, rho, sorted(idx))


def write_dataset(path, ds: CorruptedDataset):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for x, y, z in ds.points:
            w.writerow(list(x) + [y, z])


def read_labelled(path):
    """Rows of integers; returns a list of lists."""
    out = []
    for row in csv.reader(Path(path).read_text().splitlines()):
        if not row or row[0].lstrip().startswith("#"):
            continue
        out.append([int(v) for v in row])
    return out


def read_dataset(path, I: int | None = None):
    """Read ``x..., y`` or ``x..., y_clean, y_corrupt`` rows.

    Without ``I`` the last column is taken as the label and the rest as the
    point.
    """
    rows = read_labelled(path)
    if I is None:
        return [(tuple(r[:-1]), r[-1]) for r in rows]
    return [(tuple(r[:I]), r[I]) for r in rows]


def read_corrections(path) -> dict:
    return {tuple(r[:-1]): r[-1] for r in read_labelled(path)}
