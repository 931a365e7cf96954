"""Batch evaluation of run-length compressed networks.

The network body is linearised into a small bytecode (apply layer, begin
repeat, end repeat) and executed by a numba kernel on int64 state. Before
every layer the kernel checks that ``gain * max|x| + max|b|`` stays below
2**62; if it would not, evaluation restarts in exact Python integers.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .nn import Layer, Network, Repeat, layers_to_numpy

OP_APPLY, OP_BEGIN, OP_END = 0, 1, 2
LIMIT = float(2**62)
INT64_MAX = 2**63 - 1
PYTHON_FALLBACK_LIMIT = 5_000_000


class _Program:
    """Bytecode plus packed layer tables for one network."""

    def __init__(self, net: Network):
        self.layer_ids: dict[Layer, int] = {}
        self.layers: list[Layer] = []
        ops: list[tuple[int, int, int]] = []
        body = _peel_last(net.body)
        self._emit(body, ops)
        # the last APPLY runs without ReLU unless requested
        for k in range(len(ops) - 1, -1, -1):
            if ops[k][0] == OP_APPLY:
                ops[k] = (OP_APPLY, ops[k][1], int(net.relu_after_last))
                break
        self.ops = np.asarray(ops, dtype=np.int64).reshape(-1, 3)
        self.max_width = max(max(l.n_in, l.n_out) for l in self.layers)
        self.fits = all(l.max_abs <= INT64_MAX // 4 for l in self.layers)
        if self.fits:
            self._pack()

    def _emit(self, body, ops):
        for n in body:
            if isinstance(n, Layer):
                lid = self.layer_ids.setdefault(n, len(self.layers))
                if lid == len(self.layers):
                    self.layers.append(n)
                ops.append((OP_APPLY, lid, 1))
            elif n.count > 0:
                begin = len(ops)
                ops.append((OP_BEGIN, n.count, 0))
                self._emit(n.body, ops)
                ops.append((OP_END, begin, 0))
                ops[begin] = (OP_BEGIN, n.count, len(ops))

    def _pack(self):
        ip, ix, dt, bs = [], [], [], []
        meta = []
        nnz_off = row_off = bias_off = 0
        for l in self.layers:
            indptr, indices, data, bias = layers_to_numpy(l)
            meta.append((row_off, nnz_off, bias_off, l.n_out, l.n_in, l.gain, max((abs(v) for v in l.b), default=0)))
            ip.append(indptr + nnz_off)
            ix.append(indices)
            dt.append(data)
            bs.append(bias)
            nnz_off += len(indices)
            row_off += len(indptr)
            bias_off += len(bias)
        self.indptr = np.concatenate(ip)
        self.indices = np.concatenate(ix) if nnz_off else np.zeros(0, np.int64)
        self.data = np.concatenate(dt) if nnz_off else np.zeros(0, np.int64)
        self.bias = np.concatenate(bs)
        self.meta = np.asarray(meta, dtype=np.float64)
        self.imeta = np.asarray([m[:5] for m in meta], dtype=np.int64)


def _peel_last(body):
    """Unroll the final repetition of a trailing Repeat so the network's last
    layer is a plain APPLY op (it gets no ReLU)."""
    body = list(body)
    while body and isinstance(body[-1], Repeat):
        r = body.pop()
        if r.count == 0:
            continue
        if r.count > 1:
            body.append(Repeat(r.body, r.count - 1))
        body.extend(_peel_last(r.body))
        break
    return tuple(body)


@njit(cache=True)
def _run(ops, indptr, indices, data, bias, imeta, fmeta, X, width0, max_width, track_rows):
    batch = X.shape[1]
    cur = np.zeros((max_width, batch), dtype=np.int64)
    nxt = np.zeros((max_width, batch), dtype=np.int64)
    cur[:width0, :] = X
    width = width0
    curmax = 0
    for r in range(width0):
        for s in range(batch):
            v = abs(X[r, s])
            if v > curmax:
                curmax = v
    tracked = 0
    for r in range(min(track_rows, width0)):
        for s in range(batch):
            if X[r, s] > tracked:
                tracked = X[r, s]
    stack_pc = np.zeros(256, dtype=np.int64)
    stack_rem = np.zeros(256, dtype=np.int64)
    sp = 0
    pc = 0
    n_ops = ops.shape[0]
    while pc < n_ops:
        op = ops[pc, 0]
        if op == 0:
            lid = ops[pc, 1]
            relu = ops[pc, 2]
            if fmeta[lid, 5] * curmax + fmeta[lid, 6] > 4.611686018427388e18:
                return cur, width, tracked, 1
            row_off = imeta[lid, 0]
            b_off = imeta[lid, 2]
            n_out = imeta[lid, 3]
            newmax = 0
            for r in range(n_out):
                lo = indptr[row_off + r]
                hi = indptr[row_off + r + 1]
                bv = bias[b_off + r]
                for s in range(batch):
                    nxt[r, s] = bv
                for k in range(lo, hi):
                    c = indices[k]
                    w = data[k]
                    if w == 1:
                        for s in range(batch):
                            nxt[r, s] += cur[c, s]
                    else:
                        for s in range(batch):
                            nxt[r, s] += w * cur[c, s]
                for s in range(batch):
                    v = nxt[r, s]
                    if relu == 1 and v < 0:
                        v = 0
                        nxt[r, s] = 0
                    if v > newmax:
                        newmax = v
                    elif -v > newmax:
                        newmax = -v
                    if r < track_rows and v > tracked:
                        tracked = v
            tmp = cur
            cur = nxt
            nxt = tmp
            width = n_out
            curmax = newmax
            pc += 1
        elif op == 1:
            count = ops[pc, 1]
            stack_pc[sp] = pc + 1
            stack_rem[sp] = count
            sp += 1
            pc += 1
        else:
            stack_rem[sp - 1] -= 1
            if stack_rem[sp - 1] > 0:
                pc = stack_pc[sp - 1]
            else:
                sp -= 1
                pc += 1
    return cur, width, tracked, 0


def _run_python(prog: _Program, full_inputs, track_rows: int):
    """Exact fallback with Python integers."""
    ops = prog.ops.tolist()
    states = [list(x) for x in full_inputs]
    tracked = 0
    for x in states:
        for v in x[:track_rows]:
            tracked = max(tracked, v)
    stack = []
    pc = 0
    while pc < len(ops):
        op, a, r = ops[pc]
        if op == OP_APPLY:
            layer = prog.layers[a]
            states = [layer.apply(x, relu=bool(r)) for x in states]
            if track_rows:
                for x in states:
                    for v in x[:track_rows]:
                        if v > tracked:
                            tracked = v
            pc += 1
        elif op == OP_BEGIN:
            stack.append([pc + 1, a])
            pc += 1
        else:
            stack[-1][1] -= 1
            if stack[-1][1] > 0:
                pc = stack[-1][0]
            else:
                stack.pop()
                pc += 1
    return states, tracked


_cache: dict[int, tuple[Network, _Program]] = {}


def _program(net: Network) -> _Program:
    hit = _cache.get(id(net))
    if hit is not None and hit[0] is net:
        return hit[1]
    prog = _Program(net)
    if len(_cache) > 64:
        _cache.clear()
    _cache[id(net)] = (net, prog)
    return prog


def evaluate(net: Network, full_inputs, *, track_rows: int = 0, engine: str = "auto"):
    """Evaluate ``net`` on full input vectors; returns (outputs, tracked max)."""
    if not full_inputs:
        return [], 0
    prog = _program(net)
    if engine not in ("auto", "python", "numba"):
        raise ValueError(f"unknown engine {engine!r}")
    use_numba = engine != "python" and prog.fits
    if use_numba:
        try:
            X = np.asarray(full_inputs, dtype=np.int64).T.copy()
        except OverflowError:
            use_numba = False
    if use_numba:
        if X.size and np.abs(X).max() > 2**61:
            use_numba = False
    if use_numba:
        out, width, tracked, status = _run(prog.ops, prog.indptr, prog.indices, prog.data, prog.bias,
                                           prog.imeta, prog.meta, X, X.shape[0], prog.max_width,
                                           track_rows)
        if status == 0:
            res = out[:width, :].T
            return [[int(v) for v in row] for row in res], int(tracked)
        if engine == "numba":
            raise OverflowError("int64 range exceeded")
    if engine == "auto" and net.depth * len(full_inputs) > PYTHON_FALLBACK_LIMIT:
        raise OverflowError(
            f"values leave the int64 range and exact evaluation of {net.depth} layers "
            f"on {len(full_inputs)} inputs would be too slow; use engine='python' to force it")
    return _run_python(prog, full_inputs, track_rows)
