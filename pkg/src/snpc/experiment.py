"""Monte-Carlo generalization experiments with an MDL proxy.

The minimum-description-length interpolator is searched over an explicit
candidate family of compiled programs, optionally extended by correction
networks that hard-code the data points a candidate gets wrong. Test error is
measured exactly, by comparing the winner with the generator on every point
of ``[N]^I``.
"""
from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import corpus
from .bounds import BoundInputs, BoundReport, bound_report
from .codec import SymbolSeq, emit_compressed
from .compiler import CompileOptions, compile_program
from .lang import inline_composite, input_grid, interpret, parse_file
from .nn import Network
from .noise import MODES, SCOPES, CorrectionCost, build_correction_net, corrupt_dataset, corrupt_points


class ExperimentError(ValueError):
    pass


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ExperimentError(f"not a boolean: {v!r}")


def _ints(v) -> tuple[int, ...]:
    if isinstance(v, int):
        return (v,)
    if isinstance(v, str):
        return tuple(int(t) for t in v.replace(",", " ").split())
    return tuple(int(t) for t in v)


def _names(v) -> tuple[str, ...]:
    if isinstance(v, str):
        return tuple(t for t in v.replace(",", " ").split())
    return tuple(v)


@dataclass
class ExperimentConfig:
    """Settings of one experiment; also the keys of the config file.

    ``generator`` and ``candidate_family`` entries are corpus names or paths
    to ``.snp`` files. ``n`` is a list of sample sizes. ``mu`` is
    ``uniform`` or ``weights:PATH`` where each line of the file is
    ``x_1,...,x_I,weight`` and the weights sum to 1.
    """

    generator: str = "prime_corrected"
    N: int = 10
    n: tuple = (10, 50, 100, 200)
    trials: int = 100
    seed: int = 0
    candidate_family: tuple = ("constant0", "constant1", "prime", "prime_corrected")
    mu: str = "uniform"
    rho: Fraction = Fraction(0)
    corrections: bool = False
    mode: str = "value-flip"
    scope: str = "point"
    c3: Fraction = Fraction(1)
    C: Fraction = Fraction(1)
    workers: int = 1

    def __post_init__(self):
        self.N = int(self.N)
        self.n = _ints(self.n)
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        self.candidate_family = _names(self.candidate_family)
        self.rho = Fraction(self.rho).limit_denominator(10**9) if isinstance(self.rho, float) else Fraction(self.rho)
        self.corrections = _bool(self.corrections)
        self.c3 = Fraction(self.c3)
        self.C = Fraction(self.C)
        self.workers = int(self.workers)
        if self.N < 1:
            raise ExperimentError("N must be positive")
        if any(k < 0 for k in self.n):
            raise ExperimentError("sample sizes must be nonnegative")
        if not 0 <= self.rho <= 1:
            raise ExperimentError("rho must lie in [0, 1]")
        if self.mode not in MODES:
            raise ExperimentError(f"mode must be one of {MODES}")
        if self.scope not in SCOPES:
            raise ExperimentError(f"scope must be one of {SCOPES}")
        if not self.candidate_family:
            raise ExperimentError("empty candidate family")
        if self.generator not in self.candidate_family:
            raise ExperimentError("the generator must belong to the candidate family")
        if not (self.mu == "uniform" or self.mu.startswith("weights:")):
            raise ExperimentError("mu must be 'uniform' or 'weights:PATH'")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Read flat ``key = value`` lines; ``#`` starts a comment."""
        known = {f.name for f in fields(cls)}
        kw = {}
        for k, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ExperimentError(f"line {k}: expected 'key = value'")
            key, val = (t.strip() for t in line.split("=", 1))
            if key not in known:
                raise ExperimentError(f"line {k}: unknown key {key!r}")
            kw[key] = val.strip('"').strip("'")
        return cls(**kw)


# ---------------------------------------------------------------------------
# candidates

def load_program(name: str):
    p = Path(name)
    if p.suffix == ".snp" and p.exists():
        return inline_composite(parse_file(p))
    if name in corpus.names():
        return corpus.load(name)
    raise ExperimentError(f"no corpus program or file named {name!r}")


@lru_cache(maxsize=64)
def compiled(name: str, N: int) -> Network:
    """Compiled network of a candidate (cached per process)."""
    net, _ = compile_program(load_program(name), CompileOptions(N))
    return net


@dataclass
class Candidate:
    name: str
    net: Network
    table: dict  # x -> output on [N]^I
    length: int
    cost: CorrectionCost

    @property
    def I(self) -> int:
        return self.net.n_free


@lru_cache(maxsize=64)
def candidate(name: str, N: int) -> Candidate:
    net = compiled(name, N)
    grid = list(input_grid(N, net.n_free))
    table = {tuple(x): v[0] for x, v in zip(grid, net.eval_batch(grid))}
    cost = CorrectionCost(net)
    return Candidate(name, net, table, cost.base_length, cost)


def family(cfg: ExperimentConfig) -> list[Candidate]:
    out = [candidate(n, cfg.N) for n in cfg.candidate_family]
    if len({c.I for c in out}) != 1:
        raise ExperimentError("candidates must share their input arity")
    return out


# ---------------------------------------------------------------------------
# data

def _read_weights(path, I: int, N: int):
    pts, ws = [], []
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [t.strip() for t in line.split(",")]
        if len(parts) != I + 1:
            raise ExperimentError(f"weights line {k}: expected {I} coordinates and a weight")
        try:
            x = tuple(int(t) for t in parts[:I])
            w = Fraction(parts[I])
        except ValueError as e:
            raise ExperimentError(f"weights line {k}: {e}") from None
        if any(not 1 <= v <= N for v in x) or w < 0:
            raise ExperimentError(f"weights line {k}: point outside [{N}]^{I} or negative weight")
        pts.append(x)
        ws.append(w)
    if not pts or sum(ws) != 1:
        raise ExperimentError("weights must sum to 1")
    return pts, np.array([float(w) for w in ws])


def sample_points(cfg: ExperimentConfig, n: int, rng: np.random.Generator, I: int):
    if cfg.mu == "uniform":
        return [tuple(int(v) for v in row) for row in rng.integers(1, cfg.N + 1, size=(n, I))]
    pts, p = _read_weights(cfg.mu.split(":", 1)[1], I, cfg.N)
    idx = rng.choice(len(pts), size=n, p=p / p.sum())
    return [pts[k] for k in idx]


def sample_dataset(cfg: ExperimentConfig, n: int | None = None, *, trial: int = 0):
    """``n`` i.i.d. draws from ``mu`` labelled by the generator.

    The stream is seeded by ``(cfg.seed, trial)``.
    """
    n = cfg.n[0] if n is None else n
    p = load_program(cfg.generator)
    rng = np.random.default_rng([cfg.seed, trial, n])
    xs = sample_points(cfg, n, rng, p.I)
    memo = {}
    out = []
    for x in xs:
        if x not in memo:
            memo[x] = interpret(p, x)
        out.append((x, memo[x]))
    return out


# ---------------------------------------------------------------------------
# search

@dataclass
class SearchResult:
    winner: str
    desc_len: int
    interpolates: bool
    corrections: dict = field(default_factory=dict)
    lengths: dict = field(default_factory=dict)  # candidate -> length of its interpolating variant

    def network(self, N: int) -> Network:
        c = candidate(self.winner, N)
        return build_correction_net(c.net, self.corrections) if self.corrections else c.net

    def predict(self, x, N: int) -> int:
        x = tuple(x)
        if x in self.corrections:
            return self.corrections[x]
        return candidate(self.winner, N).table[x]


def _sequence(c: Candidate, corr: dict) -> SymbolSeq:
    net = build_correction_net(c.net, corr) if corr else c.net
    return emit_compressed(net)


def mdl_proxy_search(data, cfg: ExperimentConfig, cands: list[Candidate] | None = None) -> SearchResult:
    """Shortest network of the family that interpolates ``data``.

    With ``cfg.corrections`` every candidate is also offered with a
    correction net for exactly the points it gets wrong. Ties in length go to
    the lexicographically smaller symbol sequence.
    """
    cands = family(cfg) if cands is None else cands
    labels: dict = {}
    for x, y in data:
        x = tuple(int(v) for v in x)
        if labels.setdefault(x, int(y)) != int(y):
            raise ExperimentError(f"conflicting labels at {x}; no function interpolates the data")
    best = None
    lengths = {}
    for c in cands:
        miss = {}
        for x, y in labels.items():
            v = c.table.get(x)
            if v is None:
                v = c.net.eval(x)[0]
            if v != y:
                miss[x] = y
        if miss and not cfg.corrections:
            continue
        if miss:
            pts = sorted(miss)
            L = c.cost.length(pts, [miss[x] - c.table[x] for x in pts])
        else:
            L = c.length
        lengths[c.name] = L
        entry = (L, c, miss)
        if best is None or L < best[0]:
            best = entry
        elif L == best[0]:
            if _sequence(c, miss).sort_key() < _sequence(best[1], best[2]).sort_key():
                best = entry
    if best is None:
        raise ExperimentError("no candidate interpolates the data and corrections are disabled")
    L, c, miss = best
    return SearchResult(c.name, L, True, miss, lengths)


def test_error(res: SearchResult, cfg: ExperimentConfig) -> Fraction:
    """Exact fraction of ``[N]^I`` where the winner disagrees with the generator."""
    gen = candidate(cfg.generator, cfg.N).table
    bad = sum(res.predict(x, cfg.N) != y for x, y in gen.items())
    return Fraction(bad, len(gen))


# ---------------------------------------------------------------------------
# experiment

@dataclass
class TrialRow:
    trial: int
    n: int
    rho: Fraction
    winner: str
    winner_len: int
    err: Fraction
    corrupted: int = 0


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    report: BoundReport

    def errors(self, n: int) -> list[Fraction]:
        return [r.err for r in self.rows if r.n == n]

    def mean_error(self, n: int) -> float:
        return float(statistics.fmean(self.errors(n)))

    def per_trial_mean(self, ns) -> list[float]:
        """Mean error of each trial over the sample sizes ``ns``."""
        ns = set(ns)
        by = {}
        for r in self.rows:
            if r.n in ns:
                by.setdefault(r.trial, []).append(float(r.err))
        return [statistics.fmean(v) for _, v in sorted(by.items())]

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "n", "rho", "winner_len", "err"])
        for r in self.rows:
            w.writerow([r.trial, r.n, float(r.rho), r.winner_len, float(r.err)])
        return buf.getvalue()

    def table(self) -> str:
        """Mean error (with a 95% normal interval) and winner counts per ``n``."""
        lines = []
        head = f"{'n':>6}  {'mean_err':>9}  {'ci95':>17}  {'zero_frac':>9}  {'avg_bound':>10}  winners"
        lines.append(head)
        g = candidate(self.config.generator, self.config.N)
        p = load_program(self.config.generator)
        for n in self.config.n:
            errs = [float(e) for e in self.errors(n)]
            m = statistics.fmean(errs)
            sd = statistics.stdev(errs) if len(errs) > 1 else 0.0
            h = 1.96 * sd / math.sqrt(len(errs))
            zero = sum(e == 0 for e in errs) / len(errs)
            wins = {}
            for r in self.rows:
                if r.n == n:
                    wins[r.winner] = wins.get(r.winner, 0) + 1
            bound = "-" if n == 0 else f"{float(self.config.C) * p.L**3 * p.V**2 * math.log(max(2, g.net.meta['B'])) / n:.4g}"
            wtxt = " ".join(f"{k}:{v}" for k, v in sorted(wins.items()))
            lines.append(f"{n:>6}  {m:>9.4f}  [{max(0, m - h):.4f}, {m + h:.4f}]  {zero:>9.2f}  {bound:>10}  {wtxt}")
        lines.append("")
        lines.append(self.report.table())
        return "\n".join(lines)


def _stream_seed(*key) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


def _trial(cfg: ExperimentConfig, t: int) -> list[TrialRow]:
    cands = family(cfg)
    B = max(c.table[x] for c in cands for x in c.table)
    rows = []
    for n in cfg.n:
        clean = sample_dataset(cfg, n, trial=t)
        corrupted = 0
        data = clean
        if cfg.rho > 0:
            fn = corrupt_points if cfg.scope == "point" else corrupt_dataset
            ds = fn(clean, cfg.rho, cfg.mode, max(1, B), seed=_stream_seed(cfg.seed, t, n))
            data = ds.noisy()
            corrupted = len(ds.corrupted)
        res = mdl_proxy_search(data, cfg, cands)
        rows.append(TrialRow(t, n, cfg.rho, res.winner, res.desc_len, test_error(res, cfg), corrupted))
    return rows


def _trials(args):
    cfg, ts = args
    return [r for t in ts for r in _trial(cfg, t)]


def run_generalization_experiment(cfg: ExperimentConfig, rho=None) -> ExperimentResult:
    """Run ``cfg.trials`` seeded trials at every sample size in ``cfg.n``.

    ``rho`` overrides ``cfg.rho``. Rows are ordered by trial then ``n``
    regardless of ``cfg.workers``.
    """
    if rho is not None:
        cfg = ExperimentConfig(**{f.name: getattr(cfg, f.name) for f in fields(cfg)} | {"rho": rho})
    family(cfg)  # compile once up front
    ts = list(range(cfg.trials))
    if cfg.workers > 1 and cfg.trials > 1:
        chunks = [ts[k::cfg.workers] for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as ex:
            rows = [r for part in ex.map(_trials, [(cfg, c) for c in chunks]) for r in part]
        rows.sort(key=lambda r: (r.trial, cfg.n.index(r.n)))
    else:
        rows = _trials((cfg, ts))
    g = candidate(cfg.generator, cfg.N)
    p = load_program(cfg.generator)
    b = BoundInputs(L=p.L, V=p.V, B=max(2, g.net.meta["B"]), I=p.I, N=cfg.N, n=max(1, max(cfg.n)),
                    eps=Fraction(1, 10), delta=Fraction(1, 20), rho=cfg.rho, c3=cfg.c3)
    rep = bound_report(b, C=cfg.C)
    rep.notes["family"] = ",".join(cfg.candidate_family)
    rep.notes["generator"] = cfg.generator
    rep.notes["corruption"] = f"{cfg.mode}/{cfg.scope}" if cfg.rho else "none"
    return ExperimentResult(cfg, rows, rep)
