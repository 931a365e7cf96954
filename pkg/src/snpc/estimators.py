"""scikit-learn style wrappers around compiled programs and the MDL proxy."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .compiler import CompileOptions, compile_program
from .experiment import ExperimentConfig, family, load_program, mdl_proxy_search
from .lang import Program


def _int_array(X):
    X = check_array(X, dtype=np.int64)
    return X


class CompiledProgram(BaseEstimator):
    """A program compiled to a ReLU network, used as a fixed predictor.

    Parameters
    ----------
    program : str or Program
        Corpus name, path to a ``.snp`` file, or a parsed atomic program.
    N : int
        Inputs are assumed to lie in ``{1..N}``.
    B : int, optional
        Runtime bound; measured when omitted.
    write_back_bound : int or "auto"
        See :class:`snpc.compiler.CompileOptions`.

    ``fit`` ignores ``y``; it compiles the program and checks the input
    width.
    """

    def __init__(self, program="prime_corrected", N=10, B=None, write_back_bound="auto"):
        self.program = program
        self.N = N
        self.B = B
        self.write_back_bound = write_back_bound

    def fit(self, X, y=None):
        X = _int_array(X)
        p = self.program if isinstance(self.program, Program) else load_program(self.program)
        if X.shape[1] != p.I:
            raise ValueError(f"program takes {p.I} inputs, X has {X.shape[1]} columns")
        self.net_, self.rc_ = compile_program(p, CompileOptions(self.N, self.B, self.write_back_bound))
        self.B_ = self.net_.meta["B"]
        self.n_features_in_ = p.I
        return self

    def predict(self, X):
        check_is_fitted(self, "net_")
        X = _int_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = self.net_.eval_batch(X.tolist())
        return np.array([v[0] for v in out], dtype=object if self.B_ > 2**62 else np.int64)

    def score(self, X, y):
        """Fraction of exact matches."""
        return float(np.mean(self.predict(X) == np.asarray(y)))


class MDLInterpolator(BaseEstimator):
    """Shortest interpolating network over a family of compiled programs.

    Parameters
    ----------
    candidates : sequence of str
        Corpus names or ``.snp`` paths.
    N : int
        Input range the candidates are compiled for.
    corrections : bool
        Also consider every candidate extended by a correction net for the
        training points it gets wrong.
    """

    def __init__(self, candidates=("constant0", "constant1", "prime", "prime_corrected"), N=10,
                 corrections=False):
        self.candidates = candidates
        self.N = N
        self.corrections = corrections

    def _config(self):
        cands = tuple(self.candidates)
        return ExperimentConfig(generator=cands[0], N=self.N, candidate_family=cands,
                                corrections=self.corrections, n=(0,), trials=1)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.int64, y_numeric=True)
        cfg = self._config()
        fam = family(cfg)
        if X.shape[1] != fam[0].I:
            raise ValueError(f"candidates take {fam[0].I} inputs, X has {X.shape[1]} columns")
        data = [(tuple(int(v) for v in x), int(t)) for x, t in zip(X, y)]
        res = mdl_proxy_search(data, cfg, fam)
        self.result_ = res
        self.winner_ = res.winner
        self.desc_len_ = res.desc_len
        self.corrections_ = dict(res.corrections)
        self.lengths_ = dict(res.lengths)
        self.n_features_in_ = X.shape[1]
        return self

    def network(self):
        check_is_fitted(self, "result_")
        return self.result_.network(self.N)

    def predict(self, X):
        check_is_fitted(self, "result_")
        X = _int_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = []
        for x in X.tolist():
            x = tuple(x)
            if all(1 <= v <= self.N for v in x):
                out.append(self.result_.predict(x, self.N))
            else:
                out.append(self.network().eval(x)[0])
        return np.array(out, dtype=np.int64)

    def score(self, X, y):
        return float(np.mean(self.predict(X) == np.asarray(y)))
