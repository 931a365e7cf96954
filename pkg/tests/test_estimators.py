import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from snpc import corpus
from snpc.estimators import CompiledProgram, MDLInterpolator


def test_compiled_program_predicts_products():
    X = np.array([[a, b] for a in range(1, 5) for b in range(1, 5)])
    est = CompiledProgram("multiply", N=4).fit(X)
    assert (est.predict(X) == X[:, 0] * X[:, 1]).all()
    assert est.score(X, X[:, 0] * X[:, 1]) == 1.0
    assert est.n_features_in_ == 2 and est.B_ >= 16


def test_compiled_program_accepts_parsed_program():
    est = CompiledProgram(corpus.load("fibonacci"), N=6).fit([[1]])
    assert est.predict([[1], [2], [6]]).tolist() == [1, 1, 8]


def test_compiled_program_errors():
    with pytest.raises(NotFittedError):
        CompiledProgram("multiply", N=4).predict([[1, 1]])
    with pytest.raises(ValueError):
        CompiledProgram("multiply", N=4).fit([[1]])
    est = CompiledProgram("multiply", N=4).fit([[1, 1]])
    with pytest.raises(ValueError):
        est.predict([[1, 1, 1]])


def test_params_roundtrip():
    est = MDLInterpolator(N=10, corrections=True)
    assert clone(est).get_params() == est.get_params()
    assert CompiledProgram().get_params()["write_back_bound"] == "auto"


def test_mdl_interpolator():
    X = np.arange(1, 11).reshape(-1, 1)
    y = np.array([1, 1, 1, 0, 1, 0, 1, 0, 0, 0])
    est = MDLInterpolator(N=10).fit(X, y)
    assert est.winner_ == "prime_corrected" and est.corrections_ == {}
    assert est.score(X, y) == 1.0
    assert est.desc_len_ == min(est.lengths_.values())


def test_mdl_interpolator_with_corrections():
    X = np.array([[2], [4], [9]])
    y = np.array([1, 0, 0])
    est = MDLInterpolator(N=10, corrections=True).fit(X, y)
    assert est.winner_ == "constant0" and est.corrections_ == {(2,): 1}
    assert est.predict(X).tolist() == [1, 0, 0]
    assert est.network().eval([2]) == [1]
    with pytest.raises(ValueError):
        MDLInterpolator(N=10).fit([[2], [2]], [0, 1])
