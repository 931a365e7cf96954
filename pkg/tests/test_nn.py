import random

import pytest

from snpc.nn import Layer, Network, Repeat, compose, identity_network


def example_net():
    # two layers on [x, 1]: W1 = [[1,1],[1,1]], b1 = [5,5]; W2 = [[3,1]], b2 = [2]
    return Network([None, 1], [Layer(((1, 1), (1, 1)), (5, 5)), Layer(((3, 1),), (2,))])


def test_layer_validation():
    with pytest.raises(ValueError):
        Layer(((1, 2), (3,)), (0, 0))
    with pytest.raises(ValueError):
        Layer(((1,),), (0, 0))
    with pytest.raises(ValueError):
        Layer((), ())


def test_layer_apply_and_helpers():
    l = Layer.from_rows([{0: 2, 1: -1}, {1: 3}], [1, -10], 2)
    assert l.W == ((2, -1), (0, 3))
    assert l.apply([4, 2]) == [7, 0]
    assert l.apply([4, 2], relu=False) == [7, -4]
    assert l.max_abs == 10 and l.gain == 3
    assert Layer.identity(3).apply([1, 2, 3]) == [1, 2, 3]
    assert l.dump() == "W 2 2: 2 -1 0 3; B: 1 -10"


def test_example_network_values():
    net = example_net()
    for x in range(1, 6):
        assert net.eval([x]) == [3 * (x + 6) + (x + 6) + 2]


def test_repeat_flattening_and_views():
    a = Layer.identity(2)
    b = Layer(((1, 0), (1, 1)), (0, 0))
    net = Network([None, None], [a, Repeat((b, a), 3), b])
    assert net.depth == 1 + 6 + 1
    flat = list(net.layers)
    assert flat == [a, b, a, b, a, b, a, b]
    assert net.layers[3] == b and net.layers[-1] == b
    assert net.layers[1:4] == [b, a, b]
    assert net.unique_layers() == {a: 4, b: 4}
    st = net.stats()
    assert st.depth == 8 and st.max_width == 2


def test_network_equality_ignores_compression():
    a = Layer.identity(2)
    b = Layer(((1, 0), (1, 1)), (0, 0))
    n1 = Network([None, None], [Repeat((a, b), 2)])
    n2 = Network([None, None], [a, b, a, b])
    assert n1 == n2
    assert n1 != Network([None, None], [a, b, a])


def test_width_mismatch_rejected():
    with pytest.raises(ValueError):
        Network([None], [Layer(((1, 1),), (0,))])
    with pytest.raises(ValueError):
        Network([None, None], [Repeat((Layer(((1, 1),), (0,)),), 2)])


def test_fixed_inputs_and_arity():
    net = example_net()
    assert net.n_free == 1 and net.full_input([7]) == [7, 1]
    with pytest.raises(ValueError):
        net.eval([1, 2])


def test_engines_agree_on_random_networks():
    rng = random.Random(5)
    for _ in range(40):
        w = w0 = rng.randint(1, 4)
        body = []
        for _ in range(rng.randint(1, 4)):
            w2 = rng.randint(1, 4)
            lay = Layer(tuple(tuple(rng.randint(-3, 3) for _ in range(w)) for _ in range(w2)),
                        tuple(rng.randint(-3, 3) for _ in range(w2)))
            body.append(Repeat((lay,), 1) if w2 == w and rng.random() < 0.3 else lay)
            w = w2
        net = Network([None] * w0, body)
        X = [[rng.randint(0, 9) for _ in range(net.in_width)] for _ in range(5)]
        assert net.eval_batch(X, engine="numba") == net.eval_batch(X, engine="python")


def test_last_layer_has_no_relu():
    net = Network([None], [Layer(((1,),), (-5,))])
    assert net.eval([2]) == [-3]
    assert Network([None], [Layer(((1,),), (-5,))], relu_after_last=True).eval([2]) == [0]
    rep = Network([None], [Repeat((Layer(((1,),), (-5,)),), 2)])
    assert rep.eval([12]) == [2]
    assert rep.eval([3]) == [-5]  # relu(3 - 5) = 0, then 0 - 5


def test_overflow_falls_back_to_exact_integers():
    doubling = Layer(((2,),), (0,))
    net = Network([None], [Repeat((doubling,), 80)])
    assert net.eval([3]) == [3 * 2**80]
    with pytest.raises(OverflowError):
        net.eval_batch([[3]], engine="numba")


def test_track_rows_reports_running_maximum():
    up = Layer(((1,), ), (10,))
    down = Layer(((1,),), (-10,))
    net = Network([None], [up, up, down, down])
    out, seen = net.eval_batch([[1]], track_rows=1)
    assert out == [[1]] and seen == 21


def test_compose_and_identity():
    f = example_net()
    g = Network([None], [Layer(((2,),), (1,))])
    h = compose(f, g)
    assert h.eval([3]) == [2 * f.eval([3])[0] + 1]
    assert identity_network(3).eval([1, 2, 3]) == [1, 2, 3]
    with pytest.raises(ValueError):
        compose(f, identity_network(2))
