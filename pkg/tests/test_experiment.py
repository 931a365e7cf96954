from collections import Counter
from fractions import Fraction

import pytest

from snpc.experiment import (ExperimentConfig, ExperimentError, candidate, mdl_proxy_search,
                             run_generalization_experiment, sample_dataset)
from snpc.experiment import test_error as exact_test_error

PRIMES = {2, 3, 5, 7}


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig(N=10, n=(20,), trials=3)


def test_config_file(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("# demo\ngenerator = prime\nN = 10\nn = 5, 10 20\ntrials = 4\n"
                 "candidate_family = constant0 prime\nrho = 0.1\ncorrections = yes\n")
    c = ExperimentConfig.from_file(f)
    assert c.n == (5, 10, 20) and c.trials == 4 and c.rho == Fraction(1, 10)
    assert c.corrections is True and c.candidate_family == ("constant0", "prime")
    f.write_text("color = blue\n")
    with pytest.raises(ExperimentError):
        ExperimentConfig.from_file(f)


@pytest.mark.parametrize("kw", [dict(N=0), dict(rho=2), dict(mode="x"), dict(scope="x"),
                                dict(generator="prime", candidate_family=("constant0",)),
                                dict(mu="gaussian"), dict(n=(-1,))])
def test_config_validation(kw):
    with pytest.raises(ExperimentError):
        ExperimentConfig(**kw)


def test_candidate_tables(cfg):
    assert set(candidate("prime_corrected", 10).table.values()) == {0, 1}
    pc = candidate("prime_corrected", 10).table
    # n = 1 has no factorisation either, so the flipped program accepts it
    assert {x[0] for x, v in pc.items() if v} == PRIMES | {1}
    assert {x[0] for x, v in candidate("prime", 10).table.items() if v} == {4, 6, 8, 9, 10}
    assert set(candidate("constant0", 10).table.values()) == {0}


def test_uniform_sampling_frequencies():
    c = ExperimentConfig(N=10, n=(20000,), trials=1, seed=3)
    counts = Counter(x[0] for x, _ in sample_dataset(c))
    # each cell is Binomial(20000, 1/10): sd = 42.4
    assert set(counts) == set(range(1, 11))
    assert all(abs(v - 2000) < 5 * 42.5 for v in counts.values())


def test_weighted_sampling(tmp_path):
    w = tmp_path / "w.txt"
    w.write_text("7,1\n")
    c = ExperimentConfig(N=10, n=(50,), mu=f"weights:{w}")
    assert sample_dataset(c) == [((7,), 1)] * 50
    w.write_text("2,1/4\n9,3/4\n")
    data = sample_dataset(ExperimentConfig(N=10, n=(4000,), mu=f"weights:{w}"))
    share = sum(x == (9,) for x, _ in data) / 4000
    assert abs(share - 0.75) < 5 * (0.75 * 0.25 / 4000) ** 0.5
    w.write_text("2,1/4\n")
    with pytest.raises(ExperimentError):
        sample_dataset(ExperimentConfig(N=10, n=(4,), mu=f"weights:{w}"))


def test_sampling_is_seeded(cfg):
    assert sample_dataset(cfg, 30, trial=1) == sample_dataset(cfg, 30, trial=1)
    assert sample_dataset(cfg, 30, trial=1) != sample_dataset(cfg, 30, trial=2)


def test_search_all_zero_labels(cfg):
    res = mdl_proxy_search([((4,), 0), ((6,), 0), ((9,), 0)], cfg)
    assert res.winner == "constant0"
    assert set(res.lengths) == {"constant0", "prime_corrected"}


def test_search_empty_data_picks_shortest(cfg):
    res = mdl_proxy_search([], cfg)
    lens = {n: candidate(n, 10).length for n in cfg.candidate_family}
    assert res.desc_len == min(lens.values())
    assert res.winner in ("constant0", "constant1")


def test_search_picks_generator_on_full_grid(cfg):
    data = list(candidate("prime_corrected", 10).table.items())
    res = mdl_proxy_search(data, cfg)
    assert res.winner == "prime_corrected" and exact_test_error(res, cfg) == 0


def test_search_with_corrections_prefers_short_patches():
    c = ExperimentConfig(N=10, n=(5,), corrections=True)
    res = mdl_proxy_search([((2,), 1), ((4,), 0), ((8,), 0)], c)
    assert res.winner == "constant0" and res.corrections == {(2,): 1}
    assert res.desc_len == candidate("constant0", 10).cost.length([(2,)], [1])
    assert res.network(10).eval([2]) == [1] and res.network(10).eval([3]) == [0]
    assert exact_test_error(res, c) == Fraction(4, 10)  # misses 1, 3, 5, 7


def test_search_rejects_conflicts(cfg):
    with pytest.raises(ExperimentError):
        mdl_proxy_search([((2,), 1), ((2,), 0)], cfg)
    c = ExperimentConfig(N=10, candidate_family=("constant0", "constant1"), generator="constant0")
    with pytest.raises(ExperimentError):
        mdl_proxy_search([((2,), 1), ((3,), 0)], c)


def test_noisy_rows_respect_budget():
    c = ExperimentConfig(N=10, n=(1, 5, 30), trials=5, seed=11, rho=Fraction(1, 10), corrections=True)
    res = run_generalization_experiment(c)
    assert len(res.rows) == 15
    for r in res.rows:
        assert r.corrupted <= r.n // 10
        assert 0 <= r.err <= 1


def test_experiment_rows_and_output(cfg):
    res = run_generalization_experiment(cfg)
    assert [(r.trial, r.n) for r in res.rows] == [(0, 20), (1, 20), (2, 20)]
    again = run_generalization_experiment(cfg)
    assert [r.err for r in again.rows] == [r.err for r in res.rows]
    assert res.csv().splitlines()[0] == "trial,n,rho,winner_len,err"
    assert "mean_err" in res.table()
    for r in res.rows:
        gen = candidate("prime_corrected", 10).length
        assert r.winner_len <= gen


def test_parallel_matches_serial():
    c = ExperimentConfig(N=10, n=(3, 9), trials=4, seed=5)
    a = run_generalization_experiment(c)
    c.workers = 2
    b = run_generalization_experiment(c)
    assert [(r.trial, r.n, r.err, r.winner) for r in a.rows] == [(r.trial, r.n, r.err, r.winner) for r in b.rows]
