import math
import random
from fractions import Fraction

import pytest

from snpc.bounds import (BoundInputs, binomial_tail_bound, binomial_tail_bound_upper,
                         bound_report, check_tail_grid, average_error, eps_star,
                         exact_binomial_cdf, prime_noise_point, root_residual,
                         tail_event_cdf, failure_probability, sample_size,
                         noisy_bounds)


def test_sample_size_small_case():
    b = BoundInputs(L=1, V=1, B=2, delta=math.exp(-1), eps=Fraction(1, 2))
    assert sample_size(b) == 4


def test_sample_size_delta_one_and_zero_constant():
    b = BoundInputs(L=3, V=2, B=9, delta=1, eps=Fraction(1, 7), c3=0)
    assert sample_size(b) == 0


def test_sample_size_matches_independent_formula():
    # prime checker at N = 10^6, B = 10^12
    b = BoundInputs(L=11, V=9, B=10**12, delta=Fraction(1, 100), eps=Fraction(1, 1000))
    ref = math.ceil((11**3 * 9**2 * math.log(10**12) + math.log(100)) / 0.001)
    assert sample_size(b) == ref


def test_sample_size_errors_and_monotonicity():
    with pytest.raises(ZeroDivisionError):
        sample_size(BoundInputs(L=1, V=1, B=2, eps=0))
    base = dict(L=2, V=2, B=10, delta=Fraction(1, 10), eps=Fraction(1, 10))
    n0 = sample_size(BoundInputs(**base))
    for key, bigger in (("L", 3), ("V", 3), ("B", 100)):
        assert sample_size(BoundInputs(**{**base, key: bigger})) >= n0
    assert sample_size(BoundInputs(**{**base, "eps": Fraction(1, 5)})) <= n0


def test_failprob_at_sample_size_is_at_most_delta():
    b = BoundInputs(L=2, V=3, B=17, delta=Fraction(1, 20), eps=Fraction(1, 10))
    n = sample_size(b)
    b.n = n
    assert failure_probability(b) <= 1 / 20 + 1e-12
    b.n = 1
    assert failure_probability(b) == 1.0


def test_input_invariants():
    with pytest.raises(ValueError):
        BoundInputs(L=1, V=1, B=1)
    with pytest.raises(ValueError):
        BoundInputs(L=1, V=1, B=2, I=2)
    with pytest.raises(ValueError):
        BoundInputs(L=1, V=1, B=2, delta=0)


def test_averaged_bound():
    assert average_error(BoundInputs(L=1, V=1, B=3, n=10)) == pytest.approx(math.log(3) / 10)
    b1 = BoundInputs(L=11, V=9, B=100, n=50)
    b2 = BoundInputs(L=11, V=9, B=100, n=100)
    assert average_error(b2) == pytest.approx(average_error(b1) / 2)
    # prime checker with B = N^2 scales like 2 ln N / n
    vals = [average_error(BoundInputs(L=11, V=9, B=N * N, n=7)) for N in (10, 100, 1000)]
    ratios = [v / (2 * math.log(N) / 7) for v, N in zip(vals, (10, 100, 1000))]
    assert ratios[0] == pytest.approx(ratios[1]) == pytest.approx(ratios[2]) == pytest.approx(11**3 * 81)
    for n in range(1, 50):
        assert average_error(BoundInputs(L=2, V=2, B=5, n=n + 1)) < average_error(BoundInputs(L=2, V=2, B=5, n=n))


def test_tail_bound_values():
    assert binomial_tail_bound(10, Fraction(1, 10), 0) == 1.0
    assert binomial_tail_bound(10, Fraction(1, 10), Fraction(2, 10)) == pytest.approx(math.exp(-10 * 0.04 / 0.6))
    exact = tail_event_cdf(10, Fraction(1, 10), Fraction(2, 10))
    assert exact == Fraction(7, 10) ** 10 + 10 * Fraction(3, 10) * Fraction(7, 10) ** 9
    assert float(exact) == pytest.approx(0.1493083459)


def test_exact_cdf_against_floats():
    for n in (1, 5, 17):
        for p in (Fraction(1, 3), Fraction(1, 2), Fraction(9, 10)):
            for k in range(-1, n + 2):
                ref = sum(math.comb(n, j) * float(p) ** j * (1 - float(p)) ** (n - j) for j in range(0, min(k, n) + 1))
                assert float(exact_binomial_cdf(n, p, k)) == pytest.approx(ref, abs=1e-12)


def test_rounded_bound_is_upper():
    for n in (5, 50, 200):
        for r, e in ((Fraction(1, 20), Fraction(1, 20)), (Fraction(1, 2), Fraction(1, 2))):
            assert binomial_tail_bound_upper(n, r, e) >= Fraction(binomial_tail_bound(n, r, e))


def test_tail_grid_small():
    grid = [Fraction(k, 20) for k in (1, 5, 10)]
    res = check_tail_grid(range(5, 30), grid, grid)
    assert res and all(r.ok for r in res)


def test_eps_star_root_identity():
    rng = random.Random(0)
    for _ in range(200):
        a = 10 ** rng.uniform(-3, 6)
        rho = rng.choice([0.0, 10 ** rng.uniform(-4, 0)])
        n = rng.randint(1, 10**6)
        assert root_residual(a, rho, n) <= 1e-12


def test_eps_star_noiseless():
    assert eps_star(3.0, 0.0, 12) == pytest.approx(0.5)


def test_noisy_bounds():
    b = BoundInputs(L=1, V=1, B=2, I=1, N=10, n=10**6, rho=Fraction(1, 100), eps=Fraction(1, 10))
    r = noisy_bounds(b)
    a = math.log(3) * (1 + 0.01 * 10**6)
    assert r.a == pytest.approx(a)
    assert r.eps_star == pytest.approx(a / 1e6 + math.sqrt((a / 1e6) ** 2 + 2 * 0.01 * a / 1e6))
    assert r.avg_error == pytest.approx(0.01 + r.eps_star + 2e-6 * (1 + 1e-4 / (r.eps_star * (r.eps_star + 0.02))))
    # the closed form is an upper estimate of e*
    assert r.closed_form >= r.eps_star
    assert r.C == pytest.approx(1 + 2 * math.log(3) + math.sqrt(2 * math.log(3)))
    rN = noisy_bounds(b, C_reading="N")
    assert rN.C == pytest.approx(1 + 2 * math.log(11) + math.sqrt(2 * math.log(11)))
    with pytest.raises(ValueError):
        noisy_bounds(b, C_reading="x")


def test_noisy_bounds_zero_rho_and_guard():
    b = BoundInputs(L=1, V=1, B=2, n=100, rho=0, eps=Fraction(1, 10))
    r = noisy_bounds(b)
    assert r.eps_star == pytest.approx(2 * r.a / 100)
    with pytest.raises(ZeroDivisionError):
        noisy_bounds(BoundInputs(L=1, V=1, B=2, n=100, rho=0, c3=0))


def test_prime_noise_example_trend():
    ratios = [a / r for a, r in (prime_noise_point(N) for N in (1e3, 1e4, 1e5))]
    assert ratios[0] > ratios[1] > ratios[2]
    # the bound only drops below 1/ln N far beyond desk scale
    assert ratios[2] > 1
    far = [a / r for a, r in (prime_noise_point(N) for N in (1e30, 1e60, 1e120))]
    assert all(x < 1 for x in far) and far[0] > far[1] > far[2]


def test_bound_report_table():
    b = BoundInputs(L=11, V=9, B=100, N=10, n=500, rho=Fraction(1, 10), eps=Fraction(1, 10))
    rep = bound_report(b, C=2, c_impl=64)
    assert rep.sample_size_n == sample_size(b)
    assert rep.tail_bound >= float(rep.exact_binomial_cdf)
    text = rep.table()
    assert "noisy_eps_star" in text and "c_impl" in text
