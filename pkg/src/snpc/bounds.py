"""Closed-form generalization bounds for MDL interpolators of compiled programs.

All bound quantities use natural logarithms and take the unnamed absolute
constants (``c3`` for the tail exponents, ``C`` for the averaged bound) as
configuration, default 1.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


@dataclass
class BoundInputs:
    """Program sizes and sample parameters shared by the bound formulas.

    Parameters
    ----------
    L, V, I : int
        Program length, variable count and input arity (``V >= I``).
    B : int
        Runtime bound of the program on ``[N]^I`` (``B >= 2``).
    N : int, optional
        Input range; only used by the ``"N"`` reading of the constant ``C``
        of :func:`noisy_bounds`.
    n : int
        Sample count.
    eps, delta, rho : rational
        Target error, failure probability, corruption rate.
    c3 : rational
        Absolute constant in the exponent of the tail bounds.
    """

    L: int
    V: int
    B: int
    I: int = 1
    N: int | None = None
    n: int = 1
    eps: Fraction = Fraction(1, 10)
    delta: Fraction = Fraction(1, 20)
    rho: Fraction = Fraction(0)
    c3: Fraction = Fraction(1)

    def __post_init__(self):
        for k in ("eps", "delta", "rho", "c3"):
            setattr(self, k, _frac(getattr(self, k)))
        if self.L < 1 or self.V < 1 or self.I < 1:
            raise ValueError("L, V and I must be positive")
        if self.B < 2:
            raise ValueError("B must be at least 2")
        if self.V < self.I:
            raise ValueError("V must be at least I")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.rho < 0 or self.eps < 0:
            raise ValueError("eps and rho must be nonnegative")
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.c3 < 0:
            raise ValueError("c3 must be nonnegative")

    @property
    def complexity(self) -> int:
        """``L^3 V^2``."""
        return self.L**3 * self.V**2


def _exp_capped(x: float) -> float:
    """``min(1, exp(x))``."""
    return 1.0 if x >= 0 else math.exp(x)


# ---------------------------------------------------------------------------
# noiseless data

def complexity_exponent(b: BoundInputs) -> float:
    """``c3 L^3 V^2 ln B``: log of the size of the competing network class."""
    return float(b.c3) * b.complexity * math.log(b.B)


def sample_size(b: BoundInputs) -> int:
    """Samples after which the MDL interpolator has error ``<= eps`` with
    probability ``>= 1 - delta``: ``ceil((c3 L^3 V^2 ln B + ln(1/delta)) / eps)``."""
    if b.eps == 0:
        raise ZeroDivisionError("eps must be positive")
    num = complexity_exponent(b) - math.log(b.delta)
    return max(0, math.ceil(num / float(b.eps)))


def failure_probability(b: BoundInputs) -> float:
    """``min(1, exp(c3 L^3 V^2 ln B - n eps))`` at the given ``n`` and ``eps``."""
    return _exp_capped(complexity_exponent(b) - b.n * float(b.eps))


def average_error(b: BoundInputs, C=1) -> float:
    """``C L^3 V^2 ln B / n``: bound on the error averaged over datasets."""
    if b.n < 1:
        raise ValueError("n must be at least 1")
    return float(C) * b.complexity * math.log(b.B) / b.n


# ---------------------------------------------------------------------------
# binomial lower tail

def binomial_tail_bound(n: int, rho, eps) -> float:
    """``exp(-n eps^2 / (2 (rho + eps)))``, a bound on ``P(Bin(n, rho + eps) <= n rho)``."""
    rho, eps = _frac(rho), _frac(eps)
    if rho < 0 or eps < 0 or rho + eps > 1:
        raise ValueError("need rho, eps >= 0 and rho + eps <= 1")
    if eps == 0:
        return 1.0
    return math.exp(-float(n * eps * eps / (2 * (rho + eps))))


def binomial_tail_bound_upper(n: int, rho, eps) -> Fraction:
    """:func:`binomial_tail_bound` rounded upward, as an exact rational.

    The exponent is rounded toward zero and the result nudged up two ulps,
    which covers the error of ``math.exp``.
    """
    rho, eps = _frac(rho), _frac(eps)
    if eps == 0:
        return Fraction(1)
    x = n * eps * eps / (2 * (rho + eps))
    xf = float(x)
    if Fraction(xf) > x:
        xf = math.nextafter(xf, 0.0)
    v = math.exp(-xf)
    v = math.nextafter(math.nextafter(v, math.inf), math.inf)
    return Fraction(v)


def exact_binomial_cdf(n: int, p, k: int) -> Fraction:
    """``P(Bin(n, p) <= k)`` by exact summation over rational ``p``."""
    p = _frac(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if k < 0:
        return Fraction(0)
    if k >= n:
        return Fraction(1)
    a, d = p.numerator, p.denominator
    q = d - a
    total = sum(math.comb(n, j) * a**j * q ** (n - j) for j in range(k + 1))
    return Fraction(total, d**n)


def tail_event_cdf(n: int, rho, eps) -> Fraction:
    """``P(Bin(n, rho + eps) <= n rho)`` exactly."""
    rho, eps = _frac(rho), _frac(eps)
    return exact_binomial_cdf(n, rho + eps, math.floor(n * rho))


@dataclass
class TailCheck:
    n: int
    rho: Fraction
    eps: Fraction
    bound: Fraction
    exact: Fraction

    @property
    def ok(self) -> bool:
        return self.bound >= self.exact


def check_tail_grid(ns, rhos, epss) -> list[TailCheck]:
    """Compare the rounded-up bound with the exact CDF on a grid (pairs with
    ``rho + eps > 1`` are skipped)."""
    out = []
    for rho in map(_frac, rhos):
        for eps in map(_frac, epss):
            if rho + eps > 1:
                continue
            for n in ns:
                out.append(TailCheck(n, rho, eps, binomial_tail_bound_upper(n, rho, eps),
                                     tail_event_cdf(n, rho, eps)))
    return out


# ---------------------------------------------------------------------------
# corrupted data

@dataclass
class NoisyBounds:
    a: float
    b0: float
    b1: float
    failprob: float
    eps_star: float
    avg_error: float
    leading: float  # rho (1 + 2 b1 + sqrt(2 b1))
    o_term: float  # (b0 + b0 (b1 + 1) / b1 + b0^2 / (2 b1 rho)) / n
    closed_form: float
    C: float
    C_reading: str


def eps_star(a: float, rho: float, n: int) -> float:
    """Positive root of ``n e^2 - 2 a e - 2 rho a = 0``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    t = a / n
    return t + math.sqrt(t * t + 2 * rho * t)


def root_residual(a: float, rho: float, n: int) -> float:
    """Relative error of ``a = n e*^2 / (2 rho + 2 e*)`` at the computed root."""
    e = eps_star(a, rho, n)
    return abs(n * e * e / (2 * rho + 2 * e) - a) / abs(a)


def noisy_bounds(b: BoundInputs, *, C_reading: str = "B") -> NoisyBounds:
    """Bounds for the MDL interpolator of data with a ``rho`` fraction of
    corrupted labels.

    ``failprob`` bounds the chance that the error exceeds ``rho + eps``.
    ``avg_error`` is ``rho + e* + (2/n)(1 + rho^2 / (e*(e* + 2 rho)))``;
    ``closed_form`` is ``leading + o_term``, its upper estimate with the
    constants written out. ``C`` is ``1 + 2 c3 I ln(I + X) + sqrt(2 c3 I
    ln(I + X))`` with ``X = B`` or ``X = N`` as chosen by ``C_reading``.
    """
    if C_reading not in ("B", "N"):
        raise ValueError("C_reading must be 'B' or 'N'")
    if b.n < 1:
        raise ValueError("n must be at least 1")
    c3, rho, eps, n, I = float(b.c3), float(b.rho), float(b.eps), b.n, b.I
    lg = math.log(I + b.B)
    b0 = c3 * b.complexity * lg
    b1 = c3 * I * lg
    a = b0 + rho * n * b1
    if rho + eps == 0:
        failprob = 1.0
    else:
        failprob = _exp_capped(a - n * eps * eps / (2 * rho + 2 * eps))
    es = eps_star(a, rho, n)
    if es == 0:
        raise ZeroDivisionError("e* is zero (rho = a = 0)")
    avg = rho + es + (2 / n) * (1 + rho * rho / (es * (es + 2 * rho)))
    leading = rho * (1 + 2 * b1 + math.sqrt(2 * b1))
    if rho > 0 and b1 > 0:
        o_term = (b0 + b0 * (b1 + 1) / b1 + b0 * b0 / (2 * b1 * rho)) / n
    else:
        o_term = math.inf
    if C_reading == "N":
        if b.N is None:
            raise ValueError("the N reading of C needs N")
        lc = c3 * I * math.log(I + b.N)
    else:
        lc = b1
    C = 1 + 2 * lc + math.sqrt(2 * lc)
    return NoisyBounds(a, b0, b1, failprob, es, avg, leading, o_term, leading + o_term, C, C_reading)


def prime_noise_point(N: float, c3: float = 1.0, *, L: int = 11, V: int = 9):
    """Averaged-error bound for the prime checker at ``n = sqrt(N)`` and
    ``rho = 1 / (8 c3 (ln N)^3)``, with ``B = N^2``.

    Returns ``(avg_error, 1 / ln N)``. ``N`` may be a float far beyond the
    integer range any network could be compiled at.
    """
    lnN = math.log(N)
    n = max(1, int(math.sqrt(N)))
    rho = 1 / (8 * c3 * lnN**3)
    lg = math.log(1 + N * N)
    b0 = c3 * L**3 * V**2 * lg
    a = b0 + rho * n * c3 * lg
    es = eps_star(a, rho, n)
    avg = rho + es + (2 / n) * (1 + rho * rho / (es * (es + 2 * rho)))
    return avg, 1 / lnN


# ---------------------------------------------------------------------------
# report

@dataclass
class BoundReport:
    inputs: BoundInputs
    sample_size_n: int | None = None
    sample_failprob: float | None = None
    average_error_bound: float | None = None
    noisy_failprob: float | None = None
    noisy_eps_star: float | None = None
    noisy_avg_error: float | None = None
    noisy_closed_form: float | None = None
    tail_bound: float | None = None
    exact_binomial_cdf: Fraction | None = None
    notes: dict = field(default_factory=dict)

    def rows(self):
        out = []
        for k, v in asdict(self).items():
            if k in ("inputs", "notes") or v is None:
                continue
            out.append((k, v))
        return out

    def table(self) -> str:
        rows = [(k, _fmt(v)) for k, v in self.rows()]
        rows += [(k, _fmt(v)) for k, v in self.notes.items()]
        w = max((len(k) for k, _ in rows), default=0)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{float(v):.6g} ({v.numerator}/{v.denominator})" if v.denominator < 10**6 else f"{float(v):.6g}"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def bound_report(b: BoundInputs, *, C=1, C_reading: str = "B", c_impl=None) -> BoundReport:
    """Evaluate every bound that is defined for ``b``."""
    r = BoundReport(b)
    r.notes["c3"] = b.c3
    r.notes["C"] = _frac(C)
    if c_impl is not None:
        r.notes["c_impl"] = c_impl
    if b.eps > 0:
        r.sample_size_n = sample_size(b)
        r.sample_failprob = failure_probability(b)
    if b.n >= 1:
        r.average_error_bound = average_error(b, C)
        if b.rho > 0 or noisy_complexity(b) > 0:
            nb = noisy_bounds(b, C_reading=C_reading) if (b.N is not None or C_reading == "B") else None
            if nb is not None:
                r.noisy_failprob = nb.failprob
                r.noisy_eps_star = nb.eps_star
                r.noisy_avg_error = nb.avg_error
                r.noisy_closed_form = nb.closed_form
                r.notes["noisy_C"] = nb.C
                r.notes["noisy_C_reading"] = C_reading
    if b.rho + b.eps <= 1:
        r.tail_bound = binomial_tail_bound(b.n, b.rho, b.eps)
        r.exact_binomial_cdf = tail_event_cdf(b.n, b.rho, b.eps)
    return r


def noisy_complexity(b: BoundInputs) -> float:
    lg = math.log(b.I + b.B)
    return float(b.c3) * (b.complexity + float(b.rho) * b.I * b.n) * lg
