"""Combinatorial sums behind the cancellation of transcendentals, and
rationality checks on series."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .symexpr import GAMMA, LaurentSeries, TransMonomial, ZetaPoly, zeta_mono


def _inv_fact_pair(i: int, n: int) -> Fraction:
    return Fraction(1, factorial(i) * factorial(n - i))


def t_sum(n: int, r: int) -> Fraction:
    """T_n(r) = sum_i (-1)^i i^r / (i! (n-i)!)."""
    if n < 0 or r < 0:
        raise ValueError("need n, r >= 0")
    return sum((Fraction((-1) ** i * i ** r) * _inv_fact_pair(i, n) for i in range(n + 1)),
               Fraction(0))


def u_sum(n: int, r: int) -> Fraction:
    """U_n(r) = sum_i (-1)^i (i+1)^r / (i! (n-i)!)."""
    if n < 0 or r < 0:
        raise ValueError("need n, r >= 0")
    return sum((Fraction((-1) ** i * (i + 1) ** r) * _inv_fact_pair(i, n)
                for i in range(n + 1)), Fraction(0))


def s_sum(n: int, r: int) -> Fraction:
    """S_n(r) = (1/r) sum_{i=1..n} (-1)^i/(i!(n-i)!) [i + 1 + (-i)^r - (i+1)^r]."""
    if r == 0:
        raise ValueError("S_n(r) is undefined for r = 0")
    total = Fraction(0)
    for i in range(1, n + 1):
        total += Fraction((-1) ** i * (i + 1 + (-i) ** r - (i + 1) ** r)) * _inv_fact_pair(i, n)
    return total / r


def binomial_backbone(n: int) -> Fraction:
    """sum_i (-1)^i / (i! (n-i)!), which is 1 for n = 0 and 0 otherwise."""
    return t_sum(n, 0)


# -- independent route through Stirling numbers of the second kind

@lru_cache(maxsize=None)
def stirling2(r: int, k: int) -> int:
    if r == k:
        return 1
    if k == 0 or k > r:
        return 0
    return k * stirling2(r - 1, k) + stirling2(r - 1, k - 1)


def t_sum_stirling(n: int, r: int) -> Fraction:
    """T_n(r) = (-1)^n S2(r, n), with 0^0 = 1 so T_0(0) = 1."""
    return Fraction((-1) ** n * stirling2(r, n))


def u_sum_stirling(n: int, r: int) -> Fraction:
    """U_n(r) = sum_k C(r, k) T_n(k) by expanding (i+1)^r."""
    return sum((comb(r, k) * t_sum_stirling(n, k) for k in range(r + 1)), Fraction(0))


# -- series checks

def assert_rational(s: LaurentSeries) -> tuple[bool, tuple[int, TransMonomial] | None]:
    """(True, None) if every coefficient is a plain rational, otherwise
    (False, (power, monomial)) for the first offender.

    Powers are scanned from the highest down (the simple pole first, as
    tables are printed); within a power the offender of highest level wins,
    preferring the largest zeta argument.
    """
    for k, v in sorted(s.items(), key=lambda kv: -kv[0]):
        bad = [m for m, _ in v.items() if not m.is_unit]
        if bad:
            bad.sort(key=_witness_key)
            return False, (k, bad[0])
    return True, None


def _witness_key(m: TransMonomial):
    top = max((z for z, _ in m.zeta_exps), default=0)
    return (-m.level, -top, m.sort_key())


def absorb_scheme(s: LaurentSeries) -> LaurentSeries:
    """Drop gamma and zeta(2): the effect of the coupling redefinition
    g mu^-eps -> g mu'^-eps with mu' absorbing exp(gamma + eps zeta(2)/2).

    Idempotent, and the identity on series free of both constants.
    """
    return s.map_coeffs(lambda p: p.substitute({"ge": 0, "zet(2)": 0}))


def rescale_coupling(s: LaurentSeries, n_loops: int, order: int | None = None) -> LaurentSeries:
    """Multiply an n-loop quantity by exp(n (gamma eps + zeta(2) eps^2 / 2))."""
    from .symexpr import series_exp  # local to keep the import surface small

    top = s.max_pow
    if top is None:
        if order is None:
            raise ValueError("exact input needs an explicit order")
        top = order
    lead = s.min_pow if s.min_pow is not None else 0
    depth = top - lead
    g = LaurentSeries({1: ZetaPoly.mono(GAMMA, n_loops),
                       2: ZetaPoly.mono(zeta_mono(2), Fraction(n_loops, 2))}, max(depth, 1))
    return (s * series_exp(g)).truncate(top) if s.max_pow is not None else \
        (s.truncate(top) * series_exp(g)).truncate(top)
