from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knotren.cli import load_golden
from knotren.oneloop import canonical_pair, pn_spec, product_Pn
from knotren.rationality import (
    absorb_scheme,
    assert_rational,
    binomial_backbone,
    rescale_coupling,
    s_sum,
    stirling2,
    t_sum,
    t_sum_stirling,
    u_sum,
    u_sum_stirling,
)
from knotren.symexpr import GAMMA, LaurentSeries, TransMonomial, ZetaPoly, zeta_mono

GOLDEN = load_golden()


def test_documented_values():
    assert t_sum(3, 1) == 0
    assert t_sum(3, 3) == -1
    assert t_sum(5, 2) == 0
    assert u_sum(3, 3) == -1
    assert u_sum(4, 2) == 0
    assert u_sum(2, 2) == 1
    assert s_sum(4, 3) == 0
    assert s_sum(10, 9) == 0
    assert s_sum(5, 2) == 0


def test_t3_by_hand():
    # -1/2 + 4 - 9/2
    assert t_sum(3, 3) == Fraction(-1, 2) + 4 - Fraction(9, 2)


def test_stirling_numbers():
    assert [stirling2(4, k) for k in range(5)] == [0, 1, 7, 6, 1]
    assert stirling2(0, 0) == 1


@pytest.mark.parametrize("n", range(1, 13))
def test_vanishing_windows(n):
    for r in range(1, n):
        assert t_sum(n, r) == 0
        assert u_sum(n, r) == 0
    assert t_sum(n, n) == (-1) ** n
    assert u_sum(n, n) == (-1) ** n


def test_sums_match_stirling_route():
    for n in range(0, 13):
        for r in range(0, 15):
            assert t_sum(n, r) == t_sum_stirling(n, r), (n, r)
            assert u_sum(n, r) == u_sum_stirling(n, r), (n, r)


def _s_oracle(n, r):
    # the bracket expanded by the binomial theorem, summed term by term
    total = Fraction(0)
    for i in range(1, n + 1):
        w = Fraction((-1) ** i, factorial(i) * factorial(n - i))
        total += w * (i + 1)
        total += w * (-i) ** r
        total -= w * (i + 1) ** r
    return total / r


@pytest.mark.parametrize("n", range(3, 11))
def test_s_vanishes_below_n(n):
    for r in range(2, n):
        assert s_sum(n, r) == 0
        assert _s_oracle(n, r) == 0
    assert s_sum(n, n - 1) == 0


def test_s_on_the_diagonal():
    # even n vanish; odd n do not
    assert s_sum(3, 3) == Fraction(2, 3)
    for n in range(2, 11):
        assert s_sum(n, n) == _s_oracle(n, n)
        if n % 2 == 0:
            assert s_sum(n, n) == 0
        else:
            assert s_sum(n, n) != 0


def test_s_at_r_one_recorded():
    # the bracket reduces to -i, so S_n(1) = -T_n(1)
    for n in range(1, 8):
        assert s_sum(n, 1) == -t_sum(n, 1)
    assert s_sum(1, 1) == 1
    with pytest.raises(ValueError):
        s_sum(3, 0)


def test_binomial_backbone():
    assert binomial_backbone(0) == 1
    assert all(binomial_backbone(n) == 0 for n in range(1, 21))


def test_assert_rational_examples():
    assert assert_rational(GOLDEN["Z(4)"]) == (True, None)
    ok, (power, mono) = assert_rational(GOLDEN["G(4)"])
    assert not ok and power == -1 and mono == zeta_mono(4)
    assert assert_rational(LaurentSeries.zero()) == (True, None)


def test_absorb_on_chain_exponent():
    _, g = canonical_pair(pn_spec(4), 4)
    a = absorb_scheme(g)
    for k, v in a.items():
        assert all(m.gamma_exp == 0 and 2 not in dict(m.zeta_exps) for m, _ in v.items())
    assert a.coeff(3) == ZetaPoly.mono(zeta_mono(3)) * g.coeff(3).coeff(zeta_mono(3))


def test_absorb_on_two_loop_chain_pole():
    a = absorb_scheme(GOLDEN["G(2)"])
    assert a.coeff(-1) == ZetaPoly.const(Fraction(55, 6))
    assert a.coeff(-2) == ZetaPoly.const(Fraction(3, 2))


def test_absorb_matches_coupling_rescaling():
    p3 = product_Pn(3, 3)
    assert rescale_coupling(p3, 3) == absorb_scheme(p3)
    with pytest.raises(ValueError):
        rescale_coupling(LaurentSeries.const(1), 1)


polys = st.dictionaries(
    st.sampled_from([GAMMA, zeta_mono(2), zeta_mono(3), zeta_mono(2, 2),
                     TransMonomial.make(gamma_exp=1, zetas={5: 1})]),
    st.fractions(-9, 9, max_denominator=5), max_size=3).map(ZetaPoly)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.integers(-3, 2), polys, max_size=4))
def test_absorb_idempotent(coeffs):
    s = LaurentSeries(coeffs, max_pow=2)
    once = absorb_scheme(s)
    assert absorb_scheme(once) == once
    rational = LaurentSeries({k: ZetaPoly.const(v.coeff(zeta_mono(3)))
                              for k, v in s.items()}, max_pow=2)
    assert absorb_scheme(rational) == rational
