from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath as mp
import pytest

from knotren.eulersums import (
    SumSymbol,
    catalan,
    depth2_at_level,
    euler_count,
    euler_series,
    family_counts,
    grid,
    mobius,
    search_space,
    zeta,
    zigzag_coefficient,
    zigzag_signed_sum,
    zigzag_term,
)
from knotren.symexpr import ZetaPoly, zeta_mono


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _lyndon_count(l, k):
    """Aperiodic necklaces of k odd exponents summing to l, by enumeration."""
    if l < k or (l - k) % 2:
        return 0
    n = (l - k) // 2
    count = 0
    for word in _compositions(n, k):
        rots = [word[i:] + word[:i] for i in range(1, k)]
        if all(word < r for r in rots):
            count += 1
    return count


def _search_space_brute(l, k):
    total = 0
    for n in range(k):
        top = (l + n - 1) // 2
        total += sum(1 for _ in itertools.combinations(range(top), n))
    return total


def test_mobius_values():
    assert [mobius(d) for d in (1, 2, 4, 30)] == [1, -1, 0, -1]
    assert [mobius(d) for d in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    with pytest.raises(ValueError):
        mobius(0)


def test_euler_count_examples():
    assert euler_count(3, 1) == 1
    assert euler_count(2, 2) == 0
    assert euler_count(12, 2) == 3
    assert euler_count(11, 2) == 0
    n = 5
    assert euler_count(12, 2) == ((n + 1) - (n % 2 == 0)) // 2


@pytest.mark.parametrize("k", range(1, 7))
def test_euler_count_against_necklaces(k):
    for l in range(1, 25):
        assert euler_count(l, k) == _lyndon_count(l, k), (l, k)


@pytest.mark.parametrize("k", range(1, 7))
def test_generating_function_two_routes(k):
    coeffs = euler_series(k, 13)
    for n, c in enumerate(coeffs):
        assert c == Fraction(euler_count(k + 2 * n, k))


def test_search_space_examples():
    assert all(search_space(l, 1) == 1 for l in range(1, 30))
    assert search_space(12, 2) == 7
    assert search_space(9, 3) == 15
    with pytest.raises(ValueError):
        search_space(5, 0)


@pytest.mark.parametrize("k", range(1, 7))
def test_search_space_against_enumeration(k):
    for l in range(1, 25):
        assert search_space(l, k) == _search_space_brute(l, k)


def test_catalan():
    assert [catalan(n) for n in range(6)] == [1, 1, 2, 5, 14, 42]
    with pytest.raises(ValueError):
        catalan(-1)


def test_zigzag_symbolic_values():
    want = {3: Fraction(6), 4: Fraction(20), 5: Fraction(441, 8), 6: Fraction(168)}
    for n, c in want.items():
        sym, _ = zigzag_term(n)
        assert sym == ZetaPoly.mono(zeta_mono(2 * n - 3), c)
    with pytest.raises(ValueError):
        zigzag_coefficient(2)


def test_zigzag_even_is_plain_catalan_multiple():
    for n in (4, 6, 8):
        assert zigzag_coefficient(n) == 4 * catalan(n - 1)


@pytest.mark.parametrize("n", range(3, 9))
def test_zigzag_reduction_numerically(n):
    _, val = zigzag_term(n, 128)
    with mp.workprec(128):
        direct = zigzag_signed_sum(n, precision=128)
        assert abs(direct - val.value) < mp.mpf(10) ** -10 * abs(direct)


def test_family_counts_six_loops():
    fam = family_counts(6)
    assert fam["depth1"] == [zeta(3), zeta(5), zeta(7), zeta(9)]
    assert fam["depth2"] == [SumSymbol("U", (5, 3))]
    assert fam["depth3"] == []


def test_family_counts_seven_loops():
    fam = family_counts(7)
    assert len(fam["depth1"]) == 5
    assert [s.text() for s in fam["depth2"]] == ["U(5,3)", "U(7,3)"]
    assert [s.text() for s in fam["depth3"]] == ["N(5,3,3)"]
    with pytest.raises(ValueError):
        family_counts(2)


def test_depth2_counts_two_implementations():
    fam = family_counts(12)["depth2"]
    for level in range(4, 22, 2):
        listed = sum(1 for s in fam if s.level == level)
        assert listed == depth2_at_level(level), level


def test_symbol_rules():
    u = SumSymbol("U", (9, 3))
    assert u.level == 12 and u.depth == 2 and u.text() == "U(9,3)"
    with pytest.raises(ValueError):
        SumSymbol("U", (1, 2, 3))
    with pytest.raises(ValueError):
        SumSymbol("zeta", (1,))
    assert zeta(3).monomial() == zeta_mono(3)


def test_grid_rows():
    rows = grid(6, 3)
    assert (3, 1, 1, 1) in rows
    assert all((l - k) % 2 == 0 for l, k, _, _ in rows)
