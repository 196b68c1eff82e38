from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import pytest

from knotren.numerics import eval_series_numeric
from knotren.oneloop import (
    BASIC,
    DeltaMatrix,
    DeltaSpec,
    GammaFactor,
    MatrixTopology,
    SpecTopology,
    Topology,
    bar_delta,
    bubble_master,
    canonical_pair,
    delta_j,
    delta_spec,
    expand,
    iterated_product,
    log_gamma_series,
    matrix_concat,
    matrix_pole,
    omega_j,
    omega_spec,
    pn_spec,
    product_Pn,
)
from knotren.renorm import LadderFamily, z_ladder
from knotren.symexpr import GAMMA, LaurentSeries, TruncationError, ZetaPoly, parse_series, zeta_mono

G = ZetaPoly.mono(GAMMA)


def Z(s):
    return ZetaPoly.mono(zeta_mono(s))


def test_log_gamma_series_examples():
    assert log_gamma_series(1, 3) == LaurentSeries(
        {1: G, 2: Z(2) * Fraction(1, 2), 3: Z(3) * Fraction(1, 3)}, max_pow=3)
    assert log_gamma_series(0, 3).is_zero()
    assert log_gamma_series(-2, 2) == LaurentSeries({1: G * -2, 2: Z(2) * 2}, max_pow=2)


def _check_against_numeric(series: LaurentSeries, fn, eps=Fraction(1, 10**4), tol=1e-20):
    """Truncated series at a small eps against the closed form."""
    with mp.workprec(200):
        got = eval_series_numeric(series, eps, 200).value
        want = fn(mp.mpf(eps.numerator) / eps.denominator)
        assert abs(got - want) < tol * abs(want), (got, want)


def test_bubble_master_one_one():
    spec = bubble_master(1, 1)
    assert spec.prefactor_series(2) == LaurentSeries({-1: 1, 0: 2, 1: 4, 2: 8}, max_pow=2)
    shifts = sorted((g.shift, g.place) for g in spec.gammas)
    assert shifts == [(-2, "den"), (-1, "num"), (-1, "num"), (1, "num")]


def test_delta_j_matches_gamma_functions():
    for j in (0, 1, 3):
        def fn(e, j=j):
            return (mp.gamma(1 + (j + 1) * e) * mp.gamma(1 - e) * mp.gamma(1 - (j + 1) * e)
                    / ((j + 1) * e * (1 - (j + 2) * e) * mp.gamma(1 + j * e)
                       * mp.gamma(1 - (j + 2) * e)))
        _check_against_numeric(delta_j(j, 5), fn)


def test_delta_zero_leading_terms():
    d = delta_j(0, 2)
    assert d.pole_part() == LaurentSeries.monomial(-1)
    assert d.coeff(0) == 2 - G


def test_bubble_master_six_dimensions():
    spec = bubble_master(2, 1, dim=6)
    assert spec.valuation == -1

    def fn(e):
        return mp.gamma(e) * mp.gamma(1 - e) * mp.gamma(2 - e) / mp.gamma(3 - 2 * e)
    _check_against_numeric(expand(spec, 5), fn)


def test_bubble_master_rejects_bare_pole():
    with pytest.raises(ValueError):
        bubble_master(0, 1)


def test_omega_family():
    assert omega_j(0, 3) == delta_j(0, 3)
    w1 = omega_j(1, 2)
    assert w1.coeff(-1) == ZetaPoly.const(Fraction(1, 2))
    assert omega_spec(1).scaling_weight == 2
    assert delta_spec(3).scaling_weight == 4


def test_product_pn_examples():
    assert product_Pn(1, 3) == delta_j(0, 3)
    p2 = product_Pn(2, -1)
    assert p2 == parse_series("1/2*x^-2 + (5/2 - ge)*x^-1 + O(x^0)")


@pytest.mark.parametrize("n", range(1, 8))
def test_product_closed_form_equals_iterated(n):
    order = 2
    assert product_Pn(n, order) == iterated_product(n, order)


def test_canonical_pair_of_delta():
    f, g = canonical_pair(delta_spec(0), 3)
    assert f == LaurentSeries({-1: 1, 0: 2, 1: 4, 2: 8, 3: 16}, max_pow=3)
    assert g.coeff(1) == -G
    assert g.coeff(2) == Z(2) * Fraction(-1, 2)
    assert g.coeff(3) == Z(3) * Fraction(-7, 3)
    f0, g0 = canonical_pair(DeltaSpec((Fraction(1),), (Fraction(1),)), 3)
    assert g0.is_zero() and f0 == LaurentSeries.const(1, 3)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_canonical_pair_multiplicative(n):
    order = 4
    f, g = canonical_pair(pn_spec(n), order)
    g_sum = LaurentSeries.zero(g.max_pow)
    f_prod = LaurentSeries.const(1)
    for i in range(n):
        fi, gi = canonical_pair(delta_spec(i), order + n)
        g_sum = g_sum + gi.truncate(g.max_pow)
        f_prod = f_prod * fi
    assert g.agrees_with(g_sum, through=g.max_pow)
    assert f.agrees_with(f_prod, through=order)


@pytest.mark.parametrize("n", range(1, 8))
def test_pn_exponent_zeta2_coefficient(n):
    _, g = canonical_pair(pn_spec(n), 2)
    assert g.coeff(1) == G * -n
    assert g.coeff(2).coeff(zeta_mono(2)) == Fraction(-n, 2)


@pytest.mark.parametrize("j", range(1, 8))
def test_bar_delta_removes_transcendentals(j):
    specs = [delta_spec(i) for i in range(j + 1)]
    order = 3
    prod = LaurentSeries.const(1)
    for i in range(j):
        prod = prod * expand(specs[i], order + j)
    prod = prod * expand(bar_delta(specs, j), order + j)
    assert prod.truncate(order).is_rational()


def test_bar_delta_first_member_inverts_exponent():
    specs = [delta_spec(0), delta_spec(1)]
    _, g_bar = canonical_pair(bar_delta(specs, 1), 4)
    _, g0 = canonical_pair(specs[0], 4)
    assert (g_bar + g0).truncate(4).is_zero()
    with pytest.raises(ValueError):
        bar_delta(specs, 0)


def test_deltaspec_text_round_trip():
    spec = bubble_master((1, Fraction(3, 2)), (1, Fraction(-1, 3)))
    assert DeltaSpec.from_text(spec.to_text()) == spec
    with pytest.raises(ValueError):
        DeltaSpec.from_text("deltaspec\nnum = 1\n")


def test_order_beyond_zeta_bound_is_an_error():
    with pytest.raises(TruncationError):
        delta_j(0, 13)


def test_topology_from_text():
    top = Topology.from_text("loops = 2\na_eps = 1\n# comment\n", name="two")
    assert top.loops == 2 and top.a_eps == 1
    with pytest.raises(ValueError):
        Topology.from_text("colour = red")


# -- form-factor matrices

def _finite_top():
    def make(j):
        s = delta_spec(j)
        # (j+1) eps Delta_j: finite, with the writhe entering only at O(eps)
        num = (Fraction(0),) + tuple((j + 1) * c for c in s.num)
        return DeltaSpec(num, s.den, s.gammas, s.loops, s.scaling_weight)
    return SpecTopology("fin", 1, make)


def test_identity_matrix_is_neutral():
    m = MatrixTopology("m", ((BASIC, BASIC), (_finite_top(), BASIC))).at(1, 2)
    one = DeltaMatrix.identity(2)
    for a, b in ((m * one, m), (one * m, m)):
        assert all(a[i, k] == b[i, k] for i in range(2) for k in range(2))


def test_matrix_dimension_mismatch():
    with pytest.raises(ValueError):
        matrix_concat(DeltaMatrix.identity(2), DeltaMatrix.identity(3))


def test_two_loop_matrix_counterterm():
    other = Topology("other", a_eps=Fraction(1, 2))
    mt = MatrixTopology("qed", ((BASIC, other), (other, BASIC)))
    order = 3
    z = z_ladder(2, LadderFamily((mt, mt)), order=order).series
    d11, d12 = (t.series(1, order) for t in (BASIC, other))
    i11, i21 = (t.series(0, order) for t in (BASIC, other))
    # the subtracted term restarts the outer factor at writhe zero
    want = (d11 * i11 + d12 * i21).pole_part() - (i11 * i11.pole_part()).pole_part()
    assert z == want


def test_finite_form_factor_cancels():
    fin = _finite_top()
    mt = MatrixTopology("ff", ((BASIC, None), (fin, None)), divergent=frozenset({0, 1}))
    inner, outer = mt.at(0, 3), mt.at(1, 3)
    diff = matrix_pole(outer * inner) - matrix_pole(inner * matrix_pole(inner))
    assert diff[1, 0].is_zero()
    assert not diff[0, 0].is_zero()


def test_matrix_pole_zeroes_convergent_rows():
    m = MatrixTopology("m", ((BASIC, BASIC), (BASIC, BASIC))).at(0, 2)
    p = matrix_pole(m)
    assert p[1, 0].is_zero() and p[1, 1].is_zero()
    assert p[0, 0] == LaurentSeries.monomial(-1)


def test_gamma_factor_sign():
    assert GammaFactor(Fraction(1), "num").sign == 1
    assert GammaFactor(Fraction(1), "den").sign == -1
