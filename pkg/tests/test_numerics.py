from __future__ import annotations

from fractions import Fraction

import mpmath as mp
import pytest

from knotren import numerics
from knotren.eulersums import SumSymbol, zeta, zigzag_term
from knotren.numerics import (
    FitFailure,
    OpaqueSymbolError,
    PrecisionFloat,
    default_bits,
    eta_f,
    euler_gamma,
    eval_poly,
    eval_series_numeric,
    fit_rational_combination,
    gegenbauer_zeta3_check,
    harmonic_gamma,
    zeta_f,
)
from knotren.oneloop import delta_j
from knotren.symexpr import parse_poly


@pytest.mark.parametrize("bits", [64, 256])
def test_zeta_within_its_bound(bits):
    for s in range(2, 13):
        z = zeta_f(s, bits)
        with mp.workprec(bits + 64):
            ref = mp.zeta(s)
            assert abs(z.value - ref) <= z.error
            assert z.error < mp.mpf(2) ** (-bits)


def test_zeta_rejects_bad_argument():
    for s in (1, 0, 2.5):
        with pytest.raises(ValueError):
            zeta_f(s)


def test_eta_matches_alternating_zeta():
    for s in (2, 3, 7):
        with mp.workprec(200):
            assert abs(eta_f(s, 160).value - mp.altzeta(s)) < mp.mpf(10) ** -45


def test_gamma_two_routes():
    with mp.workprec(256):
        assert abs(euler_gamma(200).value - harmonic_gamma(2000, 200)) < mp.mpf(10) ** -55


def test_default_precision_from_environment(monkeypatch):
    monkeypatch.delenv(numerics.PRECISION_ENV, raising=False)
    assert default_bits() == numerics.DEFAULT_BITS
    monkeypatch.setenv(numerics.PRECISION_ENV, "100")
    assert default_bits() == 100
    assert zeta_f(3).bits == 100
    monkeypatch.setenv(numerics.PRECISION_ENV, "ten")
    with pytest.raises(ValueError):
        default_bits()


def test_precision_float_arithmetic():
    a = PrecisionFloat(mp.mpf(2), mp.mpf("1e-10"), 64)
    b = PrecisionFloat(mp.mpf(3), mp.mpf("2e-10"), 128)
    s, p = a + b, a * b
    assert s.bits == 64 and p.bits == 64
    assert s.close_to(5) and abs(s.error - mp.mpf("3e-10")) < mp.mpf("1e-20")
    assert p.error >= 2 * mp.mpf("2e-10") + 3 * mp.mpf("1e-10")
    assert a.scaled(Fraction(1, 2)).close_to(1)
    assert float(a) == 2.0


def test_eval_poly():
    v = eval_poly(parse_poly("3/2*zet(3) - ge^2 + 4"), 128)
    with mp.workprec(160):
        ref = mp.mpf(3) / 2 * mp.zeta(3) - mp.euler ** 2 + 4
        assert abs(v.value - ref) <= v.error + mp.mpf(2) ** -120
    with pytest.raises(OpaqueSymbolError):
        eval_poly(parse_poly("N(5,3)"))


def test_eval_series_against_closed_form():
    eps = Fraction(1, 1000)
    s = delta_j(0, 8)
    with mp.workprec(200):
        e = mp.mpf(1) / 1000
        ref = mp.gamma(e) * mp.gamma(1 - e) ** 2 / mp.gamma(2 - 2 * e)
        got = eval_series_numeric(s, eps, 200)
        # truncation remainder after eps^8 is of order eps^9 * 2^9
        assert abs(got.value - ref) < mp.mpf(10) ** -22
    with pytest.raises(ValueError):
        eval_series_numeric(s, 0)


def test_gegenbauer_small_and_large():
    assert gegenbauer_zeta3_check(1).value == mp.mpf(9) / 8
    small = gegenbauer_zeta3_check(10)
    assert small.error > 1e-3
    big = gegenbauer_zeta3_check(10 ** 6)
    with mp.workprec(80):
        assert abs(big.value - mp.zeta(3)) < 5e-13
    with pytest.raises(ValueError):
        gegenbauer_zeta3_check(0)


@pytest.mark.parametrize("n, c", [(3, Fraction(6)), (4, Fraction(20)), (5, Fraction(441, 8))])
def test_fit_round_trip(n, c):
    _, value = zigzag_term(n)
    assert fit_rational_combination(value, [zeta(2 * n - 3)]) == [c]


@pytest.mark.parametrize("rel", ["1e-10", "1e-20", "1e-30"])
def test_fit_rejects_perturbed_value(rel):
    _, v = zigzag_term(3)
    with mp.workprec(v.bits + 32):
        bumped = PrecisionFloat(v.value * (1 + mp.mpf(rel)), v.error, v.bits)
    with pytest.raises(FitFailure):
        fit_rational_combination(bumped, [zeta(3)])


def test_fit_two_element_basis():
    with mp.workprec(300):
        x = 3 * zeta_f(3).value - zeta_f(5).value / 2
    value = PrecisionFloat(x, mp.mpf(2) ** -250, 256)
    assert fit_rational_combination(value, [zeta(3), zeta(5)], max_coefficient=10) == \
        [Fraction(3), Fraction(-1, 2)]


def test_fit_argument_errors():
    _, v = zigzag_term(3)
    with pytest.raises(OpaqueSymbolError):
        fit_rational_combination(v, [SumSymbol("U", (5, 3))])
    with pytest.raises(ValueError):
        fit_rational_combination(v, [])
