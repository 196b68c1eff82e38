"""High-precision evaluation of zeta values and series, and the search for
simple rational combinations of a small basis of constants."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath as mp

from .symexpr import LaurentSeries, ZetaPoly

DEFAULT_BITS = 256
PRECISION_ENV = "KNOTREN_PRECISION"


def default_bits() -> int:
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            bits = int(env)
        except ValueError:
            raise ValueError(f"{PRECISION_ENV} must be an integer number of bits") from None
        if bits < 16:
            raise ValueError(f"{PRECISION_ENV} must be at least 16")
        return bits
    return DEFAULT_BITS


@dataclass(frozen=True)
class PrecisionFloat:
    """mpf value with an absolute error bound, tagged with its working precision."""

    value: mp.mpf
    error: mp.mpf
    bits: int

    def scaled(self, c) -> "PrecisionFloat":
        with mp.workprec(self.bits + 16):
            f = mp.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mp.mpf(c)
            return PrecisionFloat(self.value * f, self.error * abs(f), self.bits)

    def __add__(self, other: "PrecisionFloat") -> "PrecisionFloat":
        bits = min(self.bits, other.bits)
        with mp.workprec(bits + 16):
            return PrecisionFloat(self.value + other.value, self.error + other.error, bits)

    def __mul__(self, other: "PrecisionFloat") -> "PrecisionFloat":
        bits = min(self.bits, other.bits)
        with mp.workprec(bits + 16):
            err = (abs(self.value) * other.error + abs(other.value) * self.error
                   + self.error * other.error)
            return PrecisionFloat(self.value * other.value, err, bits)

    def __float__(self):
        return float(self.value)

    def close_to(self, x, tol=None) -> bool:
        with mp.workprec(self.bits + 16):
            tol = self.error if tol is None else mp.mpf(tol)
            return abs(self.value - x) <= tol

    def digits(self, n: int = 15) -> str:
        return mp.nstr(self.value, n)


def _mpf_of(c: Fraction) -> mp.mpf:
    return mp.mpf(c.numerator) / c.denominator


# ---------------------------------------------------------------------------
# constants

@lru_cache(maxsize=None)
def _zeta_em(s: int, bits: int) -> tuple[mp.mpf, mp.mpf]:
    """Euler-Maclaurin: returns (value, bound on the omitted remainder)."""
    target = mp.mpf(2) ** (-bits - 4)
    with mp.workprec(bits + 32):
        n = max(10, bits // 3)
        while True:
            m = n
            head = mp.fsum(mp.mpf(k) ** (-s) for k in range(1, n))
            big_n = mp.mpf(n)
            tail = big_n ** (1 - s) / (s - 1) + big_n ** (-s) / 2
            poch = mp.mpf(s)  # s (s+1) ... (s+2j-2)
            corr = []
            for j in range(1, m + 1):
                corr.append(mp.bernoulli(2 * j) / mp.factorial(2 * j) * poch
                            * big_n ** (-s - 2 * j + 1))
                poch *= (s + 2 * j - 1) * (s + 2 * j)
            nxt = abs(mp.bernoulli(2 * m + 2) / mp.factorial(2 * m + 2) * poch
                      * big_n ** (-s - 2 * m - 1))
            if nxt < target:
                err = 2 * nxt + mp.mpf(2) ** (-bits - 16)
                return +(head + tail + mp.fsum(corr)), err
            n *= 2


def zeta_f(s: int, precision: int | None = None) -> PrecisionFloat:
    """zeta(s) for integer s >= 2 by Euler-Maclaurin summation."""
    if int(s) != s or s < 2:
        raise ValueError("zeta_f needs an integer s >= 2")
    bits = precision or default_bits()
    val, err = _zeta_em(int(s), bits)
    return PrecisionFloat(val, err, bits)


def eta_f(s: int, precision: int | None = None) -> PrecisionFloat:
    """Alternating sum sum (-1)^(p-1)/p^s = (1 - 2^(1-s)) zeta(s)."""
    z = zeta_f(s, precision)
    return z.scaled(1 - Fraction(1, 2 ** (s - 1)))


@lru_cache(maxsize=None)
def _gamma_const(bits: int) -> mp.mpf:
    with mp.workprec(bits + 32):
        return +mp.euler


def euler_gamma(precision: int | None = None) -> PrecisionFloat:
    bits = precision or default_bits()
    return PrecisionFloat(_gamma_const(bits), mp.mpf(2) ** (-bits - 16), bits)


def harmonic_gamma(n_terms: int = 2000, precision: int | None = None) -> mp.mpf:
    """gamma = H_N - log N - 1/(2N) + sum B_2k / (2k N^2k), a separate route."""
    bits = precision or default_bits()
    with mp.workprec(bits + 32):
        big_n = mp.mpf(n_terms)
        h = mp.fsum(mp.mpf(1) / k for k in range(1, n_terms + 1))
        corr = mp.fsum(mp.bernoulli(2 * k) / (2 * k * big_n ** (2 * k)) for k in range(1, 60))
        return h - mp.log(big_n) - 1 / (2 * big_n) + corr


# ---------------------------------------------------------------------------
# series

class OpaqueSymbolError(ValueError):
    pass


def eval_poly(p: ZetaPoly, precision: int | None = None) -> PrecisionFloat:
    bits = precision or default_bits()
    with mp.workprec(bits + 32):
        total = mp.mpf(0)
        err = mp.mpf(0)
        for mono, c in p.items():
            if mono.extra:
                raise OpaqueSymbolError(f"cannot evaluate opaque symbol {mono.extra[0][0]}")
            val = _mpf_of(c)
            rel = mp.mpf(0)
            g = euler_gamma(bits)
            for _ in range(mono.gamma_exp):
                val *= g.value
                rel += g.error / g.value
            for s, e in mono.zeta_exps:
                z = zeta_f(s, bits)
                val *= z.value ** e
                rel += e * z.error / z.value
            total += val
            err += abs(val) * rel * 2
        return PrecisionFloat(total, err, bits)


def eval_series_numeric(s: LaurentSeries, eps, precision: int | None = None) -> PrecisionFloat:
    """Sum the known coefficients of ``s`` at eps = ``eps``.

    The error bound covers the constants only; the truncation remainder is
    the caller's business.
    """
    bits = precision or default_bits()
    with mp.workprec(bits + 32):
        x = _mpf_of(Fraction(eps)) if isinstance(eps, (int, Fraction, str)) else mp.mpf(eps)
        if x == 0:
            raise ValueError("eps must be non-zero")
        total = mp.mpf(0)
        err = mp.mpf(0)
        for k, coeff in s.items():
            c = eval_poly(coeff, bits)
            total += c.value * x ** k
            err += c.error * abs(x) ** k
        return PrecisionFloat(total, err, bits)


# ---------------------------------------------------------------------------
# the Gegenbauer check

_HEAD_TERMS = 1000


def gegenbauer_zeta3_check(n_max: int) -> PrecisionFloat:
    """Partial sum of 1/(n+1)^3 for n = 0..N with its tail bound 1/(2 N^2).

    The first terms are summed in extended precision and the small ones in
    floats, so rounding stays far below the tail.  Raises if the partial
    sum and zeta(3) disagree beyond the bound.
    """
    if n_max < 1:
        raise ValueError("N must be at least 1")
    split = min(n_max, _HEAD_TERMS - 1)
    with mp.workprec(96):
        head = mp.fsum(mp.mpf(1) / (n + 1) ** 3 for n in range(split + 1))
        small = math.fsum(1 / (n + 1) ** 3 for n in range(split + 1, n_max + 1))
        partial = head + small
        bound = mp.mpf(1) / (2 * mp.mpf(n_max) ** 2)
        # half an ulp per float term below 1e-9, plus the extended-precision head
        slack = (n_max - split) * mp.mpf(2) ** -53 / _HEAD_TERMS ** 3 + mp.mpf(2) ** -88
        gap = zeta_f(3, 96).value - partial
        if not -slack <= gap <= bound + slack:
            raise ArithmeticError(f"partial sum {mp.nstr(partial, 20)} is not within "
                                  f"{mp.nstr(bound, 5)} of zeta(3)")
        return PrecisionFloat(partial, bound + slack, 96)


# ---------------------------------------------------------------------------
# fitting

class FitFailure(ValueError):
    """No stable rational combination was found."""


def basis_value(sym, precision: int) -> mp.mpf:
    kind = getattr(sym, "kind", None)
    if kind != "zeta":
        raise OpaqueSymbolError(f"cannot evaluate basis element {getattr(sym, 'text', lambda: sym)()}")
    return zeta_f(sym.args[0], precision).value


def _fit_once(value: mp.mpf, basis_vals: Sequence[mp.mpf], max_den: int,
              max_coeff: int, threshold: mp.mpf) -> list[Fraction] | None:
    k = len(basis_vals)
    last = basis_vals[-1]
    for q in range(1, max_den + 1):
        if k == 1:
            p = int(mp.nint(value * q / last))
            if abs(value - p * last / q) < threshold:
                return [Fraction(p, q)]
            continue
        bound = max_coeff * q
        for head in _grid(k - 1, bound):
            rest = value - mp.fsum(h * b for h, b in zip(head, basis_vals)) / q
            p = int(mp.nint(rest * q / last))
            if abs(rest - p * last / q) < threshold:
                return [Fraction(h, q) for h in head] + [Fraction(p, q)]
    return None


def _grid(dims: int, bound: int):
    if dims == 0:
        yield ()
        return
    for h in range(-bound, bound + 1):
        for rest in _grid(dims - 1, bound):
            yield (h,) + rest


def fit_rational_combination(value: PrecisionFloat, basis: Sequence, max_denominator: int = 64,
                             max_coefficient: int = 1000) -> list[Fraction]:
    """Rationals a_i with small denominators and value = sum a_i basis_i.

    The fit must hold below a threshold of 2^(-3b/4) at the value's
    precision b and give the same answer when only b/2 bits are used.
    Coefficients of multi-element bases are searched in
    [-max_coefficient, max_coefficient].
    """
    if not 1 <= len(basis) <= 4:
        raise ValueError("basis must have between 1 and 4 elements")
    bits = value.bits
    results = []
    for b in (bits // 2, bits):
        with mp.workprec(b + 16):
            vals = [basis_value(s, b) for s in basis]
            x = +value.value
            thr = max(mp.mpf(2) ** (-(3 * b) // 4) * max(1, abs(x)), 4 * value.error)
            results.append(_fit_once(x, vals, max_denominator, max_coefficient, thr))
    if results[0] is None or results[1] is None:
        raise FitFailure("no rational combination within the residual threshold")
    if results[0] != results[1]:
        raise FitFailure(f"fit changes with precision: {results[0]} vs {results[1]}")
    return results[1]
