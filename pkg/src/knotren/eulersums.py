"""Counting formulas for Euler sums and the zig-zag counterterm series."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .symexpr import TransMonomial, ZetaPoly, zeta_mono


@dataclass(frozen=True, order=True)
class SumSymbol:
    """zeta(s), N(a,b[,c]) or U(a,b); level = sum of args, depth = len(args)."""

    kind: str
    args: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("zeta", "N", "U"):
            raise ValueError(f"unknown sum kind {self.kind!r}")
        if any(a <= 0 for a in self.args):
            raise ValueError("arguments must be positive")
        if self.kind == "zeta" and (len(self.args) != 1 or self.args[0] < 2):
            raise ValueError("zeta takes one argument >= 2")
        if self.kind == "U" and len(self.args) != 2:
            raise ValueError("U takes two arguments")

    @property
    def level(self) -> int:
        return sum(self.args)

    @property
    def depth(self) -> int:
        return len(self.args)

    def text(self) -> str:
        if self.kind == "zeta":
            return f"zet({self.args[0]})"
        return f"{self.kind}({','.join(map(str, self.args))})"

    def monomial(self) -> TransMonomial:
        if self.kind == "zeta":
            return zeta_mono(self.args[0])
        return TransMonomial.make(extra={self.text(): 1})


def zeta(s: int) -> SumSymbol:
    return SumSymbol("zeta", (s,))


def mobius(d: int) -> int:
    if d < 1:
        raise ValueError("mobius needs d >= 1")
    out, p = 1, 2
    while p * p <= d:
        if d % p == 0:
            d //= p
            if d % p == 0:
                return 0
            out = -out
        p += 1
    return -out if d > 1 else out


def divisors(k: int) -> list[int]:
    return [d for d in range(1, k + 1) if k % d == 0]


def euler_count(l: int, k: int) -> int:
    """E(l, k): coefficient of x^((l-k)/2) in sum_{d|k} mu(d) (1-x^d)^(-k/d) / k."""
    if k < 1 or l < k or (l - k) % 2:
        return 0
    n = (l - k) // 2
    total = Fraction(0)
    for d in divisors(k):
        if n % d == 0:
            m = k // d
            # (1 - y)^-m has coefficient C(j + m - 1, m - 1) at y^j, y = x^d
            total += mobius(d) * comb(n // d + m - 1, m - 1)
    total /= k
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral E({l},{k})")
    return int(total)


def euler_series(k: int, terms: int) -> list[Fraction]:
    """First ``terms`` coefficients of the generating function, built by
    multiplying truncated power series (no binomial closed form)."""
    out = [Fraction(0)] * terms
    for d in divisors(k):
        m = k // d
        base = [Fraction(1) if (j % d == 0) else Fraction(0) for j in range(terms)]
        ser = [Fraction(1)] + [Fraction(0)] * (terms - 1)
        for _ in range(m):
            ser = [sum(ser[i] * base[j - i] for i in range(j + 1)) for j in range(terms)]
        for j in range(terms):
            out[j] += mobius(d) * ser[j]
    return [c / k for c in out]


def search_space(l: int, k: int) -> int:
    """S(l, k) = sum_{n<k} C(floor((l+n-1)/2), n)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return sum(comb((l + n - 1) // 2, n) for n in range(k))


def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("catalan needs n >= 0")
    return comb(2 * n, n) // (n + 1)


def zigzag_coefficient(n: int) -> Fraction:
    """Rational factor in front of zeta(2n-3) for the n-loop zig-zag graph."""
    if n < 3:
        raise ValueError("zig-zag graphs start at three loops")
    c = Fraction(4 * catalan(n - 1))
    if n % 2:
        # sum (-1)^(p-1) / p^s = (1 - 2^(1-s)) zeta(s), s = 2n - 3
        c *= 1 - Fraction(1, 2 ** (2 * n - 4))
    return c


def zigzag_term(n: int, precision: int | None = None):
    """(symbolic ZetaPoly, numeric value) of the n-loop zig-zag counterterm."""
    from .numerics import zeta_f

    c = zigzag_coefficient(n)
    sym = ZetaPoly.mono(zeta_mono(2 * n - 3), c)
    val = zeta_f(2 * n - 3, precision)
    return sym, val.scaled(c)


def zigzag_signed_sum(n: int, terms: int = 2000, precision: int | None = None):
    """4 C_(n-1) sum_p (-1)^(pn-n) / p^(2n-3), summed directly."""
    import mpmath as mp
    from .numerics import DEFAULT_BITS

    with mp.workprec(precision or DEFAULT_BITS):
        s = 2 * n - 3
        total = mp.nsum(lambda p: (-1) ** int((p * n - n) % 2) / mp.mpf(p) ** s, [1, mp.inf])
        return 4 * catalan(n - 1) * total


# -- irreducible families

def family_counts(L: int) -> dict[str, list[SumSymbol]]:
    """Families of irreducible sums that can appear up to L loops."""
    if L < 3:
        raise ValueError("L must be at least 3")
    d1 = [zeta(2 * a + 1) for a in range(1, L - 1)]
    d2 = []
    for a in range(1, L):
        for b in range(1, a):
            if a + b <= L - 3:
                d2.append(SumSymbol("U", (2 * a + 1, 2 * b + 1)))
    d3 = []
    for a in range(1, L):
        for b in range(1, a + 1):
            for c in range(1, b + 1):
                if a > c and a + b + c <= L - 3:
                    d3.append(SumSymbol("N", (2 * a + 1, 2 * b + 1, 2 * c + 1)))
    return {"depth1": d1, "depth2": d2, "depth3": d3}


def depth2_at_level(level: int) -> int:
    """Direct count of pairs a > b > 0 with 2(a+b) + 2 = level."""
    if level % 2:
        return 0
    t = (level - 2) // 2
    return sum(1 for a in range(1, t) if 0 < t - a < a)


def grid(l_max: int, k_max: int) -> list[tuple[int, int, int, int]]:
    """(l, k, E(l,k), S(l,k)) rows for report output."""
    return [(l, k, euler_count(l, k), search_space(l, k))
            for l in range(1, l_max + 1) for k in range(1, k_max + 1)
            if (l - k) % 2 == 0 and l >= k]
