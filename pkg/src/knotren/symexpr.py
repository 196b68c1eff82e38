"""Exact arithmetic kernel.

Rationals are :class:`fractions.Fraction`.  Coefficients of the epsilon
expansions live in :class:`ZetaPoly`, a polynomial ring over Q whose
generators are the transcendental constants plus opaque Euler-sum labels,
all treated as algebraically independent.  :class:`LaurentSeries`
carries its own truncation order so that no operation can silently use a
coefficient that was never computed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

Rational = Fraction
Number = Union[int, Fraction]

#: largest zeta index an expansion may produce; see :func:`set_max_zeta`
MAX_ZETA = 12


def set_max_zeta(k: int) -> int:
    """Set the global zeta-index bound K and return the previous value."""
    global MAX_ZETA
    if k < 2:
        raise ValueError("zeta index bound must be at least 2")
    old, MAX_ZETA = MAX_ZETA, int(k)
    return old


class TruncationError(ArithmeticError):
    """Raised when a coefficient beyond the known truncation order is needed."""


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# ---------------------------------------------------------------------------
# monomials

_EXTRA_RE = re.compile(r"^([NU])\((\d+(?:,\d+)*)\)$")


def symbol_level(name: str) -> int:
    """Transcendental level of an opaque symbol such as ``N(5,3)``."""
    m = _EXTRA_RE.match(name)
    if not m:
        raise ValueError(f"unknown symbol {name!r}")
    return sum(int(a) for a in m.group(2).split(","))


@dataclass(frozen=True, order=True)
class TransMonomial:
    """Product γ^g · Π ζ(s)^e · Π extra^e with zero exponents dropped."""

    gamma_exp: int = 0
    zeta_exps: tuple[tuple[int, int], ...] = ()
    extra: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.gamma_exp < 0:
            raise ValueError("negative power of gamma")
        for s, e in self.zeta_exps:
            if s < 2 or e <= 0:
                raise ValueError(f"bad zeta factor zet({s})^{e}")
        for name, e in self.extra:
            if e <= 0:
                raise ValueError(f"bad exponent on {name}")

    @staticmethod
    def make(gamma_exp: int = 0, zetas: Mapping[int, int] | None = None,
             extra: Mapping[str, int] | None = None) -> "TransMonomial":
        z = tuple(sorted((int(s), int(e)) for s, e in (zetas or {}).items() if e))
        x = tuple(sorted((str(n), int(e)) for n, e in (extra or {}).items() if e))
        return TransMonomial(int(gamma_exp), z, x)

    @property
    def is_unit(self) -> bool:
        return not (self.gamma_exp or self.zeta_exps or self.extra)

    @property
    def level(self) -> int:
        return (self.gamma_exp + sum(s * e for s, e in self.zeta_exps)
                + sum(symbol_level(n) * e for n, e in self.extra))

    def zeta_power(self, s: int) -> int:
        return dict(self.zeta_exps).get(s, 0)

    def __mul__(self, other: "TransMonomial") -> "TransMonomial":
        return _mono_mul(self, other)

    def text(self) -> str:
        parts = []
        for name, e in reversed(self.extra):
            parts.append(name if e == 1 else f"{name}^{e}")
        for s, e in reversed(self.zeta_exps):
            parts.append(f"zet({s})" if e == 1 else f"zet({s})^{e}")
        if self.gamma_exp:
            parts.append("ge" if self.gamma_exp == 1 else f"ge^{self.gamma_exp}")
        return "*".join(parts)

    def sort_key(self):
        # higher level first, then a stable structural order
        return (-self.level, tuple(-s for s, _ in reversed(self.zeta_exps)),
                tuple(-e for _, e in reversed(self.zeta_exps)), -self.gamma_exp,
                self.extra)


UNIT = TransMonomial()
GAMMA = TransMonomial(1)


def zeta_mono(s: int, e: int = 1) -> TransMonomial:
    return TransMonomial(0, ((s, e),))


@lru_cache(maxsize=65536)
def _mono_mul(a: TransMonomial, b: TransMonomial) -> TransMonomial:
    if a.is_unit:
        return b
    if b.is_unit:
        return a
    z = dict(a.zeta_exps)
    for s, e in b.zeta_exps:
        z[s] = z.get(s, 0) + e
    x = dict(a.extra)
    for n, e in b.extra:
        x[n] = x.get(n, 0) + e
    return TransMonomial(a.gamma_exp + b.gamma_exp, tuple(sorted(z.items())),
                         tuple(sorted(x.items())))


# ---------------------------------------------------------------------------
# zeta polynomials

class ZetaPoly:
    """Finite Q-linear combination of :class:`TransMonomial`."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[TransMonomial, Number] | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[m] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def const(cls, c: Number) -> "ZetaPoly":
        return cls({UNIT: c})

    @classmethod
    def mono(cls, m: TransMonomial, c: Number = 1) -> "ZetaPoly":
        return cls({m: c})

    @classmethod
    def _raw(cls, terms: dict) -> "ZetaPoly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @property
    def terms(self) -> Mapping[TransMonomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def coeff(self, m: TransMonomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def is_rational(self) -> bool:
        return all(m.is_unit for m in self._terms)

    def constant(self) -> Fraction:
        return self._terms.get(UNIT, Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ZetaPoly.const(other)
        if not isinstance(other, ZetaPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return ZetaPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ZetaPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZetaPoly()
            return ZetaPoly._raw({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, ZetaPoly):
            return NotImplemented
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Number):
        return self * (1 / Fraction(other))

    def __pow__(self, k: int):
        out = ZetaPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def substitute(self, values: Mapping[str, Number]) -> "ZetaPoly":
        """Replace ``ge`` / ``zet(s)`` by rationals (only those named)."""
        out = ZetaPoly()
        for m, c in self._terms.items():
            factor = Fraction(c)
            g = m.gamma_exp
            if g and "ge" in values:
                factor *= Fraction(values["ge"]) ** g
                g = 0
            zs = {}
            for s, e in m.zeta_exps:
                key = f"zet({s})"
                if key in values:
                    factor *= Fraction(values[key]) ** e
                else:
                    zs[s] = e
            if factor:
                out = out + ZetaPoly.mono(TransMonomial.make(g, zs, dict(m.extra)), factor)
        return out

    def text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m in sorted(self._terms, key=TransMonomial.sort_key):
            c = self._terms[m]
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if m.is_unit:
                body = str(mag)
            elif mag == 1:
                body = m.text()
            else:
                body = f"{mag}*{m.text()}"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"ZetaPoly({self.text()!r})"


def _as_poly(x):
    if isinstance(x, ZetaPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return ZetaPoly.const(x)
    return None


def poly_mul(a: ZetaPoly, b: ZetaPoly) -> ZetaPoly:
    out: dict = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            m = _mono_mul(ma, mb)
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return ZetaPoly._raw(out)


ZERO_POLY = ZetaPoly()
ONE_POLY = ZetaPoly.const(1)


# ---------------------------------------------------------------------------
# Laurent series

class LaurentSeries:
    """Laurent series in the regulator with :class:`ZetaPoly` coefficients.

    ``max_pow`` is the highest power whose coefficient is known; ``None``
    marks an exact (finite) Laurent polynomial.  Coefficients below the
    lowest stored power are exactly zero.
    """

    __slots__ = ("_c", "max_pow")

    def __init__(self, coeffs: Mapping[int, ZetaPoly | Number] | None = None,
                 max_pow: int | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = _as_poly(v)
            if v is None:
                raise TypeError("series coefficient must be a ZetaPoly or rational")
            if v and (max_pow is None or k <= max_pow):
                c[int(k)] = v
        self._c = c
        self.max_pow = max_pow

    # -- construction helpers
    @classmethod
    def const(cls, c: Number | ZetaPoly, max_pow: int | None = None) -> "LaurentSeries":
        return cls({0: c}, max_pow)

    @classmethod
    def monomial(cls, power: int, c: Number | ZetaPoly = 1,
                 max_pow: int | None = None) -> "LaurentSeries":
        return cls({power: c}, max_pow)

    @classmethod
    def zero(cls, max_pow: int | None = None) -> "LaurentSeries":
        return cls({}, max_pow)

    # -- inspection
    @property
    def min_pow(self) -> int | None:
        """Lowest power with a non-zero coefficient (None for zero)."""
        return min(self._c) if self._c else None

    @property
    def exact(self) -> bool:
        return self.max_pow is None

    def powers(self) -> list[int]:
        return sorted(self._c)

    def items(self):
        return sorted(self._c.items())

    def coeff(self, k: int) -> ZetaPoly:
        if self.max_pow is not None and k > self.max_pow:
            raise TruncationError(f"coefficient of eps^{k} unknown "
                                  f"(series truncated at eps^{self.max_pow})")
        return self._c.get(k, ZERO_POLY)

    def __getitem__(self, k: int) -> ZetaPoly:
        return self.coeff(k)

    def is_zero(self) -> bool:
        return not self._c

    def is_rational(self) -> bool:
        return all(v.is_rational() for v in self._c.values())

    def _lead(self) -> float | int:
        # leading power for the truncation rule; an unknown-zero series
        # counts as starting just past its truncation
        if self._c:
            return min(self._c)
        return float("inf") if self.max_pow is None else self.max_pow + 1

    # -- comparisons
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            other = LaurentSeries.const(other, self.max_pow)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.max_pow == other.max_pow and self._c == other._c

    def __hash__(self):
        return hash((self.max_pow, frozenset(self._c.items())))

    def agrees_with(self, other: "LaurentSeries", through: int | None = None) -> bool:
        """Coefficient equality on the common known window (or up to ``through``)."""
        top = _min_opt(self.max_pow, other.max_pow)
        if through is not None:
            top = through if top is None else min(top, through)
        keys = set(self._c) | set(other._c)
        for k in keys:
            if top is not None and k > top:
                continue
            if self.coeff(k) != other.coeff(k):
                return False
        return True

    # -- arithmetic
    def truncate(self, max_pow: int | None) -> "LaurentSeries":
        if max_pow is None:
            return self
        if self.max_pow is not None and max_pow > self.max_pow:
            raise TruncationError(f"cannot extend series known through eps^{self.max_pow} "
                                  f"to eps^{max_pow}")
        return LaurentSeries(self._c, max_pow)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            other = LaurentSeries.const(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        top = _min_opt(self.max_pow, other.max_pow)
        out = dict(self._c)
        for k, v in other._c.items():
            s = out.get(k, ZERO_POLY) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentSeries(out, top)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries({k: -v for k, v in self._c.items()}, self.max_pow)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            other = LaurentSeries.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            return LaurentSeries({k: v * other for k, v in self._c.items()}, self.max_pow)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return series_mul(self, other)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by eps^k."""
        top = None if self.max_pow is None else self.max_pow + k
        return LaurentSeries({p + k: v for p, v in self._c.items()}, top)

    def pole_part(self) -> "LaurentSeries":
        return pole_part(self)

    def map_coeffs(self, fn) -> "LaurentSeries":
        return LaurentSeries({k: fn(v) for k, v in self._c.items()}, self.max_pow)

    def text(self) -> str:
        return format_series(self)

    def __repr__(self):
        return f"LaurentSeries({format_series(self)!r})"


def _min_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def series_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    if a.max_pow is None and b.max_pow is None:
        top = None
    else:
        la, lb = a._lead(), b._lead()
        cands = []
        if a.max_pow is not None:
            cands.append(a.max_pow + lb)
        if b.max_pow is not None:
            cands.append(b.max_pow + la)
        t = min(cands)
        # a zero exact factor makes the product exactly zero
        top = None if t == float("inf") else int(t)
    out: dict = {}
    for ka, va in a._c.items():
        for kb, vb in b._c.items():
            k = ka + kb
            if top is not None and k > top:
                continue
            s = out.get(k, ZERO_POLY) + poly_mul(va, vb)
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return LaurentSeries(out, top)


def series_exp(g: LaurentSeries, order: int | None = None) -> LaurentSeries:
    """exp(g) for g without pole or constant term, through ``order``.

    ``order`` defaults to the truncation of ``g``; an exact ``g`` needs an
    explicit order because its exponential is an infinite series.
    """
    if g.min_pow is not None and g.min_pow < 1:
        raise ValueError("series_exp needs a series without pole or constant term")
    if order is None:
        if g.max_pow is None:
            raise ValueError("series_exp of an exact series needs an explicit order")
        order = g.max_pow
    elif g.max_pow is not None and order > g.max_pow:
        raise TruncationError(f"exp requested through eps^{order} but exponent "
                              f"known only through eps^{g.max_pow}")
    # e_k = (1/k) sum_{m=1..k} m g_m e_{k-m}
    e = [ONE_POLY]
    gs = [g._c.get(m, ZERO_POLY) for m in range(order + 1)]
    for k in range(1, order + 1):
        acc = ZERO_POLY
        for m in range(1, k + 1):
            if gs[m] and e[k - m]:
                acc = acc + poly_mul(gs[m], e[k - m]) * m
        e.append(acc * Fraction(1, k))
    return LaurentSeries(dict(enumerate(e)), max(order, 0))


def pole_part(s: LaurentSeries) -> LaurentSeries:
    """Projection onto the strictly negative powers; the result is exact."""
    if s.max_pow is not None and s.max_pow < -1:
        raise TruncationError(f"pole part needs coefficients through eps^-1, "
                              f"series known only through eps^{s.max_pow}")
    return LaurentSeries({k: v for k, v in s._c.items() if k < 0}, None)


def rational_series(num: Iterable[Number], den: Iterable[Number], order: int) -> LaurentSeries:
    """Expand num(eps)/den(eps) (ascending coefficient lists) through eps^order."""
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    vn = next((i for i, c in enumerate(num) if c), None)
    vd = next((i for i, c in enumerate(den) if c), None)
    if vd is None:
        raise ZeroDivisionError("zero denominator polynomial")
    if vn is None:
        return LaurentSeries.zero(order)
    num, den = num[vn:], den[vd:]
    val = vn - vd
    n_terms = order - val + 1
    if n_terms <= 0:
        return LaurentSeries.zero(order)
    q: list[Fraction] = []
    for k in range(n_terms):
        acc = num[k] if k < len(num) else Fraction(0)
        for i in range(1, min(k, len(den) - 1) + 1):
            acc -= den[i] * q[k - i]
        q.append(acc / den[0])
    return LaurentSeries({val + k: c for k, c in enumerate(q)}, order)


# ---------------------------------------------------------------------------
# text format

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(.))")


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            toks.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), start))
        elif m.group(3) is not None:
            if m.group(3).strip():
                toks.append(("op", m.group(3), start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.trunc: int | None = None

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.take()
        if t[0] != kind or (value is not None and t[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}", t[2])
        return t

    def parse(self) -> LaurentSeries:
        s = self.sum(top=True)
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        if self.trunc is not None:
            s = LaurentSeries({k: v for k, v in s.items()}, self.trunc)
        return s

    def sum(self, top=False) -> LaurentSeries:
        total = LaurentSeries.zero()
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        while True:
            t = self.peek()
            if top and t[0] == "name" and t[1] == "O":
                self.big_o(t)
            else:
                term = self.product()
                total = total + (term if sign > 0 else -term)
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                sign = -1 if t[1] == "-" else 1
                continue
            return total

    def big_o(self, t):
        self.take()
        self.expect("op", "(")
        if self.peek()[0] == "int":
            one = self.take()
            if one[1] != 1:
                raise ParseError("expected O(1) or O(x^k)", one[2])
            k = 0
        else:
            self.expect("name", "x")
            k = 1
            if self.peek()[1] == "^":
                self.take()
                k = self.signed_int()
        self.expect("op", ")")
        if self.trunc is not None:
            raise ParseError("repeated O(...) term", t[2])
        self.trunc = k - 1

    def signed_int(self) -> int:
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        t = self.expect("int")
        return sign * t[1]

    def product(self) -> LaurentSeries:
        val = self.factor()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                val = val * self.factor()
            elif t[0] == "op" and t[1] == "/":
                self.take()
                d = self.expect("int")
                if d[1] == 0:
                    raise ParseError("division by zero", d[2])
                val = val * Fraction(1, d[1])
            else:
                return val

    def factor(self) -> LaurentSeries:
        t = self.peek()
        base, is_x, is_symbol = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            pos = self.peek()[2]
            e = self.signed_int()
            if e < 0 and not is_x:
                raise ParseError("negative exponent allowed only on x", pos)
            if is_x:
                return LaurentSeries.monomial(e)
            out = LaurentSeries.const(1)
            for _ in range(e):
                out = out * base
            return out
        return base

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "int":
            return LaurentSeries.const(val), False, False
        if kind == "op" and val == "(":
            inner = self.sum()
            self.expect("op", ")")
            return inner, False, False
        if kind == "name":
            if val == "x":
                return LaurentSeries.monomial(1), True, False
            if val == "ge":
                return LaurentSeries.const(ZetaPoly.mono(GAMMA)), False, True
            if val == "zet":
                self.expect("op", "(")
                s = self.expect("int")
                self.expect("op", ")")
                if s[1] < 2:
                    raise ParseError("zet(s) needs s >= 2", s[2])
                return LaurentSeries.const(ZetaPoly.mono(zeta_mono(s[1]))), False, True
            if val in ("N", "U"):
                self.expect("op", "(")
                args = [self.expect("int")[1]]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expect("int")[1])
                self.expect("op", ")")
                if val == "U" and len(args) != 2:
                    raise ParseError("U takes two arguments", pos)
                name = f"{val}({','.join(map(str, args))})"
                mono = TransMonomial.make(extra={name: 1})
                return LaurentSeries.const(ZetaPoly.mono(mono)), False, True
            raise ParseError(f"unknown symbol {val!r}", pos)
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse_series(text: str) -> LaurentSeries:
    """Parse the text grammar (``x`` is the series variable)."""
    return _Parser(text).parse()


def parse_poly(text: str) -> ZetaPoly:
    s = parse_series(text)
    if any(k != 0 for k in s.powers()):
        raise ValueError(f"{text!r} depends on x")
    return s.coeff(0) if s.max_pow is None or s.max_pow >= 0 else ZERO_POLY


def format_series(s: LaurentSeries) -> str:
    parts = []
    for k, v in s.items():
        xs = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        if len(v) == 1:
            body = v.text()
            neg = body.startswith("-")
            if neg:
                body = body[1:]
            if xs:
                body = xs if body == "1" else f"{body}*{xs}"
            parts.append(("-" if neg else "+", body))
        else:
            body = f"({v.text()})"
            parts.append(("+", f"{body}*{xs}" if xs else body))
    if s.max_pow is not None:
        t = s.max_pow + 1
        parts.append(("+", "O(1)" if t == 0 else ("O(x)" if t == 1 else f"O(x^{t})")))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out
