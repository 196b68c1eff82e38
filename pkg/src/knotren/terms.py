"""Symbolic products of one-loop functions and nested pole projections.

A :class:`Word` is a commutative product of factors, each factor either an
:class:`Atom` (a one-loop function at some writhe) or a :class:`Pole` of
another word.  An :class:`Expr` is a rational linear combination of words.
This is the layer on which term-by-term comparisons are made; numbers are
only produced by :func:`evaluate`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from .symexpr import LaurentSeries


@dataclass(frozen=True)
class Atom:
    """A one-loop function: kind 'D' (vertex) or 'O' (two-point)."""

    kind: str
    label: str
    writhe: int

    def key(self) -> tuple:
        return (0, self.kind, self.label, self.writhe)

    def text(self) -> str:
        s = self.kind if not self.label else f"{self.kind}^{self.label}"
        return s if self.writhe == 0 else f"_{self.writhe}{s}"


@dataclass(frozen=True)
class Pole:
    word: "Word"

    def key(self) -> tuple:
        return (1, self.word.key())

    def text(self) -> str:
        return f"<{self.word.text()}>"


Factor = Union[Atom, Pole]


@dataclass(frozen=True)
class Word:
    factors: tuple

    @staticmethod
    def of(factors: Iterable[Factor]) -> "Word":
        return Word(tuple(sorted(factors, key=lambda f: f.key())))

    def key(self) -> tuple:
        return tuple(f.key() for f in self.factors)

    def __mul__(self, other: "Word") -> "Word":
        return Word.of(self.factors + other.factors)

    def text(self) -> str:
        return " ".join(f.text() for f in self.factors) if self.factors else "1"

    def atoms(self) -> list[Atom]:
        out = []
        for f in self.factors:
            out.extend([f] if isinstance(f, Atom) else f.word.atoms())
        return out


ONE_WORD = Word(())


class Expr:
    """Rational linear combination of words (immutable)."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[Word, Fraction | int] | None = None):
        self._t = {w: Fraction(c) for w, c in (terms or {}).items() if c}

    @classmethod
    def atom(cls, a: Atom) -> "Expr":
        return cls({Word((a,)): 1})

    @classmethod
    def one(cls) -> "Expr":
        return cls({ONE_WORD: 1})

    def items(self):
        return sorted(self._t.items(), key=lambda kv: kv[0].key())

    def __len__(self):
        return len(self._t)

    def __eq__(self, other):
        return isinstance(other, Expr) and self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def __add__(self, other: "Expr") -> "Expr":
        out = dict(self._t)
        for w, c in other._t.items():
            out[w] = out.get(w, 0) + c
        return Expr(out)

    def __neg__(self):
        return Expr({w: -c for w, c in self._t.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Expr({w: c * other for w, c in self._t.items()})
        out: dict = {}
        for w1, c1 in self._t.items():
            for w2, c2 in other._t.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return Expr(out)

    __rmul__ = __mul__

    def pole_part(self) -> "Expr":
        """Linear projection: sum c * <w>."""
        out: dict = {}
        for w, c in self._t.items():
            pw = ONE_WORD if not w.factors else Word((Pole(w),))
            if not w.factors:
                continue  # <1> = 0
            out[pw] = out.get(pw, 0) + c
        return Expr(out)

    def text(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for w, c in self.items():
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = w.text() if mag == 1 else f"{mag} {w.text()}"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Expr({self.text()!r})"


def evaluate(expr: Expr, resolve: Callable[[Atom], LaurentSeries],
             cache: dict | None = None, need: int | None = None) -> LaurentSeries:
    """Numerical value of ``expr`` with atoms supplied by ``resolve``.

    With ``need`` set, every intermediate product is cut at the order that
    still determines the result through eps^need.
    """
    cache = {} if cache is None else cache
    total = LaurentSeries.zero()
    for w, c in expr.items():
        total = total + _eval_word(w, resolve, cache, need) * c
    return total


def _eval_word(w: Word, resolve, cache, need) -> LaurentSeries:
    key = (w, need)
    if key in cache:
        return cache[key]
    vals = []
    for f in w.factors:
        if isinstance(f, Atom):
            vals.append(resolve(f))
        else:
            vals.append(_eval_word(f.word, resolve, cache, -1).pole_part())
    val = LaurentSeries.const(1)
    if need is None:
        for v in vals:
            val = val * v
    else:
        leads = [v.min_pow if v.min_pow is not None else 0 for v in vals]
        rest = sum(leads)
        for v, lead in zip(vals, leads):
            rest -= lead
            top = need - rest
            val = _cut(val * _cut(v, top - (val.min_pow or 0)), top)
    cache[key] = val
    return val


def _cut(s: LaurentSeries, top: int) -> LaurentSeries:
    if s.max_pow is not None and s.max_pow <= top:
        return s
    return s.truncate(top) if s.max_pow is not None else LaurentSeries(dict(s.items()), top)
