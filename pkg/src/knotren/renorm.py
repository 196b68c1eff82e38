"""Nested-ladder counterterms from the A/B operator algebra.

B concatenates the next one-loop function with its writhe raised by the
loops already in the open chain; A closes the chain by taking its pole part
and starts a new chain.  The vertex counterterm at n loops is the pole part
of the sum over all 2^(n-1) words in -A and B applied to the innermost
function.  Operator words are written in application order: ``("B", "A")``
means B acts first.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .oneloop import BASIC, DeltaMatrix, MatrixTopology, bar_delta, delta_spec, expand
from .symexpr import LaurentSeries, TruncationError, format_series
from .terms import Atom, Expr, Word, evaluate


@dataclass(frozen=True)
class LadderFamily:
    """Ordered bouquet of topologies, innermost first."""

    topologies: tuple

    @classmethod
    def basic(cls, n: int) -> "LadderFamily":
        return cls((BASIC,) * n)

    @classmethod
    def of(cls, tops: Sequence) -> "LadderFamily":
        return cls(tuple(tops))

    def __len__(self):
        return len(self.topologies)

    @property
    def loop_counts(self) -> tuple[int, ...]:
        return tuple(t.loops for t in self.topologies)

    @property
    def total_loops(self) -> int:
        return sum(self.loop_counts)

    @property
    def is_matrix(self) -> bool:
        return any(isinstance(t, MatrixTopology) for t in self.topologies)

    def label(self, i: int) -> str:
        name = self.topologies[i].name
        return "" if name == "basic" else name

    def atom(self, i: int, writhe: int, kind: str = "D") -> Atom:
        return Atom(kind, self.label(i), writhe)

    def value(self, i: int, writhe: int, order: int):
        return self.topologies[i].series(writhe, order) if not self.is_matrix \
            else self.topologies[i].at(writhe, order)

    def prefix(self, k: int) -> "LadderFamily":
        return LadderFamily(self.topologies[:k])


@dataclass(frozen=True)
class ZResult:
    series: LaurentSeries
    loop_order: int
    rational_flag: bool
    term_count: int

    def __post_init__(self):
        if self.series != self.series.pole_part():
            raise ValueError("counterterm series must be a pure pole part")

    def report(self, fmt: str = "text") -> str:
        rows = [("loops", self.loop_order), ("series", format_series(self.series)),
                ("rational", str(self.rational_flag).lower()), ("terms", self.term_count)]
        if fmt == "machine":
            return "\n".join(f"{k}={v}" for k, v in rows)
        return "\n".join(f"{k:9s} {v}" for k, v in rows)


def default_order(family: LadderFamily) -> int:
    """Per-factor expansion order: n-1 for the pole block plus two guards."""
    return len(family) + 1


# ---------------------------------------------------------------------------
# single operator steps

def op_B(family: LadderFamily, state, step: int, writhe: int | None = None,
         order: int | None = None):
    """Multiply ``state`` by family member ``step`` at the accumulated writhe.

    Without an explicit writhe the state is taken to be the pure chain of
    members 0..step-1, so the shift is the sum of their loop counts.
    """
    if not 0 <= step < len(family):
        raise IndexError(f"step {step} outside a family of {len(family)}")
    order = default_order(family) if order is None else order
    if writhe is None:
        writhe = sum(family.loop_counts[:step])
    v = family.value(step, writhe, order)
    return v * state


def op_A(state, next_delta):
    """``next_delta`` times the pole part of ``state``."""
    return next_delta * state.pole_part()


# ---------------------------------------------------------------------------
# words

def operator_words(n: int) -> list[tuple[str, ...]]:
    """All 2^(n-1) words in application order, lexicographic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return [w for w in itertools.product("AB", repeat=n - 1)]


def word_sign(word: Sequence[str]) -> int:
    return -1 if sum(1 for c in word if c == "A") % 2 else 1


def apply_word(word: Sequence[str], value: Callable[[int, int], object],
               loops: Sequence[int], mul: Callable, pole: Callable):
    """Apply ``word`` to the innermost function; returns the unprojected product.

    ``value(i, j)`` is member i at writhe j; ``mul(outer, inner)`` multiplies;
    ``pole`` projects.  Works for series, matrices and symbolic expressions.
    """
    if len(word) + 1 > len(loops):
        raise IndexError("family too short for operator word")
    prefix = None
    chain = value(0, 0)
    chain_loops = loops[0]
    for pos, letter in enumerate(word, start=1):
        if letter == "B":
            chain = mul(value(pos, chain_loops), chain)
            chain_loops += loops[pos]
        elif letter == "A":
            inner = chain if prefix is None else mul(chain, prefix)
            prefix = pole(inner)
            chain = value(pos, 0)
            chain_loops = loops[pos]
        else:
            raise ValueError(f"unknown operator letter {letter!r}")
    return chain if prefix is None else mul(chain, prefix)


def _mul(a, b):
    return a * b


def _pole(x):
    return x.pole_part()


def word_expr(word: Sequence[str], family: LadderFamily) -> Expr:
    """Signed symbolic term of one operator word (before the outer projection)."""
    val = apply_word(word, lambda i, j: Expr.atom(family.atom(i, j)),
                     family.loop_counts, _mul, _pole)
    return val * word_sign(word)


def ladder_terms(n: int, family: LadderFamily | None = None) -> list[tuple[tuple[str, ...], Expr]]:
    family = LadderFamily.basic(n) if family is None else family
    _check_cover(n, family)
    return [(w, word_expr(w, family)) for w in operator_words(n)]


def ladder_expr(n: int, family: LadderFamily | None = None) -> Expr:
    """[-A+B]^(n-1)(Delta) as a symbolic sum, before the outer projection."""
    total = Expr()
    for _, e in ladder_terms(n, family):
        total = total + e
    return total


def _check_cover(n: int, family: LadderFamily):
    if n < 1:
        raise ValueError("loop count must be at least 1")
    if len(family) < n:
        raise ValueError(f"family has {len(family)} members, {n} needed")


def _resolver(family: LadderFamily, order: int):
    by_label: dict = {}
    for i, t in enumerate(family.topologies):
        if by_label.setdefault(family.label(i), t) != t:
            raise ValueError(f"label {family.label(i)!r} names two different topologies")

    def resolve(atom: Atom) -> LaurentSeries:
        return by_label[atom.label].series(atom.writhe, order)
    return resolve


def _window_guard(fn):
    @functools.wraps(fn)
    def wrapped(*args, **kw):
        try:
            return fn(*args, **kw)
        except TruncationError as exc:
            raise TruncationError(f"truncation window too small: {exc}") from None
    return wrapped


@_window_guard
def z_ladder(n: int, family: LadderFamily | None = None, order: int | None = None) -> ZResult:
    """Vertex counterterm <[-A+B]^(n-1)(Delta)> of the first n family members."""
    family = LadderFamily.basic(n) if family is None else family
    _check_cover(n, family)
    fam = family.prefix(n)
    order = default_order(fam) if order is None else order
    if fam.is_matrix:
        series, count = _z_matrix(n, fam, order)
    else:
        expr = ladder_expr(n, fam)
        series = evaluate(expr, _resolver(fam, order), need=-1).pole_part()
        count = len(expr)
    return ZResult(series, sum(fam.loop_counts), series.is_rational(), count)


def z_ladder_numeric(n: int, family: LadderFamily | None = None,
                     order: int | None = None):
    """Same counterterm by applying each word directly to series values.

    Returns the full projected value (a DeltaMatrix for matrix families).
    """
    family = LadderFamily.basic(n) if family is None else family
    _check_cover(n, family)
    fam = family.prefix(n)
    order = default_order(fam) if order is None else order
    total = None
    for w in operator_words(n):
        v = apply_word(w, lambda i, j: fam.value(i, j, order), fam.loop_counts, _mul, _pole)
        v = v.scaled(word_sign(w)) if isinstance(v, DeltaMatrix) else v * word_sign(w)
        total = v if total is None else total + v
    return total.pole_part()


def _z_matrix(n: int, fam: LadderFamily, order: int):
    m = z_ladder_numeric(n, fam, order)
    return m[0, 0], 2 ** (n - 1)


z_cable = z_ladder


def z_cable_family(topologies: Sequence) -> ZResult:
    """Cable counterterm for the given bouquet (all members used)."""
    fam = LadderFamily.of(topologies)
    return z_ladder(len(fam), fam)


def z_total(per_order: dict[int, Sequence[LadderFamily]]) -> LaurentSeries:
    """1 - sum over loop orders and topology sets of the cable counterterms."""
    total = LaurentSeries.const(1)
    for m in sorted(per_order):
        for fam in per_order[m]:
            z = z_ladder(len(fam), fam)
            if z.loop_order != m:
                raise ValueError(f"topology set with {z.loop_order} loops filed under order {m}")
            total = total - z.series
    return total


# ---------------------------------------------------------------------------
# finiteness and regulated variants

@_window_guard
def gamma_renormalized_orders(n: int, family: LadderFamily | None = None,
                              order: int | None = None) -> list[LaurentSeries]:
    """Loop-graded pieces of (1 + sum B^i) (1 - sum Z^(i)) for orders 1..n.

    The piece at order m is P_m - sum_{k<m} Z^(k) P_(m-k) - Z^(m), built from
    independently computed chains and counterterms.
    """
    family = LadderFamily.basic(n) if family is None else family
    _check_cover(n, family)
    if family.is_matrix:
        raise ValueError("graded finiteness check is implemented for scalar families")
    order = default_order(family.prefix(n)) if order is None else order
    zs = {m: z_ladder(m, family, order).series for m in range(1, n + 1)}
    pieces = []
    for m in range(1, n + 1):
        piece = _chain(family, 0, m, order) - zs[m]
        for k in range(1, m):
            piece = piece - zs[k] * _chain(family, k, m - k, order)
        pieces.append(piece)
    return pieces


def _chain(family: LadderFamily, start: int, length: int, order: int) -> LaurentSeries:
    """B-chain of members start..start+length-1 with writhes restarting at 0."""
    out = LaurentSeries.const(1)
    w = 0
    for i in range(start, start + length):
        t = family.topologies[i]
        out = t.series(w, order) * out
        w += t.loops
    return out


def gamma_renormalized(n: int, family: LadderFamily | None = None,
                       order: int | None = None) -> LaurentSeries:
    """1 + sum_{i<n} ([-A+B]^i(Delta) - <[-A+B]^i(Delta)>), coupling set to 1."""
    total = LaurentSeries.const(1)
    for piece in gamma_renormalized_orders(n, family, order):
        total = total + piece
    return total


def gamma_renormalized_symbolic(n: int, family: LadderFamily | None = None,
                                order: int | None = None) -> LaurentSeries:
    """Second form: the operator sums minus their own pole parts."""
    family = LadderFamily.basic(n) if family is None else family
    order = default_order(family.prefix(n)) if order is None else order
    total = LaurentSeries.const(1)
    for i in range(n):
        fam = family.prefix(i + 1)
        v = evaluate(ladder_expr(i + 1, fam), _resolver(fam, order))
        total = total + v - v.pole_part()
    return total


def z_from_products(n: int, products: Callable[[int], LaurentSeries]) -> list[LaurentSeries]:
    """Counterterms Z^(1..n) from the recursion Z^(m) = <R_m - sum Z^(k) R_(m-k)>.

    ``products(m)`` supplies the m-loop chain R_m.  With the true chains
    P_m this reproduces :func:`z_ladder` on the basic family.
    """
    zs: list[LaurentSeries] = []
    for m in range(1, n + 1):
        v = products(m)
        for k in range(1, m):
            v = v - zs[k - 1] * products(m - k)
        zs.append(v.pole_part())
    return zs


def z_ladder_regulated(n: int, order: int | None = None) -> tuple[LaurentSeries, bool]:
    """Basic-family counterterm with the last function of every chain segment
    (the outermost one and each one directly under a pole projection)
    replaced by its transcendental-free regulator.

    Returns the projected series and whether every word contributed purely
    rational coefficients.  The series coincides with :func:`z_ladder`.
    """
    order = n + 1 if order is None else order
    specs = [delta_spec(j) for j in range(n)]

    def regulated(j):
        if j == 0:
            return specs[0].prefactor_series(order)
        return expand(bar_delta(specs, j), order)

    total = LaurentSeries.zero()
    all_rational = True
    for w in operator_words(n):
        def value(i, j, w=w):
            if i == n - 1 or w[i] == "A":
                return regulated(j)
            return expand(specs[j], order)
        v = apply_word(w, value, [1] * n, _mul, _pole) * word_sign(w)
        all_rational = all_rational and v.is_rational()
        total = total + v
    return total.pole_part(), all_rational
