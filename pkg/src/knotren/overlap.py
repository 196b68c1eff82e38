"""Overlapping ladders reduced to 1-states.

An overlapping ladder of n rungs is drawn as a row of boxes.  Counterterm
blocks of r boxes on the left and s on the right are replaced by vertex
counterterms; in the remaining m = n - r - s boxes the external momentum
flows through a window of consecutive boxes.  Rewriting

    X = X|left + X|right - X|both

shrinks the window until it holds a single box (a 1-state).  A 1-state
with i free boxes left of the marked one and j to its right evaluates to

    Z(r) Z(s) B^(i-1)(Delta) B^(j-1)(Delta) _wOmega,

where w counts the loops of both chains.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .oneloop import BASIC
from .renorm import LadderFamily, ZResult, _window_guard, ladder_expr
from .symexpr import LaurentSeries
from .terms import Atom, Expr, evaluate


def sign(i1: int, i2: int) -> int:
    """+1 if no counterterm block or both blocks present, else -1."""
    return 1 if (i1 + i2 == 0 or i1 * i2 != 0) else -1


@dataclass(frozen=True, order=True)
class OneState:
    left_ct: int
    left_free: int
    right_free: int
    right_ct: int

    def __post_init__(self):
        if min(self.left_ct, self.left_free, self.right_free, self.right_ct) < 0:
            raise ValueError("negative box count")

    @property
    def total(self) -> int:
        return self.left_ct + self.left_free + 1 + self.right_free + self.right_ct

    @property
    def sign(self) -> int:
        return sign(self.left_ct, self.right_ct)

    def box(self) -> str:
        return FlowState(self.left_ct, self.left_free, self.right_free, self.right_ct,
                         self.left_free + 1 + self.right_free).box()


@dataclass(frozen=True, order=True)
class FlowState:
    """Counterterm blocks r, s; free boxes m; i/j boxes outside the flow window."""

    r: int
    i: int
    j: int
    s: int
    m: int

    @property
    def window(self) -> int:
        return self.m - self.i - self.j

    def box(self) -> str:
        left = "[]" * self.r + "] " if self.r else ""
        right = " [" + "[]" * self.s if self.s else ""
        core = "[]" * self.i + "|" + "[]" * self.window + "|" + "[]" * self.j
        return left + core + right

    def one_state(self) -> OneState:
        if self.window != 1:
            raise ValueError("not a 1-state")
        return OneState(self.r, self.i, self.j, self.s)


@dataclass(frozen=True)
class OverlapFamily:
    """Vertex topologies per rung (left to right) and the two-point
    realization used when that rung carries the external momentum."""

    positions: tuple
    omegas: tuple

    def __post_init__(self):
        if len(self.positions) != len(self.omegas):
            raise ValueError("need one two-point realization per rung")
        seen: dict = {}
        for kind, tops in (("D", self.positions), ("O", self.omegas)):
            for t in tops:
                key = (kind, _label(t))
                if seen.setdefault(key, t) != t:
                    raise ValueError(f"label {key[1]!r} names two different topologies")

    @classmethod
    def basic(cls, n: int) -> "OverlapFamily":
        return cls((BASIC,) * n, (BASIC,) * n)

    def __len__(self):
        return len(self.positions)

    def resolver(self, order: int):
        table = {("D", _label(t)): t for t in self.positions}
        table.update({("O", _label(t)): t for t in self.omegas})

        def resolve(a: Atom) -> LaurentSeries:
            try:
                top = table[(a.kind, a.label)]
            except KeyError:
                raise ValueError(f"no topology for atom {a.text()}") from None
            return top.series(a.writhe, order)
        return resolve


def _label(t) -> str:
    return "" if t.name == "basic" else t.name


# ---------------------------------------------------------------------------
# values of 1-states

def _ct_expr(tops: Sequence) -> Expr:
    if not tops:
        return Expr.one()
    return ladder_expr(len(tops), LadderFamily.of(tops)).pole_part()


def _chain_expr(tops: Sequence) -> tuple[Expr, int]:
    out = Expr.one()
    w = 0
    for t in tops:
        out = out * Expr.atom(Atom("D", _label(t), w))
        w += t.loops
    return out, w


def one_state_expr(st: OneState, family: OverlapFamily | None = None) -> Expr:
    """Unsigned symbolic value of a 1-state."""
    family = OverlapFamily.basic(st.total) if family is None else family
    if st.total != len(family):
        raise ValueError(f"state spans {st.total} rungs, family has {len(family)}")
    tops = family.positions
    n = len(tops)
    r, s = st.left_ct, st.right_ct
    marked = r + st.left_free
    left_ct = _ct_expr(tops[:r])
    right_ct = _ct_expr(tops[n - s:][::-1])
    left, wl = _chain_expr(tops[r:marked])
    right, wr = _chain_expr(tops[marked + 1:n - s][::-1])
    omega = Expr.atom(Atom("O", _label(family.omegas[marked]), wl + wr))
    return left_ct * right_ct * left * right * omega


def one_state_value(st: OneState, family: OverlapFamily | None = None,
                    order: int | None = None) -> LaurentSeries:
    family = OverlapFamily.basic(st.total) if family is None else family
    order = len(family) + 1 if order is None else order
    return evaluate(one_state_expr(st, family), family.resolver(order))


def flow_state_value(fs: FlowState, family: OverlapFamily | None = None,
                     order: int | None = None) -> LaurentSeries:
    """Value of a 1-state; tadpoles (empty flow window) vanish."""
    if fs.window == 0:
        return LaurentSeries.zero()
    return one_state_value(fs.one_state(), family, order)


def one_states(n: int) -> list[OneState]:
    """All 1-states of an n-rung overlapping ladder with counterterm blocks."""
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    for r in range(n):
        for s in range(n - r):
            m = n - r - s
            for i in range(m):
                out.append(OneState(r, i, m - 1 - i, s))
    return out


# ---------------------------------------------------------------------------
# the rewriting pass

def rewrite(n: int) -> tuple[dict[OneState, int], list[str]]:
    """Reduce the n-rung graph and its counterterm graphs to 1-states.

    Returns the accumulated coefficient of each 1-state and an audit trail
    with one line per rewriting step.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    work: list[tuple[int, FlowState]] = []
    trail: list[str] = []
    for r in range(n):
        for s in range(n - r):
            st = FlowState(r, 0, 0, s, n - r - s)
            work.append((sign(r, s), st))
            trail.append(f"start {_signed(sign(r, s))} {st.box()}")
    final: dict[OneState, int] = {}
    while work:
        c, st = work.pop(0)
        if st.window == 1:
            final[st.one_state()] = final.get(st.one_state(), 0) + c
            continue
        a = FlowState(st.r, st.i + 1, st.j, st.s, st.m)
        b = FlowState(st.r, st.i, st.j + 1, st.s, st.m)
        both = FlowState(st.r, st.i + 1, st.j + 1, st.s, st.m)
        parts = [f"{_signed(c)} {a.box()}", f"{_signed(c)} {b.box()}"]
        work += [(c, a), (c, b)]
        if both.window == 0:
            parts.append(f"{_signed(-c)} {both.box()} (tadpole = 0)")
        else:
            parts.append(f"{_signed(-c)} {both.box()}")
            work.append((-c, both))
        trail.append(f"{_signed(c)} {st.box()} -> " + " ".join(parts))
    return dict(sorted(final.items())), trail


def _signed(c: int) -> str:
    return ("+" if c > 0 else "-") + (str(abs(c)) if abs(c) != 1 else "")


# ---------------------------------------------------------------------------
# counterterms

def overlap_terms(n: int, family: OverlapFamily | None = None) -> list[tuple[OneState, Expr]]:
    """Signed expansion into monomial terms, one entry per (1-state, word)."""
    family = OverlapFamily.basic(n) if family is None else family
    out = []
    for st in one_states(len(family)):
        e = one_state_expr(st, family) * st.sign
        for w, c in e.items():
            out.append((st, Expr({w: c})))
    return out


def overlap_expr(n: int, family: OverlapFamily | None = None) -> Expr:
    total = Expr()
    for _, e in overlap_terms(n, family):
        total = total + e
    return total


@_window_guard
def z2_overlap(n: int, family: OverlapFamily | None = None,
               order: int | None = None) -> ZResult:
    """Propagator counterterm of the n-rung overlapping ladder."""
    if n < 2:
        raise ValueError("overlapping ladders start at two loops")
    family = OverlapFamily.basic(n) if family is None else family
    if len(family) != n:
        raise ValueError(f"family has {len(family)} rungs, {n} requested")
    order = n + 1 if order is None else order
    terms = overlap_terms(n, family)
    expr = Expr()
    for _, e in terms:
        expr = expr + e
    series = evaluate(expr, family.resolver(order), need=-1).pole_part()
    loops = sum(t.loops for t in family.positions)
    return ZResult(series, loops, series.is_rational(), len(terms))


def z2_overlap_rewritten(n: int, family: OverlapFamily | None = None,
                         order: int | None = None) -> LaurentSeries:
    """Same counterterm with 1-state coefficients taken from :func:`rewrite`."""
    family = OverlapFamily.basic(n) if family is None else family
    order = n + 1 if order is None else order
    coeffs, _ = rewrite(n)
    expr = Expr()
    for st, c in coeffs.items():
        expr = expr + one_state_expr(st, family) * c
    return evaluate(expr, family.resolver(order), need=-1).pole_part()


def z2_multi(positions: Sequence, omegas: Sequence) -> tuple[ZResult, list[tuple[OneState, Expr]]]:
    """Overlap counterterm for distinct rung topologies.

    ``omegas[k]`` is the two-point realization used when rung k carries the
    external momentum.  Returns the counterterm and its signed term list.
    """
    family = OverlapFamily(tuple(positions), tuple(omegas))
    n = len(family)
    terms = overlap_terms(n, family)
    return z2_overlap(n, family), terms
