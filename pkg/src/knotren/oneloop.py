"""Generalized one-loop functions as Gamma-function ratios.

Every function here is stored as a :class:`DeltaSpec`: a rational prefactor
in eps times a product of unit Gamma factors Gamma(1 + a*eps).  Expanding
``log Gamma(1 - z) = gamma*z + sum_{k>=2} zeta(k)/k z^k`` turns a spec into
the canonical pair ``f * exp(g)`` with ``f`` rational and ``g`` a pure
zeta series.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

from . import symexpr
from .symexpr import (GAMMA, LaurentSeries, TruncationError, ZetaPoly, rational_series,
                      series_exp, zeta_mono)

Number = Union[int, Fraction]


# ---------------------------------------------------------------------------
# Gamma expansions

@lru_cache(maxsize=None)
def _log_gamma(a: Fraction, order: int, kmax: int) -> LaurentSeries:
    coeffs = {}
    if a:
        coeffs[1] = ZetaPoly.mono(GAMMA, a)
        for k in range(2, order + 1):
            coeffs[k] = ZetaPoly.mono(zeta_mono(k), a ** k / k)
    return LaurentSeries(coeffs, order)


def log_gamma_series(a: Number, order: int) -> LaurentSeries:
    """log Gamma(1 - a*eps) through eps^order.

    log Gamma(1 + a*eps) is ``log_gamma_series(-a, order)``.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if order > symexpr.MAX_ZETA:
        raise TruncationError(f"expansion to eps^{order} needs zet({order}), "
                              f"beyond the configured bound K={symexpr.MAX_ZETA}")
    return _log_gamma(Fraction(a), order, symexpr.MAX_ZETA)


@dataclass(frozen=True)
class GammaFactor:
    """Gamma(1 + shift*eps) in the numerator or the denominator."""

    shift: Fraction
    place: str = "num"

    def __post_init__(self):
        if self.place not in ("num", "den"):
            raise ValueError("place must be 'num' or 'den'")
        object.__setattr__(self, "shift", Fraction(self.shift))

    @property
    def sign(self) -> int:
        return 1 if self.place == "num" else -1


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def _trim(p: Sequence[Fraction]) -> tuple[Fraction, ...]:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(Fraction(c) for c in p)


@dataclass(frozen=True)
class DeltaSpec:
    """(num(eps)/den(eps)) * prod Gamma(1 + a_i eps)^(+-1).

    Polynomials are tuples of rational coefficients in ascending powers.
    """

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]
    gammas: tuple[GammaFactor, ...] = ()
    loops: int = 1
    scaling_weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "num", _trim(self.num))
        object.__setattr__(self, "den", _trim(self.den))
        object.__setattr__(self, "gammas", tuple(self.gammas))
        object.__setattr__(self, "scaling_weight", Fraction(self.scaling_weight))
        if not any(self.den):
            raise ZeroDivisionError("zero denominator in DeltaSpec")
        if self.loops < 1:
            raise ValueError("loops must be positive")

    @property
    def valuation(self) -> int:
        vn = next((i for i, c in enumerate(self.num) if c), 0)
        vd = next(i for i, c in enumerate(self.den) if c)
        return vn - vd

    def exponent(self, order: int) -> LaurentSeries:
        """g = sum of +-log Gamma series, through eps^order."""
        g = LaurentSeries.zero(max(order, 1))
        for gf in self.gammas:
            # log Gamma(1 + a eps) = log_gamma_series(-a)
            g = g + log_gamma_series(-gf.shift, max(order, 1)) * gf.sign
        return g

    def prefactor_series(self, order: int) -> LaurentSeries:
        return rational_series(self.num, self.den, order)

    def expand(self, order: int) -> LaurentSeries:
        """Laurent expansion through eps^order."""
        f, g = canonical_pair(self, order)
        need = order - self.valuation
        if need < 1:
            return f
        return f * series_exp(g, need)

    def inverted_gammas(self) -> tuple[GammaFactor, ...]:
        flip = {"num": "den", "den": "num"}
        return tuple(GammaFactor(g.shift, flip[g.place]) for g in self.gammas)

    # -- serialization
    def to_text(self) -> str:
        lines = ["deltaspec"]
        lines.append("num = " + " ".join(str(c) for c in self.num))
        lines.append("den = " + " ".join(str(c) for c in self.den))
        for g in self.gammas:
            lines.append(f"gamma = {g.place} {g.shift}")
        lines.append(f"loops = {self.loops}")
        lines.append(f"scaling_weight = {self.scaling_weight}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DeltaSpec":
        rows = [ln.strip() for ln in text.splitlines()
                if ln.strip() and not ln.strip().startswith("#")]
        if not rows or rows[0] != "deltaspec":
            raise ValueError("DeltaSpec record must start with 'deltaspec'")
        fields: dict = {"gammas": []}
        for lineno, row in enumerate(rows[1:], start=2):
            if "=" not in row:
                raise ValueError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in row.split("=", 1))
            try:
                if key in ("num", "den"):
                    fields[key] = tuple(Fraction(c) for c in val.split())
                elif key == "gamma":
                    place, shift = val.split()
                    fields["gammas"].append(GammaFactor(Fraction(shift), place))
                elif key == "loops":
                    fields["loops"] = int(val)
                elif key == "scaling_weight":
                    fields["scaling_weight"] = Fraction(val)
                else:
                    raise ValueError(f"unknown key {key!r}")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if "num" not in fields or "den" not in fields:
            raise ValueError("DeltaSpec record needs num and den")
        fields["gammas"] = tuple(fields["gammas"])
        return cls(**fields)


def canonical_pair(spec: DeltaSpec, order: int) -> tuple[LaurentSeries, LaurentSeries]:
    """(f, g) with spec = f * exp(g); f through eps^order, g through the
    order needed to reach eps^order in the product."""
    f = spec.prefactor_series(order)
    need = max(order - spec.valuation, 1)
    return f, spec.exponent(need)


# ---------------------------------------------------------------------------
# master formula for the massless bubble

def _gamma_reduce(m: int, c: Fraction):
    """Gamma(m + c eps) = (prod num factors / prod den factors) Gamma(1 + c eps).

    Factors are linear polynomials (k, c) meaning k + c eps.
    """
    num, den = [], []
    if m >= 1:
        num = [(Fraction(k), c) for k in range(1, m)]
    else:
        if c == 0:
            raise ValueError(f"Gamma({m}) has a pole without eps deformation")
        den = [(Fraction(k), c) for k in range(m, 1)]
    return num, den


def _as_pair(a) -> tuple[int, Fraction]:
    if isinstance(a, tuple):
        base, e = a
    else:
        base, e = a, 0
    if Fraction(base).denominator != 1:
        raise ValueError("exponent integer part must be an integer")
    return int(base), Fraction(e)


def bubble_master(a, b, dim: int = 4, loops: int = 1) -> DeltaSpec:
    """int d^Dk [k^2]^-a [(k+q)^2]^-b at q^2 = 1, D = dim - 2 eps.

    ``a`` and ``b`` are (integer, eps-coefficient) pairs.  Returns the
    Gamma ratio G(a+b-D/2) G(D/2-a) G(D/2-b) / (G(a) G(b) G(D-a-b)) with
    every pole pulled into the rational prefactor.
    """
    if dim % 2:
        raise ValueError("only even integer dimensions are supported")
    (a0, a1), (b0, b1) = _as_pair(a), _as_pair(b)
    h = dim // 2
    # (integer part, eps coefficient, +1 numerator / -1 denominator)
    args = [
        (a0 + b0 - h, a1 + b1 + 1, 1),
        (h - a0, -1 - a1, 1),
        (h - b0, -1 - b1, 1),
        (a0, a1, -1),
        (b0, b1, -1),
        (dim - a0 - b0, -2 - a1 - b1, -1),
    ]
    lin_num: list[tuple[Fraction, Fraction]] = []
    lin_den: list[tuple[Fraction, Fraction]] = []
    shifts: Counter = Counter()
    for m, c, side in args:
        n_f, d_f = _gamma_reduce(m, Fraction(c))
        if side > 0:
            lin_num += n_f
            lin_den += d_f
        else:
            lin_num += d_f
            lin_den += n_f
        if c:
            shifts[Fraction(c)] += side
    num, den = _cancel_linear(lin_num, lin_den)
    gammas = []
    for s in sorted(shifts):
        k = shifts[s]
        place = "num" if k > 0 else "den"
        gammas += [GammaFactor(s, place)] * abs(k)
    return DeltaSpec(num, den, tuple(gammas), loops=loops, scaling_weight=a1 + b1 + 1)


def _cancel_linear(num, den):
    """Multiply out linear factors after cancelling common ones."""
    scale = Fraction(1)

    def normal(f):
        k, c = f
        if k:
            return k, (Fraction(1), c / k)
        return c, (Fraction(0), Fraction(1))

    nn, dd = Counter(), Counter()
    for f in num:
        s, f = normal(f)
        scale *= s
        nn[f] += 1
    for f in den:
        s, f = normal(f)
        scale /= s
        dd[f] += 1
    common = nn & dd
    nn, dd = nn - common, dd - common
    p_num: tuple = (scale,)
    for f, k in sorted(nn.items()):
        for _ in range(k):
            p_num = _poly_mul(p_num, f)
    p_den: tuple = (Fraction(1),)
    for f, k in sorted(dd.items()):
        for _ in range(k):
            p_den = _poly_mul(p_den, f)
    return p_num, p_den


# ---------------------------------------------------------------------------
# the basic family

@lru_cache(maxsize=None)
def delta_spec(j: int) -> DeltaSpec:
    """_jDelta: the massless bubble with one propagator raised to 1 + j eps."""
    if j < 0:
        raise ValueError("writhe must be non-negative")
    return bubble_master((1, j), (1, 0))


def delta_j(j: int, order: int) -> LaurentSeries:
    if order < 0:
        raise ValueError("order must be non-negative")
    return _expand_cached(delta_spec(j), order, symexpr.MAX_ZETA)


def omega_spec(j: int) -> DeltaSpec:
    """Default scalar realization of the two-point function _jOmega."""
    return delta_spec(j)


def omega_j(j: int, order: int) -> LaurentSeries:
    return delta_j(j, order)


@lru_cache(maxsize=4096)
def _expand_cached(spec: DeltaSpec, order: int, kmax: int) -> LaurentSeries:
    return spec.expand(order)


def expand(spec: DeltaSpec, order: int) -> LaurentSeries:
    """Cached :meth:`DeltaSpec.expand`."""
    return _expand_cached(spec, order, symexpr.MAX_ZETA)


def pn_spec(n: int) -> DeltaSpec:
    """Closed form of P_n = prod_{i<n} _iDelta."""
    if n < 1:
        raise ValueError("n must be at least 1")
    den: tuple = (Fraction(0),) * n + (Fraction(math.factorial(n)),)
    for k in range(2, n + 2):
        den = _poly_mul(den, (Fraction(1), Fraction(-k)))
    gammas = ([GammaFactor(-1, "num")] * (n + 1) + [GammaFactor(n, "num")]
              + [GammaFactor(-(n + 1), "den")])
    return DeltaSpec((Fraction(1),), den, tuple(gammas), loops=n, scaling_weight=n)


def product_Pn(n: int, order: int) -> LaurentSeries:
    return expand(pn_spec(n), order)


def iterated_product(n: int, order: int) -> LaurentSeries:
    """prod_{i<n} delta_j(i) by repeated series multiplication."""
    # each factor has a simple pole; n-1 others push its needed order up
    out = LaurentSeries.const(1)
    for i in range(n):
        out = out * delta_j(i, order + n - 1)
    return out.truncate(order)


def bar_delta(family: Sequence[DeltaSpec], j: int) -> DeltaSpec:
    """Regulator with prefactor of ``family[j]`` and exponent
    ``-(g_0 + ... + g_{j-1})``, so that
    ``prod_{i<j} family[i] * bar_delta(family, j)`` has rational coefficients.
    """
    if j < 1 or j >= len(family):
        raise ValueError("need 1 <= j < len(family)")
    gammas: list[GammaFactor] = []
    for spec in family[:j]:
        gammas += spec.inverted_gammas()
    target = family[j]
    return DeltaSpec(target.num, target.den, _simplify_gammas(gammas),
                     loops=target.loops, scaling_weight=target.scaling_weight)


def _simplify_gammas(gammas: Sequence[GammaFactor]) -> tuple[GammaFactor, ...]:
    net: Counter = Counter()
    for g in gammas:
        if g.shift:
            net[g.shift] += g.sign
    out = []
    for s in sorted(net):
        k = net[s]
        out += [GammaFactor(s, "num" if k > 0 else "den")] * abs(k)
    return tuple(out)


# ---------------------------------------------------------------------------
# topologies and form-factor matrices

@dataclass(frozen=True)
class Topology:
    """A one-loop (or effectively one-loop) function family indexed by writhe.

    ``spec_at(j)`` returns the DeltaSpec evaluated with measure deformation
    (l^2)^(-j eps).  Built-in topologies are massless bubbles with
    exponents (a0 + (a_eps + j) eps, b0 + b_eps eps).
    """

    name: str
    loops: int = 1
    a0: int = 1
    b0: int = 1
    a_eps: Fraction = Fraction(0)
    b_eps: Fraction = Fraction(0)
    dim: int = 4
    scale: Fraction = Fraction(1)

    def spec_at(self, j: int) -> DeltaSpec:
        return _topology_spec(self, j)

    def series(self, j: int, order: int) -> LaurentSeries:
        return expand(self.spec_at(j), order)

    @classmethod
    def from_text(cls, text: str, name: str = "custom") -> "Topology":
        kw: dict = {"name": name}
        for lineno, row in enumerate(text.splitlines(), start=1):
            row = row.split("#", 1)[0].strip()
            if not row:
                continue
            if "=" not in row:
                raise ValueError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in row.split("=", 1))
            if key in ("loops", "a0", "b0", "dim"):
                kw[key] = int(val)
            elif key in ("a_eps", "b_eps", "scale"):
                kw[key] = Fraction(val)
            elif key == "name":
                kw[key] = val
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        top = cls(**kw)
        top.spec_at(0)  # validate the pole structure now
        return top


@lru_cache(maxsize=None)
def _topology_spec(top: Topology, j: int) -> DeltaSpec:
    spec = bubble_master((top.a0, top.a_eps + j), (top.b0, top.b_eps),
                         dim=top.dim, loops=top.loops)
    if top.scale != 1:
        spec = DeltaSpec(tuple(c * top.scale for c in spec.num), spec.den, spec.gammas,
                         spec.loops, spec.scaling_weight)
    return spec


BASIC = Topology("basic")


@dataclass(frozen=True)
class SpecTopology:
    """Topology given directly as a writhe -> DeltaSpec function."""

    name: str
    loops: int
    make: Callable[[int], DeltaSpec] = field(compare=False)

    def spec_at(self, j: int) -> DeltaSpec:
        return self.make(j)

    def series(self, j: int, order: int) -> LaurentSeries:
        return expand(self.spec_at(j), order)


class DeltaMatrix:
    """r x r matrix of series with a set of UV-divergent rows.

    Concatenation is matrix multiplication; pole projection keeps the pole
    part of the divergent rows and zeroes the others.
    """

    def __init__(self, entries: Sequence[Sequence[LaurentSeries]],
                 divergent: frozenset[int] | Sequence[int] = frozenset({0})):
        rows = [list(r) for r in entries]
        self.dim = len(rows)
        if any(len(r) != self.dim for r in rows):
            raise ValueError("DeltaMatrix must be square")
        self.entries = tuple(tuple(r) for r in rows)
        self.divergent = frozenset(divergent)

    @classmethod
    def identity(cls, dim: int, divergent=frozenset({0})) -> "DeltaMatrix":
        one, zero = LaurentSeries.const(1), LaurentSeries.zero()
        return cls([[one if i == k else zero for k in range(dim)] for i in range(dim)],
                   divergent)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __mul__(self, other: "DeltaMatrix") -> "DeltaMatrix":
        return matrix_concat(other, self)

    def __add__(self, other: "DeltaMatrix") -> "DeltaMatrix":
        _check_dims(self, other)
        return DeltaMatrix([[self.entries[i][k] + other.entries[i][k]
                             for k in range(self.dim)] for i in range(self.dim)],
                           self.divergent)

    def __neg__(self):
        return DeltaMatrix([[-e for e in r] for r in self.entries], self.divergent)

    def __sub__(self, other):
        return self + (-other)

    def pole_part(self) -> "DeltaMatrix":
        return matrix_pole(self)

    def scaled(self, c) -> "DeltaMatrix":
        return DeltaMatrix([[e * c for e in r] for r in self.entries], self.divergent)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def __repr__(self):
        return f"DeltaMatrix({[[e.text() for e in r] for r in self.entries]!r})"


def _check_dims(a: DeltaMatrix, b: DeltaMatrix):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")


def matrix_concat(inner: DeltaMatrix, outer: DeltaMatrix) -> DeltaMatrix:
    """outer . inner: the outer loop acts on the structure produced inside."""
    _check_dims(inner, outer)
    r = inner.dim
    out = []
    for i in range(r):
        row = []
        for k in range(r):
            acc = None
            for j in range(r):
                a, b = outer.entries[i][j], inner.entries[j][k]
                if a.is_zero() and a.exact or b.is_zero() and b.exact:
                    continue
                t = a * b
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else LaurentSeries.zero())
        out.append(row)
    return DeltaMatrix(out, outer.divergent | inner.divergent)


def matrix_pole(m: DeltaMatrix) -> DeltaMatrix:
    zero = LaurentSeries.zero()
    return DeltaMatrix([[e.pole_part() if i in m.divergent else zero for e in row]
                        for i, row in enumerate(m.entries)], m.divergent)


@dataclass(frozen=True)
class MatrixTopology:
    """Matrix of topologies (None = structurally zero) for form-factor mixing."""

    name: str
    entries: tuple[tuple[object, ...], ...]
    divergent: frozenset[int] = frozenset({0})
    loops: int = 1

    @property
    def dim(self) -> int:
        return len(self.entries)

    def at(self, j: int, order: int) -> DeltaMatrix:
        zero = LaurentSeries.zero()
        return DeltaMatrix([[zero if t is None else t.series(j, order) for t in row]
                            for row in self.entries], self.divergent)
