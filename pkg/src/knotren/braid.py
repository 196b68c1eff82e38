"""Braid words, Markov-type moves, skein expansion and the knot dictionary.

Words are tuples of signed generator indices: ``2`` is sigma_2, ``-2`` its
inverse.  Closed braids are compared up to cyclic rotation, so every search
state is stored as its lexicographically smallest rotation.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from math import gcd

from .symexpr import ParseError

# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True, order=True)
class BraidWord:
    strands: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.strands < 1:
            raise ValueError("a braid needs at least one strand")
        for g in self.letters:
            if g == 0 or abs(g) > self.strands - 1:
                raise ValueError(f"generator {g} does not act on {self.strands} strands")

    @classmethod
    def parse(cls, text: str, strands: int | None = None) -> "BraidWord":
        letters = _WordParser(text).parse()
        top = max((abs(g) for g in letters), default=0)
        n = top + 1 if strands is None else strands
        return cls(max(n, 1), tuple(letters))

    @classmethod
    def of(cls, *letters: int, strands: int | None = None) -> "BraidWord":
        top = max((abs(g) for g in letters), default=0)
        return cls(strands or top + 1, tuple(letters))

    def __len__(self):
        return len(self.letters)

    def text(self) -> str:
        if not self.letters:
            return "1"
        out = []
        for g, run in itertools.groupby(self.letters):
            k = len(list(run)) * (1 if g > 0 else -1)
            out.append(f"s{abs(g)}" + (f"^{k}" if k != 1 else ""))
        return " ".join(out)

    def __str__(self):
        return self.text()

    @property
    def is_positive(self) -> bool:
        return all(g > 0 for g in self.letters)

    def permutation(self) -> tuple[int, ...]:
        """Where each strand position ends up after the braid (0-based)."""
        pos = list(range(self.strands))
        for g in self.letters:
            i = abs(g) - 1
            pos[i], pos[i + 1] = pos[i + 1], pos[i]
        perm = [0] * self.strands
        for end, start in enumerate(pos):
            perm[start] = end
        return tuple(perm)

    def canonical(self) -> "BraidWord":
        return BraidWord(self.strands, _min_rotation(self.letters))


class _WordParser:

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def parse(self) -> list[int]:
        out = self._seq()
        self._skip()
        if self.pos != len(self.text):
            raise ParseError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return out

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _seq(self) -> list[int]:
        out: list[int] = []
        while True:
            self._skip()
            if self.pos >= len(self.text) or self.text[self.pos] == ")":
                return out
            start = self.pos
            ch = self.text[self.pos]
            if ch == "(":
                self.pos += 1
                inner = self._seq()
                self._skip()
                if self.pos >= len(self.text) or self.text[self.pos] != ")":
                    raise ParseError("missing ')'", self.pos)
                self.pos += 1
                k = self._power()
                out += _power(inner, k)
            elif ch == "s":
                m = re.compile(r"s(\d+)").match(self.text, self.pos)
                if not m:
                    raise ParseError("expected generator index after 's'", self.pos + 1)
                g = int(m.group(1))
                if g < 1:
                    raise ParseError("generator index must be at least 1", start + 1)
                self.pos = m.end()
                out += _power([g], self._power())
            elif ch == "1" and (self.pos + 1 == len(self.text) or not self.text[self.pos + 1].isdigit()):
                self.pos += 1  # the identity word
            else:
                raise ParseError(f"unexpected {ch!r}", self.pos)

    def _power(self) -> int:
        if self.pos < len(self.text) and self.text[self.pos] == "^":
            m = re.compile(r"\^\s*(-?\d+)").match(self.text, self.pos)
            if not m:
                raise ParseError("expected integer exponent", self.pos + 1)
            self.pos = m.end()
            k = int(m.group(1))
            if k == 0:
                raise ParseError("zero exponent", self.pos - 1)
            return k
        return 1


def _power(letters: list[int], k: int) -> list[int]:
    if k > 0:
        return letters * k
    inv = [-g for g in reversed(letters)]
    return inv * (-k)


def _min_rotation(letters: tuple[int, ...]) -> tuple[int, ...]:
    if not letters:
        return ()
    return min(letters[i:] + letters[:i] for i in range(len(letters)))


# ---------------------------------------------------------------------------
# closure invariants and standard words


def closure_components(w: BraidWord) -> int:
    """Number of cycles of the closure permutation."""
    perm = w.permutation()
    seen = [False] * w.strands
    count = 0
    for s in range(w.strands):
        if not seen[s]:
            count += 1
            while not seen[s]:
                seen[s] = True
                s = perm[s]
    return count


def torus_word(p: int, q: int) -> BraidWord:
    """(sigma_1 ... sigma_{p-1})^q on p strands."""
    if p < 2 or q < 1:
        raise ValueError("need p >= 2 and q >= 1")
    return BraidWord(p, tuple(range(1, p)) * q)


def torus_components(p: int, q: int) -> int:
    return gcd(p, q)


def ladder_word(n: int) -> BraidWord:
    """Block word sigma_1^2 ... sigma_{n-1}^2 of the n-rung ladder."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return BraidWord(n, tuple(g for i in range(1, n) for g in (i, i)))


def crossed_ladder_word(n: int) -> BraidWord:
    """sigma_{n-1}..sigma_1 sigma_2..sigma_{n-1} sigma_1..sigma_{n-2}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if n == 2:
        return BraidWord(2, (1,))
    down = tuple(range(n - 1, 0, -1))
    up = tuple(range(2, n))
    tail = tuple(range(1, n - 1))
    return BraidWord(n, down + up + tail)


def three_braid_family(max_crossings: int) -> list[tuple[tuple[int, int], BraidWord]]:
    """sigma_1 sigma_2^(2a+1) sigma_1 sigma_2^(2b+1) with a >= b >= 1."""
    out = []
    for a in range(1, max_crossings):
        for b in range(1, a + 1):
            if 2 * a + 2 * b + 4 <= max_crossings:
                w = (1,) + (2,) * (2 * a + 1) + (1,) + (2,) * (2 * b + 1)
                out.append(((a, b), BraidWord(3, w)))
    return out


def u_family(max_level: int) -> list[tuple[int, int]]:
    """Index pairs of U(2a+3, 2b+1) with a >= b >= 0 up to the given level."""
    return [(2 * a + 3, 2 * b + 1) for a in range(max_level) for b in range(a + 1)
            if 2 * a + 2 * b + 4 <= max_level]


# ---------------------------------------------------------------------------
# moves


@dataclass(frozen=True)
class Move:
    kind: str
    before: BraidWord
    after: BraidWord

    def text(self) -> str:
        return f"{self.kind}: {self.before.text()} -> {self.after.text()} ({self.after.strands} strands)"


LENGTH_PRESERVING = ("far-commute", "braid-relation", "flip")
REDUCING = ("free-cancel", "destabilize")


def neighbours(w: BraidWord) -> list[tuple[str, BraidWord]]:
    """Canonical words one length-preserving move away (rotation is implicit)."""
    letters = w.letters
    n = len(letters)
    out = set()
    if n >= 2:
        for p in range(n):
            a, b = letters[p], letters[(p + 1) % n]
            if abs(abs(a) - abs(b)) >= 2:
                new = list(letters)
                new[p], new[(p + 1) % n] = b, a
                out.add(("far-commute", _min_rotation(tuple(new))))
            if n >= 3:
                c = letters[(p + 2) % n]
                if a == c and abs(abs(a) - abs(b)) == 1 and (a > 0) == (b > 0):
                    rot = letters[p:] + letters[:p]
                    out.add(("braid-relation", _min_rotation((b, a, b) + rot[3:])))
    flipped = tuple((w.strands - abs(g)) * (1 if g > 0 else -1) for g in letters)
    out.add(("flip", _min_rotation(flipped)))
    return [(k, BraidWord(w.strands, t)) for k, t in sorted(out) if t != letters]


def reductions(w: BraidWord) -> list[tuple[str, BraidWord]]:
    """Length-reducing moves, in a fixed order."""
    letters = w.letters
    n = len(letters)
    out = []
    for p in range(n):
        q = (p + 1) % n
        if n >= 2 and letters[p] == -letters[q]:
            rest = tuple(g for k, g in enumerate(letters) if k not in (p, q))
            out.append(("free-cancel", BraidWord(w.strands, _min_rotation(rest))))
            break
    if w.strands >= 2:
        top = w.strands - 1
        if sum(1 for g in letters if abs(g) == top) == 1:
            rest = tuple(g for g in letters if abs(g) != top)
            out.append(("destabilize", BraidWord(w.strands - 1, _min_rotation(rest))))
        elif sum(1 for g in letters if abs(g) == 1) == 1:
            # conjugate by the half twist, then destabilize at the top
            rest = tuple((abs(g) - 1) * (1 if g > 0 else -1) for g in letters if abs(g) != 1)
            out.append(("destabilize", BraidWord(w.strands - 1, _min_rotation(rest))))
    return out


def _word_key(w: BraidWord):
    return (w.strands, len(w.letters), w.letters)


@dataclass
class ReduceResult:
    word: BraidWord
    trace: list[Move] = field(default_factory=list)
    exhausted: bool = False
    states: int = 0

    def report(self) -> str:
        lines = [f"result: {self.word.text()} on {self.word.strands} strands"]
        lines += [f"  {m.text()}" for m in self.trace]
        if self.exhausted:
            lines.append("budget exhausted: best word so far")
        return "\n".join(lines)


def _path(parents: dict, end: BraidWord) -> list[Move]:
    steps = []
    while parents[end] is not None:
        prev, kind = parents[end]
        steps.append(Move(kind, prev, end))
        end = prev
    return steps[::-1]


def reduce_word(w: BraidWord, budget: int = 10**6) -> ReduceResult:
    """Greedy descent: breadth-first search over length-preserving moves
    until a reducing move applies, then restart from the shorter word.

    The result is the smallest word (strands, length, letters) of the final
    class together with a replayable move trace.
    """
    cur = w.canonical()
    trace: list[Move] = []
    states = 0
    while True:
        parents: dict = {cur: None}
        queue = deque([cur])
        found = None
        while queue:
            s = queue.popleft()
            states += 1
            red = reductions(s)
            if red:
                found = (s, red[0])
                break
            if states >= budget:
                best = min(parents, key=_word_key)
                return ReduceResult(best, trace + _path(parents, best), True, states)
            for kind, t in neighbours(s):
                if t not in parents:
                    parents[t] = (s, kind)
                    queue.append(t)
        if found is None:
            best = min(parents, key=_word_key)
            return ReduceResult(best, trace + _path(parents, best), False, states)
        s, (kind, t) = found
        trace += _path(parents, s)
        trace.append(Move(kind, s, t))
        cur = t


def connect(a: BraidWord, b: BraidWord, budget: int = 10**6) -> list[Move] | None:
    """Length-preserving move path from ``a`` to ``b``, or None."""
    start, goal = a.canonical(), b.canonical()
    if start.strands != goal.strands or len(start) != len(goal):
        return None
    parents: dict = {start: None}
    queue = deque([start])
    while queue and len(parents) <= budget:
        s = queue.popleft()
        if s == goal:
            return _path(parents, s)
        for kind, t in neighbours(s):
            if t not in parents:
                parents[t] = (s, kind)
                queue.append(t)
    return None


def replay(start: BraidWord, trace: list[Move], end: BraidWord) -> bool:
    """Check every step of a trace is one of the declared moves."""
    cur = start.canonical()
    for m in trace:
        if m.before != cur:
            return False
        allowed = neighbours(m.before) if m.kind in LENGTH_PRESERVING else reductions(m.before)
        if (m.kind, m.after) not in allowed:
            return False
        cur = m.after
    return cur == end.canonical()


# ---------------------------------------------------------------------------
# skein expansion


@dataclass(frozen=True)
class SkeinTerm:
    coeff_word: tuple[str, ...]
    residue: BraidWord

    def text(self) -> str:
        return "".join(self.coeff_word) + " * " + self.residue.text()

    @property
    def sign(self) -> int:
        """Sign picked up under X -> -A, Y -> B."""
        return -1 if self.coeff_word.count("X") % 2 else 1

    def operator_word(self) -> tuple[str, ...]:
        return tuple("A" if c == "X" else "B" for c in self.coeff_word)


def squared_sites(w: BraidWord) -> list[int]:
    """Start positions of non-overlapping sigma_i^2 blocks, left to right."""
    sites = []
    p = 0
    while p + 1 < len(w.letters):
        if w.letters[p] > 0 and w.letters[p] == w.letters[p + 1]:
            sites.append(p)
            p += 2
        else:
            p += 1
    return sites


def skein_expand(w: BraidWord, crossings: int | None = None) -> list[SkeinTerm]:
    """Apply sigma_i^2 = Y sigma_i + X 1 at the first ``crossings`` sites."""
    sites = squared_sites(w)
    k = len(sites) if crossings is None else crossings
    if k < 0 or k > len(sites):
        raise ValueError(f"{k} skein crossings requested, word has {len(sites)} squared sites")
    chosen = sites[:k]
    out = []
    for branch in itertools.product("XY", repeat=k):
        letters = []
        p = 0
        for site, c in zip(chosen, branch):
            letters += w.letters[p:site]
            if c == "Y":
                letters.append(w.letters[site])
            p = site + 2
        letters += w.letters[p:]
        out.append(SkeinTerm(tuple(branch), BraidWord(w.strands, tuple(letters))))
    return out


def residue_blocks(term: SkeinTerm) -> list[list[int]]:
    """Strands (0-based) of the residue grouped by closure component,
    ordered by their lowest strand."""
    perm = term.residue.permutation()
    seen = set()
    blocks = []
    for s in range(term.residue.strands):
        if s in seen:
            continue
        cyc = []
        while s not in seen:
            seen.add(s)
            cyc.append(s)
            s = perm[s]
        blocks.append(sorted(cyc))
    return sorted(blocks)


def skein_ladder_expr(term: SkeinTerm, family=None):
    """Symbolic value of a ladder skein term, read off its residue.

    Each closure component of the residue is a run of consecutive rungs
    nested inside each other; neighbouring components are separated by a
    cut, which projects everything inside onto its pole part.
    """
    from .renorm import LadderFamily
    from .terms import Expr

    n = term.residue.strands
    family = LadderFamily.basic(n) if family is None else family
    loops = family.loop_counts
    inside = None
    for block in residue_blocks(term):
        if block != list(range(block[0], block[-1] + 1)):
            raise ValueError("residue is not a ladder skein term")
        chain = Expr.one()
        w = 0
        for rung in block:
            chain = Expr.atom(family.atom(rung, w)) * chain
            w += loops[rung]
        inside = chain if inside is None else chain * inside.pole_part()
    return inside * term.sign


# ---------------------------------------------------------------------------
# dictionary


@dataclass(frozen=True)
class KnotEntry:
    name: str
    crossings: int
    braid_word: BraidWord
    number: str | None  # None means unknown
    note: str = ""

    @property
    def known(self) -> bool:
        return self.number is not None

    def text(self) -> str:
        num = self.number if self.number is not None else "?"
        return f"{self.name}, {num}"

    def number_poly(self):
        """The number as a ZetaPoly when it is written in the series grammar."""
        from .symexpr import parse_poly
        if self.number is None:
            return None
        try:
            return parse_poly(self.number)
        except ValueError:
            return None


class AmbiguousMatch(LookupError):
    pass


@lru_cache(maxsize=None)
def knot_table() -> tuple[KnotEntry, ...]:
    text = resources.files("knotren").joinpath("data/knot_table.txt").read_text()
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip() if raw.lstrip().startswith("#") else raw.strip()
        if not line:
            continue
        cols = [c.strip() for c in line.split("|")]
        cols += [""] * (5 - len(cols))
        cross, name, word, number, note = cols[:5]
        if name == "none":
            continue
        bw = BraidWord.parse(word)
        if len(bw) != int(cross):
            raise ValueError(f"table row {name}: {len(bw)} letters, {cross} crossings")
        out.append(KnotEntry(name, int(cross), bw, None if number == "?" else number, note))
    return tuple(out)


def empty_crossing_numbers() -> list[int]:
    text = resources.files("knotren").joinpath("data/knot_table.txt").read_text()
    return [int(l.split("|")[0]) for l in text.splitlines()
            if not l.lstrip().startswith("#") and "| none" in l]


@lru_cache(maxsize=None)
def _reduced(w: BraidWord, budget: int) -> BraidWord:
    return reduce_word(w, budget).word


def torus_two(w: BraidWord) -> int | None:
    """k if ``w`` is sigma_1^k on two strands with k odd and >= 3."""
    if w.strands == 2 and len(w) >= 3 and len(w) % 2 and all(g == 1 for g in w.letters):
        return len(w)
    return None


def dict_lookup(w: BraidWord, budget: int = 10**6) -> KnotEntry:
    """Reduce ``w`` and match it against the table.

    Returns an entry with number None (and the reduced word) when nothing
    matches; raises AmbiguousMatch if several rows match.
    """
    red = _reduced(w.canonical(), budget)
    k = torus_two(red)
    if k is not None:
        return KnotEntry(f"(2,{k})", k, red, f"zet({k})", "torus knot family")
    hits = _table_hits(red, budget)
    if not hits:
        # knot tables do not distinguish a knot from its reverse
        rev = _reduced(BraidWord(w.strands, w.letters[::-1]).canonical(), budget)
        hits = [replace(e, note=(e.note + "; " if e.note else "") + "matched after reversal")
                for e in _table_hits(rev, budget)]
    if len(hits) > 1:
        raise AmbiguousMatch(", ".join(e.name for e in hits))
    if hits:
        return hits[0]
    return KnotEntry("unknown", len(red), red, None, "no table match")


def _table_hits(red: BraidWord, budget: int) -> list[KnotEntry]:
    return [e for e in knot_table() if _reduced(e.braid_word.canonical(), budget) == red]
