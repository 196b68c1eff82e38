"""Command-line front end: ``knotren <command> ...``."""
from __future__ import annotations

import argparse
import hashlib
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import braid, eulersums, numerics, rationality
from .oneloop import Topology, product_Pn
from .overlap import OverlapFamily, z2_overlap
from .renorm import LadderFamily, z_ladder
from .symexpr import LaurentSeries, ParseError, TruncationError, format_series, parse_poly, parse_series

GOLDEN_SHA256 = "bc32ac88fed14fa235a69c0e9a47d5406e6f51a222b0542e1584c0deb763d168"


class CommandError(Exception):
    """A failure to report on stderr with a non-zero exit status."""


@dataclass
class Report:
    rows: list[tuple[str, object]]
    ok: bool = True

    def render(self, fmt: str) -> str:
        if fmt == "machine":
            return "\n".join(f"{k}={_one_line(v)}" for k, v in self.rows)
        width = max((len(k) for k, _ in self.rows), default=0)
        return "\n".join(f"{k.ljust(width)}  {v}" if k else str(v) for k, v in self.rows)


def _one_line(v) -> str:
    return str(v).replace("\n", " ; ")


def _pretty(text: str) -> str:
    text = re.sub(r"zet\((\d+)\)", r"ζ(\1)", text)
    return re.sub(r"\bge\b", "γ", text)


# ---------------------------------------------------------------------------
# golden data


def load_golden(path: Path | None = None) -> dict[str, LaurentSeries]:
    if path is None:
        raw = resources.files("knotren").joinpath("data/golden_ladder.txt").read_bytes()
        digest = hashlib.sha256(raw).hexdigest()
        if digest != GOLDEN_SHA256:
            raise CommandError(f"golden file hash mismatch: {digest}")
    else:
        raw = Path(path).read_bytes()
    entries: dict[str, list[str]] = {}
    current = None
    for lineno, line in enumerate(raw.decode().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line[0].isspace():
            if current is None:
                raise CommandError(f"golden line {lineno}: continuation without entry")
            entries[current].append(line.strip())
            continue
        if ":=" not in line:
            raise CommandError(f"golden line {lineno}: expected NAME := series")
        name, body = (s.strip() for s in line.split(":=", 1))
        current = name
        entries[name] = [body]
    out = {}
    for name, parts in entries.items():
        try:
            out[name] = parse_series(" ".join(parts))
        except ParseError as exc:
            raise CommandError(f"golden entry {name}: {exc}") from None
    return out


def first_mismatch(expected: LaurentSeries, got: LaurentSeries):
    """(power, monomial text, expected coeff, computed coeff) or None."""
    powers = sorted(set(k for k, _ in expected.items()) | set(k for k, _ in got.items()))
    for k in powers:
        e, g = expected.coeff(k), got.coeff(k)
        monos = sorted(set(m for m, _ in e.items()) | set(m for m, _ in g.items()),
                       key=lambda m: m.sort_key())
        for m in monos:
            ce, cg = e.coeff(m), g.coeff(m)
            if ce != cg:
                return k, m.text(), ce, cg
    return None


def compute_golden_entry(name: str, order: int | None) -> LaurentSeries:
    kind, r = name[0], int(name[2:-1])
    n = r + 1
    per_factor = n + 1 if order is None else order
    if kind == "Z":
        return z_ladder(n, order=per_factor).series
    try:
        # n factors known through eps^order give the product through eps^(order-n+1)
        return product_Pn(n, per_factor - n + 1).pole_part()
    except TruncationError as exc:
        raise TruncationError(f"truncation window too small: {exc}") from None


def verify(golden: dict[str, LaurentSeries], order: int | None = None) -> Report:
    rows: list[tuple[str, object]] = []
    passed = 0
    for name in sorted(golden, key=lambda s: (int(s[2:-1]), s[0] != "Z")):
        try:
            got = compute_golden_entry(name, order)
        except TruncationError as exc:
            rows.append((name, f"FAIL {exc}"))
            continue
        bad = first_mismatch(golden[name], got)
        if bad is None:
            passed += 1
            rows.append((name, "ok"))
        else:
            k, mono, ce, cg = bad
            rows.append((name, f"MISMATCH at x^{k} [{mono}]: golden {ce}, computed {cg}"))
    rows.append(("matched", f"{passed}/{len(golden)}"))
    return Report(rows, passed == len(golden))


# ---------------------------------------------------------------------------
# commands


def cmd_zfactor(args) -> Report:
    if args.loops < 1:
        raise _usage(args, "--loops must be at least 1")
    if args.family == "basic":
        top = Topology("basic")
    else:
        path = Path(args.family)
        try:
            top = Topology.from_text(path.read_text(), name=path.stem)
        except OSError as exc:
            raise CommandError(f"cannot read family file: {exc}") from None
        except ValueError as exc:
            raise CommandError(f"bad family file: {exc}") from None
    n = args.loops
    if args.overlap:
        if n < 2:
            raise _usage(args, "overlapping ladders need --loops >= 2")
        res = z2_overlap(n, OverlapFamily((top,) * n, (top,) * n), order=args.order)
        kind = "overlap"
    else:
        res = z_ladder(n, LadderFamily((top,) * n), order=args.order)
        kind = "ladder"
    return Report([("kind", kind), ("family", args.family), ("loops", res.loop_order),
                   ("series", format_series(res.series)),
                   ("rational", str(res.rational_flag).lower()), ("terms", res.term_count)])


def cmd_verify(args) -> Report:
    golden = load_golden(Path(args.golden) if args.golden else None)
    return verify(golden, args.order)


def cmd_braid(args) -> Report:
    try:
        w = braid.BraidWord.parse(args.word, strands=args.strands)
    except ParseError as exc:
        raise CommandError(f"braid word: {exc}") from None
    if args.action == "components":
        return Report([("word", w.text()), ("strands", w.strands),
                       ("components", braid.closure_components(w))])
    if args.action == "reduce":
        res = braid.reduce_word(w, args.budget)
        rows = [("word", w.text()), ("result", res.word.text()),
                ("strands", res.word.strands), ("states", res.states),
                ("exhausted", str(res.exhausted).lower())]
        rows += [(f"step{i}", m.text()) for i, m in enumerate(res.trace, start=1)]
        rows.append(("replay", "ok" if braid.replay(w, res.trace, res.word) else "FAILED"))
        return Report(rows)
    if args.action == "skein":
        try:
            terms = braid.skein_expand(w, args.crossings)
        except ValueError as exc:
            raise CommandError(str(exc)) from None
        rows = [("word", w.text()), ("terms", len(terms))]
        rows += [(f"term{i}", f"{t.text()}  components={braid.closure_components(t.residue)}")
                 for i, t in enumerate(terms, start=1)]
        return Report(rows)
    try:
        entry = braid.dict_lookup(w, args.budget)
    except braid.AmbiguousMatch as exc:
        return Report([("word", w.text()), ("match", f"ambiguous: {exc}")], ok=False)
    number = entry.number if entry.known else "?"
    shown = number if args.format == "machine" else _pretty(number)
    rows = [("word", w.text()), ("match", f"{entry.name}, {shown}"),
            ("reduced", entry.braid_word.text())]
    if entry.note:
        rows.append(("note", entry.note))
    return Report(rows)


def cmd_euler(args) -> Report:
    a = args.params
    if args.action in ("count", "search"):
        if len(a) != 2:
            raise _usage(args, f"euler {args.action} takes L and K")
        l, k = a
        if args.action == "count":
            return Report([("l", l), ("k", k), ("E", eulersums.euler_count(l, k))])
        return Report([("l", l), ("k", k), ("S", eulersums.search_space(l, k))])
    if len(a) != 1:
        raise _usage(args, f"euler {args.action} takes one integer")
    if args.action == "zigzag":
        sym, val = eulersums.zigzag_term(a[0], args.precision)
        return Report([("loops", a[0]),
                       ("term", f"{eulersums.zigzag_coefficient(a[0])} * zet({2 * a[0] - 3}) "
                                f"≈ {val.digits(20)}")])
    fam = eulersums.family_counts(a[0])
    rows = [("loops", a[0])]
    for key, items in fam.items():
        rows.append((key, f"{len(items)}: " + " ".join(s.text() for s in items)))
    return Report(rows)


def cmd_rational(args) -> Report:
    if args.action == "check":
        try:
            s = parse_series(_read_text(args.params[0]))
        except ParseError as exc:
            raise CommandError(f"series: {exc}") from None
        ok, bad = rationality.assert_rational(s)
        rows = [("rational", str(ok).lower())]
        if bad:
            rows.append(("first_offender", f"x^{bad[0]} [{bad[1].text()}]"))
        return Report(rows, ok)
    try:
        n, r = (int(v) for v in args.params)
    except ValueError:
        raise _usage(args, f"rational {args.action} takes integers N and R") from None
    fn = {"t": rationality.t_sum, "u": rationality.u_sum, "s": rationality.s_sum}[args.action]
    return Report([("n", n), ("r", r), (args.action.upper(), fn(n, r))])


def cmd_numeric(args) -> Report:
    bits = args.precision or numerics.default_bits()
    if args.action == "gegenbauer":
        n = int(args.params[0]) if args.params else 10**6
        v = numerics.gegenbauer_zeta3_check(n)
        return Report([("N", n), ("partial_sum", v.digits(17)),
                       ("tail_bound", f"{float(v.error):.3e}"), ("status", "ok")])
    if args.action == "eval":
        if len(args.params) != 1:
            raise _usage(args, "numeric eval takes a series (text or file)")
        try:
            s = parse_series(_read_text(args.params[0]))
            v = numerics.eval_series_numeric(s, Fraction(args.eps), bits)
        except (ParseError, numerics.OpaqueSymbolError) as exc:
            raise CommandError(str(exc)) from None
        return Report([("eps", args.eps), ("value", v.digits(30)),
                       ("error_bound", numerics.mp.nstr(v.error, 3)), ("bits", bits)])
    if len(args.params) != 1 or not args.basis:
        raise _usage(args, "numeric fit takes a value and --basis")
    try:
        value = _numeric_value(args.params[0], bits)
        basis = [eulersums.zeta(int(t.strip().removeprefix("zet(").rstrip(")")))
                 for t in args.basis.split(",")]
    except (ValueError, ParseError) as exc:
        raise CommandError(str(exc)) from None
    try:
        coeffs = numerics.fit_rational_combination(value, basis, args.max_denominator)
    except numerics.FitFailure as exc:
        return Report([("fit", "failed"), ("reason", str(exc))], ok=False)
    text = " + ".join(f"{c} * {b.text()}" for c, b in zip(coeffs, basis))
    return Report([("fit", text)])


def _numeric_value(text: str, bits: int) -> numerics.PrecisionFloat:
    """A decimal literal, or a polynomial in the series grammar."""
    try:
        with numerics.mp.workprec(bits + 16):
            v = numerics.mp.mpf(text)
        return numerics.PrecisionFloat(v, abs(v) * numerics.mp.mpf(2) ** (-bits), bits)
    except (ValueError, TypeError):
        return numerics.eval_poly(parse_poly(text), bits)


def _read_text(arg: str) -> str:
    p = Path(arg)
    return p.read_text() if p.is_file() else arg


def _usage(args, msg: str) -> SystemExit:
    args._parser.error(msg)  # exits with status 2
    return SystemExit(2)  # pragma: no cover


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None,
                        help="per-factor expansion order (highest eps power kept)")
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (env {numerics.PRECISION_ENV})")
    common.add_argument("--budget", type=int, default=10**6, help="braid search budget")
    common.add_argument("--format", choices=("text", "machine"), default="text")

    p = argparse.ArgumentParser(prog="knotren", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zfactor", parents=[common], help="ladder or overlap counterterm")
    z.add_argument("--family", default="basic", help="'basic' or a topology key=value file")
    z.add_argument("--loops", type=int, required=True, help="number of rungs")
    z.add_argument("--overlap", action="store_true")
    z.set_defaults(func=cmd_zfactor)

    v = sub.add_parser("verify", parents=[common], help="compare against the golden tables")
    v.add_argument("--golden", default=None, help="alternative golden file (not hash-checked)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("braid", parents=[common], help="braid word tools")
    b.add_argument("action", choices=("reduce", "skein", "components", "lookup"))
    b.add_argument("word")
    b.add_argument("--strands", type=int, default=None)
    b.add_argument("--crossings", type=int, default=None, help="skein sites to expand")
    b.set_defaults(func=cmd_braid)

    e = sub.add_parser("euler", parents=[common], help="Euler sum counts and zig-zag terms")
    e.add_argument("action", choices=("count", "search", "zigzag", "families"))
    e.add_argument("params", type=int, nargs="+")
    e.set_defaults(func=cmd_euler)

    r = sub.add_parser("rational", parents=[common], help="S/T/U sums and rationality checks")
    r.add_argument("action", choices=("s", "t", "u", "check"))
    r.add_argument("params", nargs="+")
    r.set_defaults(func=cmd_rational)

    nm = sub.add_parser("numeric", parents=[common], help="numeric evaluation and fitting")
    nm.add_argument("action", choices=("eval", "fit", "gegenbauer"))
    nm.add_argument("params", nargs="*")
    nm.add_argument("--eps", default="1/100")
    nm.add_argument("--basis", default=None, help="comma list such as zet(3),zet(5)")
    nm.add_argument("--max-denominator", type=int, default=64)
    nm.set_defaults(func=cmd_numeric)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._parser = parser
    try:
        report = args.func(args)
    except (CommandError, TruncationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.render(args.format))
    return 0 if report.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
