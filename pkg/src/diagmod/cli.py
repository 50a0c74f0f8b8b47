"""Command-line front end.

Every subcommand prints one JSON object (or a plain-text rendering with
``--format text``).  Exit status: 0 success, 1 a verification came out
false, 2 bad input, 3 an internal consistency check failed.

Series expressions are in the variable x and may use ``+ - * / ^``,
rational exponents, ``sqrt``, ``F[p,q]([a..],[b..], arg)``,
``HeunG(a, q, alpha, beta, gamma, delta, arg)``, ``Diag(ratfun)``,
``Hadamard(A, B)`` and nested sums ``sum(k=0..n, binom(n,k)^3)``.
"""

from __future__ import annotations

import argparse
import ast
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import catalog
from .arith import FactorialRatioSpec, HypergeomCoeffSpec, integrality_scan, rat_str
from .dfinite import DiffOp, HeunSpec, exterior_square_order4, frobenius_solutions, guess_ode, heun_series
from .diagonal import BinSumExpr, RationalFunctionRep, binsum_to_ratfun, diagonal
from .expr import ParseError, format_series, parse_operator, parse_poly, parse_ratfun
from .identities import hypergeometric, verify_catalog
from .ising import chi_normalized_mod, chi_sign_variant, chi_tilde, phiD_series
from .mirror import InvariantBreach, integrality_report, mirror_map, nome, yukawa
from .modp import AlgRelation, find_relation, verify_operator_mod_p, verify_relation
from .series import PreconditionError, UniSeries

ORDER_ENV = "DIAGMOD_ORDER"
DEFAULT_ORDER = 10

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# expression trees


@dataclass(frozen=True)
class Node:
    """kind in num, var, +, -, *, /, ^, neg, call, list, sum, F."""

    kind: str
    args: tuple = ()
    value: object = None


_SUM_RE = re.compile(r"\bsum\(\s*([A-Za-z_]\w*)\s*=\s*0\s*\.\.\s*([A-Za-z_]\w*)\s*,")
_RAT_RE = re.compile(r"-?\d+(/\d+)?")
_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.Pow: "^"}


def parse(text: str) -> Node:
    """Text to expression tree; syntax errors report line and column."""
    src = _SUM_RE.sub(lambda m: f"__sum__({m.group(1)}, {m.group(2)},", text.replace("^", "**"))
    try:
        tree = ast.parse(src.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.offset}: {exc.msg} in {text!r}") from None
    return _convert(tree)


def _convert(nd) -> Node:
    if isinstance(nd, ast.BinOp) and type(nd.op) in _BINOPS:
        return Node(_BINOPS[type(nd.op)], (_convert(nd.left), _convert(nd.right)))
    if isinstance(nd, ast.UnaryOp) and isinstance(nd.op, ast.USub):
        return Node("neg", (_convert(nd.operand),))
    if isinstance(nd, ast.UnaryOp) and isinstance(nd.op, ast.UAdd):
        return _convert(nd.operand)
    if isinstance(nd, ast.Constant) and isinstance(nd.value, int) and not isinstance(nd.value, bool):
        return Node("num", value=nd.value)
    if isinstance(nd, ast.Name):
        return Node("var", value=nd.id)
    if isinstance(nd, ast.List):
        return Node("list", tuple(_convert(e) for e in nd.elts))
    if isinstance(nd, ast.Call) and not nd.keywords:
        f = nd.func
        if isinstance(f, ast.Name) and f.id == "__sum__":
            if len(nd.args) != 3 or not all(isinstance(a, ast.Name) for a in nd.args[:2]):
                raise ParseError("sum needs the form sum(k=0..n, body)")
            return Node("sum", (_convert(nd.args[2]),), (nd.args[0].id, nd.args[1].id))
        if isinstance(f, ast.Name):
            return Node("call", tuple(_convert(a) for a in nd.args), f.id)
        if (isinstance(f, ast.Subscript) and isinstance(f.value, ast.Name) and f.value.id == "F"
                and isinstance(f.slice, ast.Tuple) and len(f.slice.elts) == 2
                and all(isinstance(e, ast.Constant) for e in f.slice.elts)):
            pq = tuple(int(e.value) for e in f.slice.elts)
            return Node("F", tuple(_convert(a) for a in nd.args), pq)
    col = getattr(nd, "col_offset", 0) + 1
    raise ParseError(f"column {col}: unsupported syntax {ast.unparse(nd)!r}")


def to_text(node: Node) -> str:
    """Canonical text; parse(to_text(t)) == t."""
    k = node.kind
    if k == "num":
        return str(node.value)
    if k == "var":
        return node.value
    if k == "neg":
        return f"(-{to_text(node.args[0])})"
    if k in ("+", "-", "*", "/", "^"):
        return f"({to_text(node.args[0])} {k} {to_text(node.args[1])})"
    if k == "list":
        return "[" + ", ".join(to_text(a) for a in node.args) + "]"
    if k == "call":
        return f"{node.value}(" + ", ".join(to_text(a) for a in node.args) + ")"
    if k == "sum":
        idx, bound = node.value
        return f"sum({idx}=0..{bound}, {to_text(node.args[0])})"
    if k == "F":
        p, q = node.value
        return f"F[{p},{q}](" + ", ".join(to_text(a) for a in node.args) + ")"
    raise ValueError(f"unknown node kind {k!r}")


def variables(node: Node) -> list:
    """Free variable names, in natural order (z2 before z10)."""
    names = set()

    def walk(t):
        if t.kind == "var":
            names.add(t.value)
        for a in t.args:
            walk(a)

    walk(node)
    key = lambda s: (re.sub(r"\d+$", "", s), int(re.search(r"\d*$", s).group() or -1))
    return sorted(names, key=key)


def constant(node: Node) -> Fraction:
    k = node.kind
    if k == "num":
        return Fraction(node.value)
    if k == "neg":
        return -constant(node.args[0])
    if k in ("+", "-", "*", "/"):
        a, b = constant(node.args[0]), constant(node.args[1])
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else _zero_div()}[k]
    if k == "^":
        e = constant(node.args[1])
        if e.denominator != 1:
            raise ParseError("constant powers must be integral")
        return constant(node.args[0]) ** int(e)
    raise ParseError(f"expected a rational constant, got {to_text(node)}")


def _zero_div():
    raise ParseError("division by zero")


def to_ratfun(node: Node) -> RationalFunctionRep:
    names = variables(node)
    if not names:
        raise ParseError("a rational function needs at least one variable")
    num, den = parse_ratfun(to_text(node), names)
    return RationalFunctionRep(num, den)


def to_binsum(node: Node) -> BinSumExpr:
    indices, outer = [], "n"
    while node.kind == "sum":
        idx, bound = node.value
        if bound != outer:
            raise ParseError(f"sum over {idx} must run to {outer}, not {bound}")
        indices.append(idx)
        outer = idx
        node = node.args[0]
    if not indices:
        raise ParseError("expected sum(k=0..n, ...)")
    return BinSumExpr.parse(to_text(node), tuple(indices))


def to_series(node: Node, N: int, var: str = "x") -> UniSeries:
    """Evaluate to a power series in ``var`` over Q through var^N."""
    work = N + 8

    def div(a: UniSeries, b: UniSeries) -> UniSeries:
        v = b.valuation()
        if v is None:
            raise PreconditionError("division by a series that vanishes to the working order")
        if v:
            a, b = a.shift(-v), b.shift(-v)
        return a * b.inv()

    def kernel(coeffs: UniSeries, arg: UniSeries) -> UniSeries:
        if arg.c[0]:
            raise PreconditionError("the argument must vanish at 0")
        return coeffs.compose(arg)

    def ev(t: Node) -> UniSeries:
        k = t.kind
        if k == "num":
            return UniSeries.monomial(0, work, None, var, t.value)
        if k == "var":
            if t.value != var:
                raise ParseError(f"unknown variable {t.value!r} in a series in {var}")
            return UniSeries.monomial(1, work, None, var)
        if k == "neg":
            return -ev(t.args[0])
        if k in ("+", "-", "*"):
            a, b = ev(t.args[0]), ev(t.args[1])
            return a + b if k == "+" else a - b if k == "-" else a * b
        if k == "/":
            return div(ev(t.args[0]), ev(t.args[1]))
        if k == "^":
            base, e = ev(t.args[0]), constant(t.args[1])
            if e.denominator == 1 and e >= 0:
                return base ** int(e)
            if e.denominator == 1:
                return div(UniSeries.one(work), base ** int(-e))
            return base.power(e)
        if k == "sum":
            return to_binsum(t).series(work)
        if k == "F":
            up, low, arg = t.args
            if up.kind != "list" or low.kind != "list":
                raise ParseError("F[p,q] takes [upper], [lower], argument")
            p, q = t.value
            upper = [constant(a) for a in up.args]
            lower = [constant(b) for b in low.args]
            if (len(upper), len(lower)) != (p, q):
                raise ParseError(f"F[{p},{q}] needs {p} upper and {q} lower parameters")
            return kernel(hypergeometric(upper, lower, work), ev(arg))
        if k == "call":
            name, args = t.value, t.args
            if name == "sqrt" and len(args) == 1:
                return ev(args[0]).power(Fraction(1, 2))
            if name == "HeunG" and len(args) == 7:
                spec = HeunSpec(*[constant(a) for a in args[:6]])
                return kernel(heun_series(spec, work), ev(args[6]))
            if name == "Diag" and len(args) == 1:
                return diagonal(to_ratfun(args[0]), work)
            if name == "Hadamard" and len(args) == 2:
                return ev(args[0]).hadamard(ev(args[1]))
            raise ParseError(f"unknown function {name}/{len(args)}")
        raise ParseError(f"cannot evaluate {to_text(t)} as a series")

    return ev(node).truncate(N)


def series_arg(text: str, N: int) -> UniSeries:
    """A series given as an expression or as a comma-separated coefficient list."""
    if re.fullmatch(r"\s*-?\d+(/\d+)?(\s*,\s*-?\d+(/\d+)?)+\s*", text):
        cs = [Fraction(c.strip()) for c in text.split(",")]
        return UniSeries(cs[: N + 1], min(N, len(cs) - 1))
    return to_series(parse(text), N)


# ---------------------------------------------------------------------------
# output


def _num(c):
    c = Fraction(c) if not isinstance(c, int) else c
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return rat_str(c) if isinstance(c, Fraction) else int(c)


def _coeffs(f: UniSeries) -> list:
    return [_num(c) for c in f.c]


def _emit(result: dict, fmt: str, out=sys.stdout) -> None:
    if fmt == "json":
        out.write(json.dumps(result, sort_keys=True) + "\n")
        return
    for key in sorted(result):
        val = result[key]
        if isinstance(val, list) and val and all(isinstance(v, int) or _RAT_RE.fullmatch(str(v)) for v in val):
            val = format_series([Fraction(v) for v in val])
        out.write(f"{key}: {val}\n")


# ---------------------------------------------------------------------------
# subcommands


def _operator(args) -> DiffOp:
    if args.op_name:
        return catalog.operator(args.op_name)
    if args.op_file:
        with open(args.op_file) as fh:
            text = fh.read().strip()
        return catalog.operator(text) if text in catalog.operator_names() else parse_operator(text)
    if args.op:
        return parse_operator(args.op)
    raise ParseError("an operator is required (--op, --op-name or --op-file)")


def cmd_diag(args, N):
    R = to_ratfun(parse(args.expr))
    d = diagonal(R, N, args.prime)
    return {"variables": list(R.variables), "series": _coeffs(d)}, True


def cmd_hadamard(args, N):
    f, g = series_arg(args.a, N), series_arg(args.b, N)
    return {"series": _coeffs(f.hadamard(g))}, True


def cmd_binsum2rat(args, N):
    e = to_binsum(parse(args.expr))
    R = binsum_to_ratfun(e)
    d = diagonal(R, N)
    ok = d.agrees(e.series(N), N)
    return {"variables": list(R.variables), "numerator": str(R.num), "denominator": str(R.den),
            "factors": [str(f) for f in R.factors], "series": _coeffs(d), "matches_sum": ok}, ok


def _modp_series(args, N, p, tag_series=None) -> UniSeries:
    if args.chi:
        return chi_normalized_mod(args.chi, N, p)
    src = args.series or tag_series
    if src is None:
        raise ParseError("a series is required (--series or --chi)")
    if src == "chi3":
        return chi_normalized_mod(3, N, p)
    if src.startswith("diag:"):
        return diagonal(to_ratfun(parse(src[5:])), N, p)
    return series_arg(src, N).reduce_mod_p(p)


def cmd_modp_verify(args, N):
    if args.op_tag or args.op:
        if args.op_tag:
            L, p = catalog.modp_operator(args.op_tag)
            entry = next(e for e in catalog.load_json("modp")["operators"] if e["tag"] == args.op_tag)
            f = _modp_series(args, N, p, entry["series"])
        else:
            p = _need_prime(args)
            L, f = parse_operator(args.op, p), _modp_series(args, N, p)
        ok = verify_operator_mod_p(L, f, p, N)
        return {"kind": "operator", "prime": p, "order": N, "holds": ok}, ok
    if args.relation:
        entry = next((e for e in catalog.load_json("modp")["relations"] if e["tag"] == args.relation), None)
        if entry is None:
            raise ParseError(f"unknown relation {args.relation!r}")
        p = entry["p"]
        R = catalog.relation(args.relation)
        f = _modp_series(args, N, p, entry["series"])
    else:
        p = _need_prime(args)
        if not args.poly:
            raise ParseError("give --relation, --poly or --op")
        R = AlgRelation(parse_poly(args.poly, ("x", "y"), p))
        f = _modp_series(args, N, p)
    ok = verify_relation(R, f, N)
    return {"kind": "relation", "prime": p, "order": N, "holds": ok}, ok


def _need_prime(args) -> int:
    if args.prime is None:
        raise ParseError("--prime is required")
    return args.prime


def cmd_modp_find(args, N):
    p = _need_prime(args)
    f = _modp_series(args, N, p)
    rel = find_relation(f, args.dx, args.dy)
    return {"prime": p, "relation": None if rel is None else str(rel)}, rel is not None


def cmd_guess_ode(args, N):
    f = series_arg(args.series, N)
    L = guess_ode(f, args.max_order, args.max_degree)
    return {"operator": None if L is None else str(L)}, L is not None


def cmd_frobenius(args, N):
    b = frobenius_solutions(_operator(args), N)
    return {"rho": b.rho, "parts": [_coeffs(y) for y in b.parts]}, True


def cmd_nome(args, N):
    return {"series": _coeffs(nome(_operator(args), N))}, True


def cmd_mirror(args, N):
    return {"series": _coeffs(mirror_map(_operator(args), N))}, True


def cmd_yukawa(args, N):
    y = yukawa(_operator(args), N)
    out = {"K_q": _coeffs(y.K_q), "K_x": _coeffs(y.K_x)}
    if y.K_star_q is not None:
        out["K_star_q"] = _coeffs(y.K_star_q)
    return out, True


def cmd_extsq(args, N):
    e = exterior_square_order4(_operator(args), max(N, 60))
    return {"order": e.order, "operator": str(e.operator)}, True


def cmd_chi(args, N):
    if args.signs:
        signs = tuple(-1 if s.strip() == "-" else 1 for s in args.signs.split(","))
        f = chi_sign_variant(args.n, signs, N)
        return {"n": args.n, "signs": args.signs, "series": _coeffs(f)}, True
    if args.prime:
        f = chi_normalized_mod(args.n, N, args.prime)
        return {"n": args.n, "prime": args.prime, "series": [int(c) for c in f.c]}, True
    f = chi_tilde(args.n, N)
    return {"n": args.n, "normalization": 2**args.n,
            "series": _coeffs(f.scale(Fraction(1, 2**args.n)))}, True


def cmd_phid(args, N):
    return {"n": args.n, "series": _coeffs(phiD_series(args.n, N))}, True


def cmd_identity(args, N):
    results = verify_catalog(N, args.tag or None)
    if args.tag and not results:
        raise ParseError(f"no catalog entry among {args.tag}")
    ok = all(r.ok for r in results)
    return {"order": N, "results": [{"tag": r.tag, "kind": r.kind, "ok": r.ok, "detail": r.detail}
                                    for r in results]}, ok


def _rat_list(text: str) -> tuple:
    return tuple(Fraction(t.strip()) for t in text.split(",") if t.strip())


def cmd_integrality(args, N):
    if args.hyp:
        upper, lower, scale = (s.strip() for s in args.hyp.split(";"))
        spec = HypergeomCoeffSpec(_rat_list(upper), _rat_list(lower), Fraction(scale))
        r = integrality_scan(spec, N)
        return {"all_integer": r.all_integer, "first_failure": r.first_failure, "tested": r.tested}, r.all_integer
    if args.factorial:
        num, den = (s.strip() for s in args.factorial.split("/"))
        spec = FactorialRatioSpec(tuple(int(a) for a in num.split(",")), tuple(int(b) for b in den.split(",")))
        r = integrality_scan(spec, N)
        return {"all_integer": r.all_integer, "first_failure": r.first_failure, "tested": r.tested}, r.all_integer
    if not args.series:
        raise ParseError("give --series, --hyp or --factorial")
    f = series_arg(args.series, N)
    rep = integrality_report(f)
    out = rep.to_json()
    out["witness"] = list(rep.witness) if rep.witness else None
    return out, rep.integral


COMMANDS = {
    "diag": cmd_diag, "hadamard": cmd_hadamard, "binsum2rat": cmd_binsum2rat,
    "modp-verify": cmd_modp_verify, "modp-find": cmd_modp_find, "guess-ode": cmd_guess_ode,
    "frobenius": cmd_frobenius, "nome": cmd_nome, "mirror": cmd_mirror, "yukawa": cmd_yukawa,
    "extsq": cmd_extsq, "chi": cmd_chi, "phid": cmd_phid, "identity": cmd_identity,
    "integrality": cmd_integrality,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None, help=f"truncation order (default ${ORDER_ENV} or {DEFAULT_ORDER})")
    common.add_argument("--prime", type=int, default=None)
    common.add_argument("--format", choices=("json", "text"), default="json")

    ops = argparse.ArgumentParser(add_help=False)
    ops.add_argument("--op", help="operator text in x, D and theta")
    ops.add_argument("--op-name", help="operator from the shipped catalog")
    ops.add_argument("--op-file", help="file holding operator text or a catalog name")

    p = argparse.ArgumentParser(prog="diagmod", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("diag", parents=[common], help="diagonal of a rational function")
    s.add_argument("expr")
    s = sub.add_parser("hadamard", parents=[common], help="Hadamard product of two series")
    s.add_argument("a")
    s.add_argument("b")
    s = sub.add_parser("binsum2rat", parents=[common], help="rational function for a binomial sum")
    s.add_argument("expr")
    for name in ("modp-verify", "modp-find"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--series", help="series expression, coefficient list, chi3 or diag:RATFUN")
        s.add_argument("--chi", type=int, help="use chi~(n)/2^n")
    s = sub.choices["modp-verify"]
    s.add_argument("--relation", help="relation tag from the catalog")
    s.add_argument("--poly", help="relation P(x, y)")
    s.add_argument("--op", help="operator text over F_p")
    s.add_argument("--op-tag", help="mod-p operator from the catalog")
    s = sub.choices["modp-find"]
    s.add_argument("--dx", type=int, default=10)
    s.add_argument("--dy", type=int, default=2)
    s = sub.add_parser("guess-ode", parents=[common])
    s.add_argument("--series", required=True)
    s.add_argument("--max-order", type=int, default=6)
    s.add_argument("--max-degree", type=int, default=12)
    for name in ("frobenius", "nome", "mirror", "yukawa", "extsq"):
        sub.add_parser(name, parents=[common, ops])
    s = sub.add_parser("chi", parents=[common])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--signs", help="comma-separated signs such as -,+,+")
    s = sub.add_parser("phid", parents=[common])
    s.add_argument("--n", type=int, required=True)
    s = sub.add_parser("identity", parents=[common])
    s.add_argument("--tag", action="append")
    s = sub.add_parser("integrality", parents=[common])
    s.add_argument("--series")
    s.add_argument("--hyp", help="upper;lower;scale, e.g. 1/9,4/9,5/9;1/3,1;729")
    s.add_argument("--factorial", help="num/den multipliers, e.g. 30,1/15,10,6")
    return p


def _default_order() -> int:
    raw = os.environ.get(ORDER_ENV)
    if raw is None:
        return DEFAULT_ORDER
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{ORDER_ENV} must be an integer, got {raw!r}") from None


def run(argv: Sequence[str] | None = None, out=sys.stdout) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    fmt = args.format
    try:
        N = args.order if args.order is not None else _default_order()
        if N < 0:
            raise ParseError("--order must be nonnegative")
        result, ok = COMMANDS[args.command](args, N)
    except (ParseError, PreconditionError, KeyError, ValueError, ZeroDivisionError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc).strip("'\"")}, fmt, out)
        return EXIT_USAGE
    except InvariantBreach as exc:
        _emit({"error": "InvariantBreach", "message": str(exc)}, fmt, out)
        return EXIT_INTERNAL
    except Exception as exc:  # anything else is a bug surfaced as an internal failure
        _emit({"error": type(exc).__name__, "message": str(exc)}, fmt, out)
        return EXIT_INTERNAL
    _emit(result, fmt, out)
    return EXIT_OK if ok else EXIT_FALSE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
