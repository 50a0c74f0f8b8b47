"""Hypergeometric identities with two pullbacks, modular curves, and P*_11.

Every quantity is an explicit power series over Q: algebraic prefactors and
pullbacks are rational expressions in x with rational powers (constant term
an exact rational power) and ``sqrt``.  A kernel pFq is composed with a
pullback that vanishes at 0.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .arith import HypergeomCoeffSpec, MultiPoly, hypergeom_coeffs
from .dfinite import HeunSpec, heun_series
from .diagonal import BinSumExpr
from .expr import ParseError, parse_poly
from .series import PreconditionError, UniSeries

GUARD = 8          # extra working order absorbed by divisions by x^k
RECHECK = 10       # identities are re-verified this many orders further


# ---------------------------------------------------------------------------
# algebraic series expressions


def _rational_literal(node) -> Fraction:
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return Fraction(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_rational_literal(node.operand)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
        return _rational_literal(node.left) / _rational_literal(node.right)
    raise ParseError(f"exponent must be a rational literal: {ast.unparse(node)}")


def eval_series(text: str, N: int, sqrt_sign: int = 1, var: str = "x") -> UniSeries:
    """Expand an algebraic expression in ``var`` through var^N.

    ``sqrt_sign=-1`` takes the Galois conjugate of every ``sqrt(...)``.
    A rational power needs a constant term that is an exact rational power.
    """
    work = N + GUARD
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None

    def const(c) -> UniSeries:
        return UniSeries.monomial(0, work, None, var, Fraction(c))

    def div(a: UniSeries, b: UniSeries) -> UniSeries:
        v = b.valuation()
        if v is None:
            raise PreconditionError(f"division by a series that vanishes through x^{b.order}")
        if v:
            a, b = a.shift(-v), b.shift(-v)
        return a * b.inv()

    def walk(node) -> UniSeries:
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = walk(node.left)
                alpha = _rational_literal(node.right)
                if alpha.denominator == 1:
                    if alpha >= 0:
                        return base ** int(alpha)
                    return div(const(1), base ** int(-alpha))
                if base.valuation() != 0:
                    raise PreconditionError(
                        f"power {alpha} of a series without constant term in {text!r}")
                try:
                    return base.power(alpha)
                except PreconditionError as exc:
                    raise PreconditionError(
                        f"inadmissible constant term {base.c[0]} for power {alpha}: {exc}") from None
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return div(left, right)
            raise ParseError(f"unsupported operator in {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return const(node.value)
        if isinstance(node, ast.Name) and node.id == var:
            return UniSeries.monomial(1, work, None, var)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1):
            arg = walk(node.args[0])
            if arg.valuation() != 0:
                raise PreconditionError(f"sqrt of a series without constant term in {text!r}")
            root = arg.power(Fraction(1, 2))
            return root if sqrt_sign == 1 else -root
        raise ParseError(f"unsupported syntax in {text!r}: {ast.unparse(node)}")

    return walk(tree).truncate(N)


def hypergeometric(upper: Sequence, lower: Sequence, N: int) -> UniSeries:
    spec = HypergeomCoeffSpec(tuple(upper), tuple(lower))
    return UniSeries(hypergeom_coeffs(spec, N), N)


# ---------------------------------------------------------------------------
# catalog types


@dataclass(frozen=True)
class Side:
    """One expression of an identity.

    The value is prefactor * core^power, where the core is
    pFq(upper; lower; pullback) for kind "hyp", an algebraic expression for
    "expr", HeunG(a, q, alpha, beta, gamma, delta; s x) for "heun" and the
    generating function of a nested binomial sum for "binsum".
    """

    kind: str
    prefactor: str = "1"
    upper: tuple = ()
    lower: tuple = ()
    pullback: str = ""
    text: str = ""
    params: tuple = ()
    indices: tuple = ("k",)
    power: int = 1

    def series(self, N: int, sqrt_sign: int = 1) -> UniSeries:
        core = self._core(N, sqrt_sign)
        if self.power != 1:
            core = core ** self.power
        if self.prefactor != "1":
            core = eval_series(self.prefactor, N, sqrt_sign) * core
        return core

    def _core(self, N: int, sqrt_sign: int) -> UniSeries:
        if self.kind == "hyp":
            u = eval_series(self.pullback, N, sqrt_sign)
            if u.c[0]:
                raise PreconditionError(f"pullback {self.pullback!r} does not vanish at 0")
            return hypergeometric(self.upper, self.lower, N).compose(u)
        if self.kind == "expr":
            return eval_series(self.text, N, sqrt_sign)
        if self.kind == "heun":
            return heun_series(HeunSpec(*self.params), N)
        if self.kind == "binsum":
            return BinSumExpr.parse(self.text, self.indices).series(N)
        raise ValueError(f"unknown side kind {self.kind!r}")

    @classmethod
    def from_json(cls, d: dict) -> "Side":
        d = dict(d)
        for key in ("upper", "lower", "params"):
            if key in d:
                d[key] = tuple(Fraction(a) for a in d[key])
        if "indices" in d:
            d["indices"] = tuple(d["indices"])
        return cls(**d)


@dataclass(frozen=True)
class PullbackIdentity:
    """Sides that must expand to the same series, plus an optional reference target."""

    tag: str
    sides: tuple
    target: tuple = ()
    note: str = ""

    @classmethod
    def from_json(cls, d: dict) -> "PullbackIdentity":
        return cls(d["tag"], tuple(Side.from_json(s) for s in d["sides"]),
                   tuple(Fraction(c) for c in d.get("target", ())), d.get("note", ""))


@dataclass(frozen=True)
class CurvePoly:
    """A nonzero polynomial C(u, v) and pairs of series (u(x), v(x)) on it."""

    tag: str
    poly: MultiPoly
    pairs: tuple
    note: str = ""

    def __post_init__(self):
        if self.poly.is_zero():
            raise ValueError("curve polynomial must be nonzero")
        if len(self.poly.vars) != 2:
            raise ValueError("curve polynomial needs exactly two variables")

    @classmethod
    def from_json(cls, d: dict) -> "CurvePoly":
        names = tuple(d.get("vars", ("u", "v")))
        pairs = tuple((u, v) for u, v in d["pairs"])
        return cls(d["tag"], parse_poly(d["poly"], names), pairs, d.get("note", ""))


def verify_pullback_identity(ident: PullbackIdentity, N: int, sqrt_sign: int = 1) -> bool:
    """All sides agree through x^N (and N + RECHECK), and match the target prefix."""
    for order in (N, N + RECHECK):
        series = [s.series(order, sqrt_sign) for s in ident.sides]
        if any(not series[0].agrees(s, order) for s in series[1:]):
            return False
    if ident.target and sqrt_sign == 1:
        k = min(len(ident.target) - 1, N)
        if list(series[0].c[: k + 1]) != list(ident.target[: k + 1]):
            return False
    return True


def substitute_curve(C: MultiPoly, u: UniSeries, v: UniSeries) -> UniSeries:
    """C(u(x), v(x)) through min(order)."""
    N = min(u.order, v.order)
    du, dv = C.degree(C.vars[0]), C.degree(C.vars[1])
    pu = [UniSeries.one(N)]
    for _ in range(du):
        pu.append(pu[-1] * u)
    pv = [UniSeries.one(N)]
    for _ in range(dv):
        pv.append(pv[-1] * v)
    total = UniSeries.zero(N)
    for (i, j), c in C.terms.items():
        total = total + (pu[i] * pv[j]) * c
    return total


def verify_modular_curve(u: UniSeries, v: UniSeries, C: MultiPoly, N: int) -> bool:
    if u.c[0] or v.c[0]:
        raise PreconditionError("both series must vanish at 0")
    return substitute_curve(C, u.truncate(N), v.truncate(N)).is_zero()


def verify_curve_entry(entry: CurvePoly, N: int) -> bool:
    for order in (N, N + RECHECK):
        for u_text, v_text in entry.pairs:
            u, v = eval_series(u_text, order), eval_series(v_text, order)
            if not verify_modular_curve(u, v, entry.poly, order):
                return False
    return True


# ---------------------------------------------------------------------------
# tau -> 11 tau


P11_LEAD = "(1+228*x+486*x^2-540*x^3+225*x^4)^3"
P11_Q1 = ("1-55*x+1188*x^2-12716*x^3+69630*x^4-177408*x^5+133056*x^6"
          "+132066*x^7-187407*x^8+40095*x^9+24300*x^10-6750*x^11")
P11_A = ("(7321-87612*x+73206*x^2+21060*x^3-23175*x^4)"
         "/(1+228*x+486*x^2-540*x^3+225*x^4)")
H1_SERIES = (1, 60, -4560, 614400, -95660400, 16231863060, -2905028387700)
H2_SERIES = {0: 1, 11: 60, 12: 3300, 13: 110220, 14: 2904660, 15: 66599940,
             16: 1394683620, 17: 27425371380}


@dataclass(frozen=True)
class ModularPolynomial:
    """P*_11(x, H) = lead(x) H^2 - 1728 Q1(x) x H + 1728^2 x^12."""

    lead: str = P11_LEAD
    q1: str = P11_Q1

    def roots(self, N: int) -> tuple:
        """(H1, H2) with H1 = O(x) and H2 = O(x^11), through x^N."""
        work = N + 12
        a = eval_series(self.lead, work)
        S = eval_series(f"1728*x*({self.q1})", work) * a.inv()     # H1 + H2
        P = eval_series("1728^2*x^12", work) * a.inv()             # H1 * H2
        H2 = UniSeries.zero(work)
        for _ in range(work // 10 + 3):
            H1 = S - H2
            if H1.valuation() != 1:
                raise PreconditionError("root separation failed: H1 is not O(x)")
            new = P.shift(-1) * H1.shift(-1).inv()
            done = new.agrees(H2, N)
            H2 = new
            if done:
                break
        else:
            raise PreconditionError("root separation did not converge")
        H1 = S.truncate(H2.order) - H2
        if H2.valuation() != 11:
            raise PreconditionError("root separation failed: H2 is not O(x^11)")
        return H1.truncate(N), H2.truncate(N)

    def evaluate(self, H: UniSeries) -> UniSeries:
        N = H.order
        a = eval_series(self.lead, N)
        b = eval_series(f"1728*x*({self.q1})", N)
        c = eval_series("1728^2*x^12", N)
        return a * H * H - b * H + c


def algebraic_A(N: int) -> UniSeries:
    """A(x) with A(0) = 1 from A^4/11^2 + 11^2/A^4 = 2 R(x)/11^2.

    With B = A^4: B^2 - 2 R B + 11^4 = 0, and B(0) = 1 picks the minus sign.
    """
    R = eval_series(P11_A, N)
    B = R - (R * R - 11**4).sqrt()
    if B.c[0] != 1:
        raise PreconditionError("branch with A(0) = 1 not found")
    return B.power(Fraction(1, 4))


def verify_modular_polynomial_11(N: int) -> bool:
    """Roots, Vieta, the defining identity, and both reference expansions."""
    mp = ModularPolynomial()
    for order in (N, N + RECHECK):
        H1, H2 = mp.roots(order)
        if not (mp.evaluate(H1).is_zero() and mp.evaluate(H2).is_zero()):
            return False
        vieta = H1 * H2 * eval_series(mp.lead, order)
        if not vieta.agrees(eval_series("1728^2*x^12", order), order):
            return False
        F = hypergeometric((Fraction(1, 12), Fraction(5, 12)), (1,), order)
        F1, F2 = F.compose(H1), F.compose(H2)
        if not F1.agrees(algebraic_A(order) * F2, order):
            return False
        k = min(order, len(H1_SERIES) - 1)
        if list(F1.c[: k + 1]) != list(H1_SERIES[: k + 1]):
            return False
        for m in range(min(order, max(H2_SERIES)) + 1):
            if F2.c[m] != H2_SERIES.get(m, 0):
                return False
    return True


# ---------------------------------------------------------------------------
# catalog


def load_catalog() -> dict:
    """{"identities": [...], "curves": [...]} from the shipped JSON file."""
    text = resources.files("diagmod").joinpath("data/identities.json").read_text()
    raw = json.loads(text)
    return {
        "identities": [PullbackIdentity.from_json(d) for d in raw["identities"]],
        "curves": [CurvePoly.from_json(d) for d in raw["curves"]],
        "conjugates": raw.get("conjugates", []),
    }


@dataclass
class CatalogResult:
    tag: str
    kind: str
    ok: bool
    detail: str = ""


def verify_catalog(N: int = 20, tags: Sequence[str] | None = None) -> list:
    cat = load_catalog()
    out = []
    for ident in cat["identities"]:
        if tags and ident.tag not in tags:
            continue
        try:
            out.append(CatalogResult(ident.tag, "identity", verify_pullback_identity(ident, N)))
        except PreconditionError as exc:
            out.append(CatalogResult(ident.tag, "identity", False, str(exc)))
    for curve in cat["curves"]:
        if tags and curve.tag not in tags:
            continue
        try:
            out.append(CatalogResult(curve.tag, "curve", verify_curve_entry(curve, N)))
        except PreconditionError as exc:
            out.append(CatalogResult(curve.tag, "curve", False, str(exc)))
    if not tags or "P11" in tags:
        out.append(CatalogResult("P11", "modular-polynomial", verify_modular_polynomial_11(max(N, 17))))
    return out
