"""Diagonals of rational functions and rational functions for binomial sums.

The diagonal of F(z_0, .., z_k) = sum F_e z^e is sum_m F_(m,..,m) x^m.  When
the denominator is given as a product of factors, the expansion proceeds one
factor at a time: as soon as a variable no longer occurs in the remaining
factors its exponent is final, so it must equal the common diagonal index m.
Every other exponent may then never exceed m.  This keeps the working set small
even for eight-variable representations.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Sequence

import numpy as np

from .arith import MultiPoly, is_prime, ring_coerce
from .series import PreconditionError, UniSeries


@dataclass(frozen=True)
class RationalFunctionRep:
    """num/den over Q with den(0) != 0; ``factors`` optionally factor den."""

    num: MultiPoly
    den: MultiPoly
    factors: tuple = field(default=())

    def __post_init__(self):
        if self.num.vars != self.den.vars:
            raise ValueError("numerator and denominator use different variables")
        if not self.den.constant_term():
            raise PreconditionError("denominator vanishes at the origin")
        if self.factors:
            total = MultiPoly.const(self.den.vars, 1)
            for f in self.factors:
                total = total * f
            if total != self.den:
                raise ValueError("factors do not multiply to the denominator")

    @classmethod
    def from_factors(cls, num: MultiPoly, factors: Sequence[MultiPoly]) -> "RationalFunctionRep":
        den = MultiPoly.const(num.vars, 1)
        for f in factors:
            den = den * f
        return cls(num, den, tuple(factors))

    @property
    def variables(self) -> tuple:
        return self.num.vars

    def to_json(self) -> dict:
        out = {"vars": list(self.variables), "num": self.num.to_json(), "den": self.den.to_json()}
        if self.factors:
            out["factors"] = [f.to_json() for f in self.factors]
        return out

    @classmethod
    def from_json(cls, data) -> "RationalFunctionRep":
        num = MultiPoly.from_json(data["num"])
        if data.get("factors"):
            return cls.from_factors(num, [MultiPoly.from_json(f) for f in data["factors"]])
        return cls(num, MultiPoly.from_json(data["den"]))

    def __str__(self):
        den = "*".join(f"({f})" for f in self.factors) if self.factors else f"({self.den})"
        return f"({self.num})/{den}"


def _support(poly: MultiPoly) -> list:
    return sorted({i for e in poly.terms for i, a in enumerate(e) if a})


class _Dense:
    """Coefficients in the box [0, N]^r (object dtype, or int64 mod p)."""

    def __init__(self, N: int, p: int | None):
        self.N, self.p = N, p

    def zeros(self, ndim: int):
        shape = (self.N + 1,) * ndim
        return np.zeros(shape, dtype=np.int64) if self.p else np.full(shape, 0, dtype=object)

    def coef(self, c):
        if self.p is None:
            return c if not isinstance(c, Fraction) or c.denominator != 1 else int(c)
        return int(ring_coerce(c, self.p))

    def mul_sparse(self, terms: dict, X):
        """(sum c z^e) * X, the exponents e indexing X's leading axes."""
        N = self.N
        out = np.zeros_like(X)
        for e, c in terms.items():
            if any(a > N for a in e):
                continue
            dst = tuple(slice(a, None) for a in e)
            src = tuple(slice(0, N + 1 - a) for a in e)
            out[dst] += self.coef(c) * X[src]
        return out if self.p is None else out % self.p

    def divide(self, X, terms: dict):
        """X / Q where Q's exponents index X's leading axes; Q(0) != 0."""
        q = len(next(iter(terms)))
        zero = (0,) * q
        c0 = terms[zero]
        if all(e == zero for e in terms):
            if self.p is not None:
                return X * pow(int(ring_coerce(c0, self.p)), -1, self.p) % self.p
            if c0 in (1, -1):
                return X * int(c0)
            return X * (Fraction(1) / c0)
        # peel the first axis: T_j = (X_j - sum_{t>=1} Q_t T_{j-t}) / Q_0
        split: dict = {}
        for e, c in terms.items():
            split.setdefault(e[0], {})[e[1:]] = c
        base = split.pop(0)
        out = np.zeros_like(X)
        for j in range(self.N + 1):
            acc = X[j, ...].copy()
            for t, part in split.items():
                if t <= j:
                    acc = acc - self.mul_sparse(part, out[j - t, ...])
            if self.p is not None:
                acc %= self.p
            out[j] = self.divide(acc, base)
        return out


def diagonal(R: RationalFunctionRep, N: int, p: int | None = None) -> UniSeries:
    """First N+1 diagonal coefficients, exact over Q or modulo a prime p.

    The state is a dense array over the variables still in play plus the
    diagonal index m.  Each piece (the numerator, then each denominator factor)
    is applied by sparse multiplication or by slice-wise division; a variable
    whose last piece has been applied is merged into m.
    """
    if p is not None and not is_prime(p):
        raise ValueError(f"{p} is not prime")
    k = len(R.variables)
    dense = _Dense(N, p)
    pieces = [(R.num, False)] + [(f, True) for f in (R.factors or (R.den,))]
    pieces = [pc for pc in pieces if not (pc[0].degree() == 0 and not pc[1] and pc[0].constant_term() == 1)]
    # greedy order: keep the number of live variables small
    order, live = [], set()
    todo = list(range(len(pieces)))
    while todo:
        def cost(i):
            s = set(_support(pieces[i][0]))
            rest = set().union(*(_support(pieces[j][0]) for j in todo if j != i)) if len(todo) > 1 else set()
            return (len((live | s) & rest) + len(live | s), i)
        best = min(todo, key=cost)
        order.append(best)
        live |= set(_support(pieces[best][0]))
        todo.remove(best)
    pieces = [pieces[i] for i in order]

    axes: list = []            # variable index per axis; "m" for the diagonal index
    dtype = np.int64 if p else object
    state = np.array(1, dtype=dtype)
    touched: set = set()
    for step, (poly, inv) in enumerate(pieces):
        sup = _support(poly)
        for v in sup:
            if v not in axes:
                pad = [(0, 0)] * state.ndim + [(0, N)]
                state = np.pad(state[..., None], pad, constant_values=0)
                axes.append(v)
        touched.update(sup)
        # bring the piece's variables to the front
        perm = [axes.index(v) for v in sup] + [i for i, a in enumerate(axes) if a not in sup]
        state = np.transpose(state, perm)
        axes = [axes[i] for i in perm]
        terms = {tuple(e[v] for v in sup): c for e, c in poly.terms.items()}
        if not sup:
            c = next(iter(terms.values()))
            state = dense.divide(state[None], {(0,): c})[0] if inv else state * dense.coef(c)
            # scalar arithmetic on a 0-d array returns a bare number
            state = np.asarray(state, dtype=dtype)
            if p is not None:
                state %= p
        elif inv:
            state = dense.divide(state, terms)
        else:
            state = dense.mul_sparse(terms, state)
        later = set().union(*(_support(q) for q, _ in pieces[step + 1:])) if step + 1 < len(pieces) else set()
        for v in [a for a in axes if a != "m" and a not in later]:
            i = axes.index(v)
            if "m" not in axes:
                axes[i] = "m"
                continue
            j = axes.index("m")
            state = np.diagonal(state, axis1=i, axis2=j).copy()
            axes = [a for a in axes if a not in (v, "m")] + ["m"]
    out = [0] * (N + 1)
    if "m" not in axes:
        out[0] = state[(0,) * state.ndim]
    else:
        for m in range(N + 1):
            if len(touched) == k or m == 0:
                out[m] = state[m]
    if p is not None:
        return UniSeries([int(c) % p for c in out], N, p)
    return UniSeries([Fraction(c) for c in out], N)


def verify_representation(R: RationalFunctionRep, target: UniSeries, N: int) -> bool:
    return diagonal(R, N).agrees(target, N)


# ---------------------------------------------------------------------------
# algebraic series as diagonals


def furstenberg_embed(P: MultiPoly) -> RationalFunctionRep:
    """y^2 P_y(xy, y) / P(xy, y) with the common factor y cancelled.

    Its diagonal is the power-series root f of P(x, f) = 0 with f(0) = 0.
    """
    if P.vars != ("x", "y"):
        raise ValueError("expected a polynomial in (x, y)")
    if P.constant_term():
        raise PreconditionError("P(0,0) must vanish")
    Py = P.diff("y")
    if not Py.constant_term():
        raise PreconditionError(
            "P_y(0,0) = 0: the embedding formula does not apply to a singular root")

    def sub(Q: MultiPoly, extra_y: int) -> MultiPoly:
        return MultiPoly(("x", "y"), {(a, a + b + extra_y): c for (a, b), c in Q.terms.items()})

    num = sub(Py, 1)            # y^2 P_y(xy,y) / y
    den = sub(P, -1)            # P(xy,y) / y, every term has a+b >= 1
    return RationalFunctionRep(num, den)


# ---------------------------------------------------------------------------
# nested binomial sums


@dataclass(frozen=True)
class Binom:
    """binom(top, bottom)^power with linear forms over (n, k_1, .., k_d, 1)."""

    top: tuple
    bottom: tuple
    power: int = 1


@dataclass(frozen=True)
class BinSumExpr:
    """sum_{k_1=0..n} sum_{k_2=0..k_1} ... prod binom(..)^power, coefficient of x^n."""

    indices: tuple       # names of the inner indices, outermost first
    factors: tuple       # Binom items

    @property
    def depth(self) -> int:
        return len(self.indices)

    def _value(self, f: Binom, point) -> int:
        a = sum(c * v for c, v in zip(f.top, point))
        b = sum(c * v for c, v in zip(f.bottom, point))
        if a < 0:
            raise PreconditionError(f"negative top in {f}")
        return comb(a, b) ** f.power if 0 <= b <= a else 0

    def coefficient(self, n: int) -> int:
        total = 0

        def rec(prefix, bound):
            nonlocal total
            if len(prefix) == self.depth + 1:
                point = prefix + [1]
                total += prod(self._value(f, point) for f in self.factors)
                return
            for k in range(bound + 1):
                rec(prefix + [k], k)

        rec([n], n)
        return total

    def series(self, N: int) -> UniSeries:
        return UniSeries([self.coefficient(n) for n in range(N + 1)], N)

    @classmethod
    def parse(cls, text: str, indices: Sequence[str] = ("k",)) -> "BinSumExpr":
        """Parse e.g. ``binom(n,k)^2*binom(n+k,k)^2`` (outer index n)."""
        names = ("n",) + tuple(indices)
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval").body
        except SyntaxError as exc:
            raise PreconditionError(f"cannot parse binomial sum {text!r}: {exc.msg}") from None
        factors = []

        def linear(node) -> tuple:
            coeffs = [0] * (len(names) + 1)

            def walk(nd, sign):
                if isinstance(nd, ast.BinOp) and isinstance(nd.op, (ast.Add, ast.Sub)):
                    walk(nd.left, sign)
                    walk(nd.right, sign if isinstance(nd.op, ast.Add) else -sign)
                elif isinstance(nd, ast.UnaryOp) and isinstance(nd.op, ast.USub):
                    walk(nd.operand, -sign)
                elif isinstance(nd, ast.Name) and nd.id in names:
                    coeffs[names.index(nd.id)] += sign
                elif isinstance(nd, ast.Constant) and isinstance(nd.value, int):
                    coeffs[-1] += sign * nd.value
                elif (isinstance(nd, ast.BinOp) and isinstance(nd.op, ast.Mult)
                      and isinstance(nd.left, ast.Constant) and isinstance(nd.right, ast.Name)
                      and nd.right.id in names):
                    coeffs[names.index(nd.right.id)] += sign * nd.left.value
                else:
                    raise PreconditionError(f"not a linear form: {ast.unparse(nd)}")

            walk(node, 1)
            return tuple(coeffs)

        def factor(node, power=1):
            if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
                factor(node.left, power)
                factor(node.right, power)
            elif isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                        and node.right.value > 0):
                    raise PreconditionError("powers must be positive integers")
                factor(node.left, power * node.right.value)
            elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                  and node.func.id == "binom" and len(node.args) == 2):
                factors.append(Binom(linear(node.args[0]), linear(node.args[1]), power))
            else:
                raise PreconditionError(f"unsupported factor: {ast.unparse(node)}")

        factor(tree)
        return cls(tuple(indices), tuple(factors))


def binsum_to_ratfun(e: BinSumExpr) -> RationalFunctionRep:
    """A rational function whose diagonal is sum_n (coefficient) x^n.

    Each binom(a, b) becomes the constant term of (1+z)^a z^(-b) in a fresh
    variable.  Writing the summand as A_0^n A_1^k1 ... times a constant part,
    the nested sums over n >= k_1 >= ... >= k_d >= 0 give
    prod_i 1/(1 - A_0 ... A_i), and the constant term in the z's becomes a
    diagonal after x -> z_0 z_1 ... z_r.
    """
    d = e.depth
    # one residue variable per binomial occurrence
    occ = []
    for f in e.factors:
        occ.extend([f] * f.power)
    r = len(occ)
    names = tuple(f"z{i}" for i in range(r + 1))
    one = MultiPoly.const(names, 1)

    def z(i):
        return MultiPoly.var(names, names[i])

    # for index slot s (0 = n, .., d, d+1 = constant): (1+z_i)^alpha z_i^-beta
    alpha = [[f.top[s] for f in occ] for s in range(d + 2)]
    beta = [[f.bottom[s] for f in occ] for s in range(d + 2)]
    for f in occ:
        rays = [sum(f.top[:t + 1]) for t in range(d + 1)]
        if f.top[-1] < 0 or min(rays) < 0:
            raise PreconditionError(f"top of binom{f.top, f.bottom} can be negative")
    if any(b > 0 for b in beta[-1]):
        raise PreconditionError(f"constant part of a bottom is positive: {beta[-1]}")

    num = one
    for i in range(r):
        a0, b0 = alpha[-1][i], -beta[-1][i]
        num = num * (1 + z(i + 1)) ** a0 * z(i + 1) ** b0
    factors = []
    cum_alpha = [0] * r
    cum_beta = [0] * r
    for s in range(d + 1):
        cum_alpha = [c + a for c, a in zip(cum_alpha, alpha[s])]
        cum_beta = [c + b for c, b in zip(cum_beta, beta[s])]
        # A_0 .. A_s with x -> z_0 z_1 .. z_r
        mono = [1] + [1 - b for b in cum_beta]
        if min(mono) < 0:
            raise PreconditionError(
                f"bottom forms decrease too fast for a polynomial denominator: {cum_beta}")
        M = one
        for i, ex in enumerate(mono):
            M = M * z(i) ** ex
        pos, neg = one, one
        for i, a in enumerate(cum_alpha):
            if a >= 0:
                pos = pos * (1 + z(i + 1)) ** a
            else:
                neg = neg * (1 + z(i + 1)) ** (-a)
        # 1/(1 - M pos/neg) = neg / (neg - M pos)
        num = num * neg
        factors.append(neg - M * pos)
    return RationalFunctionRep.from_factors(num, factors)
