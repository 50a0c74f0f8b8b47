"""Series modulo primes: algebraic relations, functional equations, operators.

A series with integer coefficients that is the diagonal of a rational function
is algebraic over F_p(x) for every prime p.  The relations here are checked
(or found) coefficient by coefficient through an explicit order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arith import MultiPoly, is_prime
from .dfinite import DiffOp
from .linalg import rref_mod_p
from .series import PreconditionError, UniSeries


@dataclass(frozen=True)
class AlgRelation:
    """P(x, y) over F_p, meant to vanish at y = f(x)."""

    poly: MultiPoly

    def __post_init__(self):
        if self.poly.p is None or self.poly.vars != ("x", "y"):
            raise ValueError("relations live in F_p[x, y]")
        if self.poly.is_zero():
            raise ValueError("the zero relation is not allowed")

    @property
    def p(self) -> int:
        return self.poly.p

    @property
    def degrees(self) -> tuple:
        return self.poly.degree("x"), self.poly.degree("y")

    def normalized(self) -> "AlgRelation":
        """Scale so that the lexicographically first coefficient is 1."""
        e0 = min(self.poly.terms)
        inv = pow(int(self.poly.terms[e0]), -1, self.p)
        return AlgRelation(self.poly * MultiPoly.const(("x", "y"), inv, self.p))

    def y_coeffs(self) -> list:
        """Coefficient polynomials a_j(x) (dense lists) of y^j."""
        dx, dy = self.degrees
        out = [[0] * (dx + 1) for _ in range(dy + 1)]
        for (i, j), c in self.poly.terms.items():
            out[j][i] = int(c)
        return out

    def evaluate(self, f: UniSeries) -> UniSeries:
        """P(x, f) truncated at f's order."""
        if f.p != self.p:
            raise ValueError(f"series over {f.p}, relation over {self.p}")
        total = UniSeries.zero(f.order, self.p, f.var)
        power = UniSeries.one(f.order, self.p, f.var)
        for j, a in enumerate(self.y_coeffs()):
            if j:
                power = power * f
            if any(a):
                total = total + UniSeries.from_poly(a, f.order, self.p, f.var) * power
        return total

    def to_json(self) -> dict:
        return self.poly.to_json()

    @classmethod
    def from_json(cls, data) -> "AlgRelation":
        return cls(MultiPoly.from_json(data))

    def __str__(self):
        return str(self.poly)


def reduce_mod_p(f: UniSeries, p: int) -> UniSeries:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return f.reduce_mod_p(p)


def verify_relation(R: AlgRelation, f: UniSeries, N: int | None = None) -> bool:
    """P(x, f) = 0 through x^N."""
    N = f.order if N is None else N
    if N > f.order:
        raise PreconditionError(f"series known through {f.order}, asked for {N}")
    return R.evaluate(f.truncate(N)).is_zero()


def find_relation(f: UniSeries, dx: int, dy: int, guard: float = 0.25) -> AlgRelation | None:
    """Smallest relation sum c_ij x^i f^j = 0 with i <= dx, 1 <= j <= dy (if any).

    The system uses 25% more coefficient equations than unknowns and the
    answer is re-verified through twice that many coefficients.  Among kernel
    vectors the one whose leading monomial (y-degree, then x-degree) is
    smallest is returned.
    """
    p = f.p
    if p is None:
        raise ValueError("find_relation works over F_p")
    cols = [(i, j) for j in range(dy + 1) for i in range(dx + 1)]
    rows = int(np.ceil(len(cols) * (1 + guard)))
    if f.order + 1 < 2 * rows:
        raise PreconditionError(
            f"need {2 * rows} coefficients for degrees ({dx}, {dy}), have {f.order + 1}")
    n = rows - 1
    g = f.truncate(n)
    powers = [UniSeries.one(n, p, f.var)]
    for _ in range(dy):
        powers.append(powers[-1] * g)
    M = np.zeros((rows, len(cols)), dtype=np.int64)
    for c, (i, j) in enumerate(cols):
        col = powers[j].c
        for r in range(i, rows):
            M[r, c] = int(col[r - i])
    R, piv = rref_mod_p(M, p)
    free = [c for c in range(len(cols)) if c not in set(piv)]
    if not free:
        return None
    # kernel vector of the first free column only involves lower columns
    f0 = free[0]
    vec = {cols[f0]: 1}
    for r, c in enumerate(piv):
        if c < f0 and R[r, f0]:
            vec[cols[c]] = int(-R[r, f0] % p)
    rel = AlgRelation(MultiPoly(("x", "y"), vec, p)).normalized()
    if not verify_relation(rel, f, min(f.order, 2 * rows)):
        return None
    return rel


def verify_functional_equation_mod2(f: UniSeries, head: Sequence[int] = (1,), shift: int = 8,
                                    N: int | None = None) -> bool:
    """f(w) = head(w) + w^shift f(w^2) over F_2, through w^N.

    The defaults give 1 + w^8 F(w^2); ``head=(0, 1), shift=0`` gives
    G(z) = z + G(z^2).
    """
    if f.p != 2:
        raise ValueError("series must be over F_2")
    N = f.order if N is None else N
    rhs = [0] * (N + 1)
    for k, c in enumerate(head):
        if k <= N:
            rhs[k] ^= c % 2
    for k in range(N + 1):
        src = k - shift
        if src >= 0 and src % 2 == 0:
            rhs[k] ^= int(f.c[src // 2])
    return [int(c) for c in f.c[: N + 1]] == rhs


def root_mod_p(R: AlgRelation, N: int, start: Sequence[int], max_steps: int = 64) -> UniSeries:
    """The root of R near the polynomial ``start``, through x^N, by Newton steps.

    P_y at the root may vanish to some order v; the step divides by x^v,
    so ``start`` must already be right past order 2v.  The result is
    checked against R before it is returned.
    """
    p = R.p
    dP = R.poly.diff("y")
    if dP.is_zero():
        raise PreconditionError("relation has zero y-derivative")
    Ry = AlgRelation(dP)
    v = Ry.evaluate(UniSeries(list(start), len(start) - 1, p)).valuation()
    if v is None:
        raise PreconditionError("derivative vanishes at the start series")
    work = N + v
    y = UniSeries(list(start)[: work + 1], work, p)
    for _ in range(max_steps):
        val = R.evaluate(y)
        der = Ry.evaluate(y)
        lv = val.valuation()
        if lv is not None and lv < v:
            raise PreconditionError("start series too far from a root")
        if lv is None or lv > work:
            break
        q = UniSeries(val.c[v:], work - v, p) * UniSeries(der.c[v:], work - v, p).inv()
        new = y - UniSeries(list(q.c) + [0] * v, work, p)
        if new == y:
            break
        y = new
    y = y.truncate(N)
    if not verify_relation(R, y):
        raise PreconditionError("Newton iteration did not reach a root")
    return y


def verify_operator_mod_p(L: DiffOp, f: UniSeries, p: int, N: int | None = None) -> bool:
    """L f = 0 modulo p through x^N (N defaults to everything L f determines)."""
    Lp = L if L.p == p else L.reduce_mod_p(p)
    fp = f if f.p == p else f.reduce_mod_p(p)
    out = Lp.apply(fp)
    N = out.order if N is None else N
    if N > out.order:
        raise PreconditionError(f"L f is only known through {out.order}")
    return all(c == 0 for c in out.c[: N + 1])
