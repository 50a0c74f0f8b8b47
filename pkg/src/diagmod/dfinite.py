"""Linear differential operators with polynomial coefficients.

Operators are stored in D_x-form, L = sum_k a_k(x) D^k, with each a_k a dense
coefficient list.  The theta-form L = x^(-s) sum_k b_k(x) theta^k (theta = x D)
is derived on demand and is what series generation, Frobenius bases and
guessing work with, because theta keeps power series closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .arith import HypergeomCoeffSpec, MultiPoly, as_rat, rat_str, ring_coerce, ring_inv
from .linalg import WORD_PRIMES, nullspace_mod_p, nullspace_qq, rank_qq
from .series import PreconditionError, UniSeries


# ---------------------------------------------------------------------------
# dense univariate polynomials (lists of coefficients, lowest degree first)


def ptrim(a: list) -> list:
    a = list(a)
    while a and not a[-1]:
        a.pop()
    return a


def _z(p):
    return Fraction(0) if p is None else 0


def padd(a, b, p=None):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        v = (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
        out.append(v % p if p is not None else v)
    return ptrim(out)


def pscale(a, c, p=None):
    if p is None:
        return ptrim([c * v for v in a])
    return ptrim([c * v % p for v in a])


def pmul(a, b, p=None):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                if v:
                    out[i + j] += u * v
    if p is not None:
        out = [v % p for v in out]
    return ptrim(out)


def pderiv(a, p=None):
    out = [i * a[i] for i in range(1, len(a))]
    if p is not None:
        out = [v % p for v in out]
    return ptrim(out)


def pshift(a, k):
    """Multiply by x^k (k >= 0) or divide exactly by x^(-k)."""
    if not a:
        return []
    if k >= 0:
        return [0] * k + list(a)
    if any(a[: -k]):
        raise ValueError("polynomial not divisible by the requested power of x")
    return list(a[-k:])


def pval(a) -> int:
    for i, v in enumerate(a):
        if v:
            return i
    return 10**9


def peval(a, x):
    out = 0
    for v in reversed(a):
        out = out * x + v
    return out


def stirling2(k: int, i: int) -> int:
    return sum((-1) ** (i - j) * math.comb(i, j) * j**k for j in range(i + 1)) // math.factorial(i)


def _falling_coeffs(k: int) -> list:
    """Coefficients of theta(theta-1)...(theta-k+1) as a polynomial in theta."""
    poly = [1]
    for j in range(k):
        poly = pmul(poly, [-j, 1])
    return poly if poly else [0]


def _poly_in_theta_at(P: list, m, r: int) -> list:
    """Taylor coefficients of P(m + eps) in eps, truncated to length r."""
    # Horner with eps-series
    out = [Fraction(0)] * r
    for c in reversed(P):
        # out = out * (m + eps) + c
        new = [Fraction(0)] * r
        for i in range(r):
            new[i] += out[i] * m
            if i + 1 < r:
                new[i + 1] += out[i]
        new[0] += c
        out = new
    return out


# ---------------------------------------------------------------------------


class DiffOp:
    """sum_k a_k(x) D_x^k over Q (p None) or F_p."""

    __slots__ = ("a", "p", "__dict__")

    def __init__(self, coeffs: Sequence[Sequence], p: int | None = None):
        a = [ptrim([ring_coerce(c, p) for c in poly]) for poly in coeffs]
        while a and not a[-1]:
            a.pop()
        if not a:
            raise ValueError("the zero operator is not allowed")
        self.a = tuple(tuple(x) for x in a)
        self.p = p

    # constructors ------------------------------------------------------------
    @classmethod
    def from_theta(cls, b: Sequence[Sequence], p: int | None = None, shift: int = 0):
        """x^(-shift) * sum_k b_k(x) theta^k, converted to D-form."""
        r = len(b) - 1
        a = [[] for _ in range(r + 1)]
        for k, bk in enumerate(b):
            bk = [ring_coerce(c, p) for c in bk]
            for i in range(1, k + 1) if k else [0]:
                s = stirling2(k, i) if k else 1
                if s:
                    a[i] = padd(a[i], pshift(pscale(bk, s, p), i), p)
        if shift:
            a = [pshift(ai, -shift) if ai else [] for ai in a]
        return cls(a, p)

    @classmethod
    def from_theta_polys(cls, parts: Sequence[Sequence], p: int | None = None):
        """sum_j x^j P_j(theta), with P_j given by coefficient lists in theta."""
        r = max(len(P) for P in parts) - 1
        b = [[0] * len(parts) for _ in range(r + 1)]
        for j, P in enumerate(parts):
            for k, c in enumerate(P):
                b[k][j] = c
        return cls.from_theta(b, p)

    # structure -----------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.a) - 1

    def coeff(self, k: int) -> list:
        return list(self.a[k]) if k < len(self.a) else []

    def coeff_poly(self, k: int, var: str = "x") -> MultiPoly:
        return MultiPoly.from_univariate(self.coeff(k), var, self.p)

    def degree(self) -> int:
        return max(len(ak) - 1 for ak in self.a)

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.p == other.p and self.a == other.a

    def __hash__(self):
        return hash((self.a, self.p))

    @cached_property
    def theta_form(self):
        """(s, b) with L = x^(-s) sum_k b_k(x) theta^k and s >= 0 minimal."""
        p = self.p
        r = self.order
        s = max(0, max(k - pval(ak) for k, ak in enumerate(self.a) if ak))
        b = [[] for _ in range(r + 1)]
        for k, ak in enumerate(self.a):
            if not ak:
                continue
            shifted = pshift(list(ak), s - k)
            fall = _falling_coeffs(k)
            for i, f in enumerate(fall):
                if f:
                    b[i] = padd(b[i], pscale(shifted, f, p), p)
        return s, [tuple(bi) for bi in b]

    def theta_parts(self):
        """(s, [P_0, P_1, ...]) with x^s L = sum_j x^j P_j(theta), P_0 != 0."""
        s, b = self.theta_form
        d = max(len(bk) for bk in b)
        parts = [ptrim([bk[j] if j < len(bk) else 0 for bk in b]) for j in range(d)]
        low = next(j for j, P in enumerate(parts) if P)
        return s - low, parts[low:]

    def indicial(self) -> list:
        """Indicial polynomial at x = 0 (coefficients in theta)."""
        return self.theta_parts()[1][0]

    # algebra ---------------------------------------------------------------------
    def _compat(self, other):
        if other.p != self.p:
            raise ValueError("operators over different rings")

    def __add__(self, other):
        self._compat(other)
        n = max(len(self.a), len(other.a))
        return DiffOp([padd(self.coeff(k), other.coeff(k), self.p) for k in range(n)], self.p)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        c = ring_coerce(c, self.p)
        return DiffOp([pscale(list(ak), c, self.p) for ak in self.a], self.p)

    def left_mul_poly(self, poly: Sequence) -> "DiffOp":
        poly = [ring_coerce(c, self.p) for c in poly]
        return DiffOp([pmul(poly, list(ak), self.p) for ak in self.a], self.p)

    def __mul__(self, other: "DiffOp") -> "DiffOp":
        """Composition self o other."""
        if not isinstance(other, DiffOp):
            return self.scale(other)
        self._compat(other)
        p = self.p
        out = [[] for _ in range(self.order + other.order + 1)]
        for i, ai in enumerate(self.a):
            if not ai:
                continue
            for j, bj in enumerate(other.a):
                deriv = list(bj)
                for l in range(i + 1):
                    if not deriv:
                        break
                    c = math.comb(i, l)
                    term = pmul(list(ai), pscale(deriv, c, p), p)
                    out[i - l + j] = padd(out[i - l + j], term, p)
                    deriv = pderiv(deriv, p)
        return DiffOp(out, p)

    def adjoint(self) -> "DiffOp":
        """sum_k (-D)^k o a_k."""
        p = self.p
        out = [[] for _ in range(self.order + 1)]
        for k, ak in enumerate(self.a):
            deriv = list(ak)
            for l in range(k + 1):
                if not deriv:
                    break
                c = (-1) ** k * math.comb(k, l)
                out[k - l] = padd(out[k - l], pscale(deriv, c, p), p)
                deriv = pderiv(deriv, p)
        return DiffOp(out, p)

    def conjugate_by_power(self, rho: int) -> "DiffOp":
        """x^(-rho) o L o x^rho, i.e. theta -> theta + rho."""
        s, parts = self.theta_parts()
        new_parts = [_shift_theta(P, rho, self.p) for P in parts]
        op = DiffOp.from_theta_polys(new_parts, self.p)
        return op

    def normalized(self) -> "DiffOp":
        """Integer coefficients with content 1 and a positive top coefficient."""
        if self.p is not None:
            lead = self.a[-1][-1]
            return self.scale(ring_inv(lead, self.p))
        den = 1
        for ak in self.a:
            for c in ak:
                den = math.lcm(den, Fraction(c).denominator)
        ints = [[int(c * den) for c in ak] for ak in self.a]
        g = 0
        for ak in ints:
            for c in ak:
                g = math.gcd(g, c)
        sign = 1 if ints[-1][-1] > 0 else -1
        return DiffOp([[Fraction(sign * c, g) for c in ak] for ak in ints])

    def same_up_to_scalar(self, other: "DiffOp") -> bool:
        return self.normalized() == other.normalized()

    def same_up_to_left_factor(self, other: "DiffOp") -> bool:
        """Equal after dividing by leading coefficients (rational function factor)."""
        if self.order != other.order:
            return False
        la, lb = list(self.a[-1]), list(other.a[-1])
        return all(pmul(list(self.coeff(k)), lb, self.p) == pmul(list(other.coeff(k)), la, self.p)
                   for k in range(self.order + 1))

    # action on series ------------------------------------------------------------
    def apply(self, f: UniSeries) -> UniSeries:
        """L f for a power series f; the result order is f.order - s."""
        if f.p != self.p:
            raise ValueError("operator and series over different rings")
        s, b = self.theta_form
        total = UniSeries.zero(f.order, f.p, f.var)
        th = f
        for k, bk in enumerate(b):
            if k:
                th = th.theta()
            if bk:
                total = total + _poly_times(bk, th)
        return total.shift(-s) if s else total

    def apply_log(self, f: "LogSeries") -> "LogSeries":
        s, b = self.theta_form
        total = LogSeries.zero_like(f)
        th = f
        for k, bk in enumerate(b):
            if k:
                th = th.theta()
            if bk:
                total = total + th.poly_mul(bk)
        return total.shift(-s) if s else total

    def reduce_mod_p(self, p: int) -> "DiffOp":
        if self.p is not None:
            raise ValueError("already over a prime field")
        return DiffOp([[ring_coerce(c, p) for c in ak] for ak in self.a], p)

    # display -------------------------------------------------------------------------
    def to_json(self) -> dict:
        fmt = (lambda c: rat_str(c)) if self.p is None else (lambda c: str(c))
        return {"form": "D", "theta": False, "prime": self.p,
                "coeffs": [[fmt(c) for c in ak] for ak in self.a]}

    @classmethod
    def from_json(cls, data) -> "DiffOp":
        p = data.get("prime")
        conv = (lambda c: Fraction(c)) if p is None else int
        coeffs = [[conv(c) for c in ak] for ak in data["coeffs"]]
        if data.get("theta"):
            return cls.from_theta(coeffs, p)
        return cls(coeffs, p)

    def __str__(self):
        parts = []
        for k in range(self.order, -1, -1):
            ak = self.a[k]
            if not ak:
                continue
            poly = str(MultiPoly.from_univariate(list(ak), "x", self.p))
            dk = "" if k == 0 else ("D" if k == 1 else f"D^{k}")
            if not dk:
                parts.append(f"({poly})")
            elif poly == "1":
                parts.append(dk)
            else:
                parts.append(f"({poly})*{dk}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOp({self})"


def _shift_theta(P: Sequence, rho, p=None) -> list:
    """Coefficients of P(theta + rho)."""
    out: list = []
    for c in reversed(list(P)):
        out = padd(pmul(out, [rho, 1], p), [c], p)
    return out


def _poly_times(poly: Sequence, f: UniSeries) -> UniSeries:
    total = UniSeries.zero(f.order, f.p, f.var)
    for j, c in enumerate(poly):
        if c and j <= f.order:
            total = total + f.truncate(f.order - j).shift(j).scale(c)
    return total


def op_mul(L1: DiffOp, L2: DiffOp) -> DiffOp:
    return L1 * L2


def adjoint(L: DiffOp) -> DiffOp:
    return L.adjoint()


def op_apply(L: DiffOp, f):
    return L.apply_log(f) if isinstance(f, LogSeries) else L.apply(f)


def theta_op(k: int = 1) -> DiffOp:
    b = [[] for _ in range(k + 1)]
    b[k] = [1]
    return DiffOp.from_theta(b)


def x_op(poly: Sequence = (0, 1)) -> DiffOp:
    return DiffOp([list(poly)])


# ---------------------------------------------------------------------------
# log-graded series: sum_k f_k ln(x)^k / k!


class LogSeries:
    __slots__ = ("parts",)

    def __init__(self, parts: Sequence[UniSeries]):
        if not parts:
            raise ValueError("empty log series")
        self.parts = tuple(parts)

    @classmethod
    def zero_like(cls, f: "LogSeries"):
        z = UniSeries.zero(f.order, f.parts[0].p, f.parts[0].var)
        return cls([z] * len(f.parts))

    @property
    def order(self):
        return min(s.order for s in self.parts)

    def __add__(self, other):
        n = max(len(self.parts), len(other.parts))
        z = UniSeries.zero(min(self.order, other.order), self.parts[0].p)
        a = list(self.parts) + [z] * (n - len(self.parts))
        b = list(other.parts) + [z] * (n - len(other.parts))
        return LogSeries([u + v for u, v in zip(a, b)])

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return LogSeries([s.scale(c) for s in self.parts])

    def __mul__(self, other: "LogSeries"):
        if not isinstance(other, LogSeries):
            return self.scale(other)
        n = len(self.parts) + len(other.parts) - 1
        order = min(self.order, other.order)
        out = [UniSeries.zero(order, self.parts[0].p) for _ in range(n)]
        for a, f in enumerate(self.parts):
            for b, g in enumerate(other.parts):
                out[a + b] = out[a + b] + (f * g).scale(math.comb(a + b, a))
        return LogSeries(out)

    def theta(self):
        parts = list(self.parts)
        out = []
        for k, f in enumerate(parts):
            t = f.theta()
            if k + 1 < len(parts):
                t = t + parts[k + 1]
            out.append(t)
        return LogSeries(out)

    def poly_mul(self, poly):
        return LogSeries([_poly_times(poly, f) for f in self.parts])

    def shift(self, k):
        return LogSeries([f.shift(k) for f in self.parts])

    def truncate(self, n):
        return LogSeries([f.truncate(n) for f in self.parts])

    def at_log_zero(self) -> UniSeries:
        return self.parts[0]

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.parts)


# ---------------------------------------------------------------------------
# special operators


def hypergeom_operator(spec: HypergeomCoeffSpec) -> DiffOp:
    """theta * prod(theta + b - 1) - scale * x * prod(theta + a)."""
    P0 = [0, 1]
    for b in spec.lower:
        P0 = pmul(P0, [b - 1, 1])
    P1 = [Fraction(1)]
    for a in spec.upper:
        P1 = pmul(P1, [a, 1])
    return DiffOp.from_theta_polys([P0, pscale(P1, -spec.scale)])


@dataclass(frozen=True)
class HeunSpec:
    """HeunG(a, q, alpha, beta, gamma, delta; s * x)."""

    a: Fraction
    q: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    delta: Fraction
    s: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("a", "q", "alpha", "beta", "gamma", "delta", "s"):
            object.__setattr__(self, name, as_rat(getattr(self, name)))
        if self.a in (0, 1):
            raise ValueError("Heun singular point a must differ from 0 and 1")
        if self.s == 0:
            raise ValueError("argument scale must be nonzero")

    @property
    def eps(self):
        return self.alpha + self.beta + 1 - self.gamma - self.delta


def heun_operator(spec: HeunSpec) -> DiffOp:
    """Heun's equation in x with z = s x, cleared of denominators."""
    a, s = spec.a, spec.s
    # z(z-1)(z-a) y_zz + [g (z-1)(z-a) + d z (z-a) + e z (z-1)] y_z + (ab z - q) y
    z = [0, s]
    zm1 = [-1, s]
    zma = [-a, s]
    c2 = pmul(pmul(z, zm1), zma)
    c1 = padd(padd(pscale(pmul(zm1, zma), spec.gamma), pscale(pmul(z, zma), spec.delta)),
              pscale(pmul(z, zm1), spec.eps))
    c0 = [-spec.q, spec.alpha * spec.beta * s]
    # d/dz = (1/s) d/dx
    return DiffOp([c0, pscale(c1, 1 / s), pscale(c2, 1 / s**2)])


def heun_series(spec: HeunSpec, N: int) -> UniSeries:
    """Direct three-term recurrence for HeunG (independent of the operator code)."""
    a, q, al, be, ga, de = spec.a, spec.q, spec.alpha, spec.beta, spec.gamma, spec.delta
    ep = spec.eps
    c = [Fraction(1)]
    if N >= 1:
        c.append(q / (a * ga))
    for n in range(1, N):
        num = (n * ((n - 1 + ga) * (1 + a) + a * de + ep) + q) * c[n] \
            - (n - 1 + al) * (n - 1 + be) * c[n - 1]
        c.append(num / (a * (n + 1) * (n + ga)))
    return UniSeries([v * spec.s**n for n, v in enumerate(c)], N)


def series_from_op(L: DiffOp, N: int, start: int = 0, init=1) -> UniSeries:
    """Power-series solution x^start * (init + ...) of L, through x^N.

    Fails when the solution is not determined uniquely by its leading term.
    """
    s, parts = L.theta_parts()
    P0 = parts[0]
    if peval(P0, start) != 0:
        raise PreconditionError(f"{start} is not a root of the indicial polynomial")
    p = L.p
    c = {start: ring_coerce(init, p)}
    for n in range(start + 1, N + 1):
        rhs = 0
        for j in range(1, len(parts)):
            m = n - j
            if m >= start and c.get(m):
                rhs += peval(parts[j], m) * c[m]
        d = peval(P0, n)
        if p is not None:
            rhs %= p
            d %= p
        if not d:
            if rhs:
                raise PreconditionError(f"logarithmic obstruction at order {n}")
            raise PreconditionError(f"analytic solution not unique (free coefficient at order {n})")
        c[n] = (-rhs * ring_inv(d, p)) % p if p is not None else -rhs / d
    cs = [c.get(n, 0) for n in range(N + 1)]
    return UniSeries(cs, N, p)


# ---------------------------------------------------------------------------
# MUM structure and Frobenius bases


def mum_exponent(L: DiffOp):
    """rho if the indicial polynomial is c*(theta - rho)^r with rational rho, else None."""
    P0 = L.indicial()
    r = len(P0) - 1
    if r != L.order:
        return None
    lead = P0[-1]
    rho = -Fraction(P0[-2]) / (r * lead) if r >= 1 else Fraction(0)
    target = [lead * math.comb(r, i) * (-rho) ** (r - i) for i in range(r + 1)]
    return rho if [Fraction(v) for v in P0] == target else None


def is_mum(L: DiffOp) -> bool:
    """All local exponents at x = 0 vanish."""
    return mum_exponent(L) == 0


@dataclass(frozen=True)
class LogSolutionBasis:
    """Analytic parts (y0, y~1, ..., y~(r-1)); the full solutions are
    y_j = x^rho * sum_{k<=j} y~_{j-k} ln(x)^k / k!."""

    parts: tuple
    order: int
    rho: int = 0

    @property
    def y0(self):
        return self.parts[0]

    def gauged_solution(self, j: int) -> LogSeries:
        """y_j / x^rho."""
        return LogSeries([self.parts[j - k] for k in range(j + 1)])

    def log_solution(self, j: int) -> LogSeries:
        ls = self.gauged_solution(j)
        if self.rho < 0:
            raise PreconditionError("solutions carry a negative power of x")
        return ls.shift(self.rho) if self.rho else ls

    def solutions(self) -> list:
        return [self.log_solution(j) for j in range(len(self.parts))]


def frobenius_solutions(L: DiffOp, N: int, verify: bool = True) -> LogSolutionBasis:
    """Log-graded Frobenius basis at a point of maximal unipotent monodromy."""
    rho = mum_exponent(L)
    if rho is None:
        raise PreconditionError("operator is not MUM at 0")
    if rho.denominator != 1:
        raise PreconditionError(f"single exponent {rho} is not an integer")
    rho = int(rho)
    M = L.conjugate_by_power(rho) if rho else L
    s, parts = M.theta_parts()
    r = M.order
    P0 = parts[0]
    c = [[Fraction(1)] + [Fraction(0)] * (r - 1)]
    for n in range(1, N + 1):
        rhs = [Fraction(0)] * r
        for j in range(1, len(parts)):
            m = n - j
            if m < 0:
                continue
            Pj = _poly_in_theta_at(parts[j], Fraction(m), r)
            rhs = _eps_add(rhs, _eps_mul(Pj, c[m], r))
        d = _poly_in_theta_at(P0, Fraction(n), r)
        c.append(_eps_mul([-v for v in rhs], _eps_inv(d, r), r))
    basis = tuple(UniSeries([c[n][i] for n in range(N + 1)], N) for i in range(r))
    out = LogSolutionBasis(basis, r, rho)
    if verify:
        for j in range(r):
            res = M.apply_log(out.gauged_solution(j))
            if not res.is_zero():
                raise ArithmeticError(f"Frobenius solution {j} fails verification")
    return out


def _eps_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _eps_mul(a, b, r):
    out = [Fraction(0)] * r
    for i, u in enumerate(a):
        if u:
            for j in range(r - i):
                if b[j]:
                    out[i + j] += u * b[j]
    return out


def _eps_inv(a, r):
    if not a[0]:
        raise ZeroDivisionError("non-invertible eps series")
    inv0 = 1 / a[0]
    g = [inv0]
    for n in range(1, r):
        g.append(-inv0 * sum(a[k] * g[n - k] for k in range(1, n + 1)))
    return g


# ---------------------------------------------------------------------------
# guessing


@dataclass(frozen=True)
class GuessBounds:
    max_order: int = 6
    max_degree: int = 12


def _d_form_matrix(f: UniSeries, r: int, d: int, rows: int):
    """Rows n = 0..rows-1 of sum_{k,j} c_kj [x^n] x^j f^(k)."""
    derivs = [f]
    for _ in range(r):
        derivs.append(derivs[-1].deriv())
    M = []
    for n in range(rows):
        row = []
        for k in range(r + 1):
            g = derivs[k]
            for j in range(d + 1):
                m = n - j
                row.append(g.c[m] if 0 <= m <= g.order else 0)
        M.append(row)
    return M


def _op_from_vector(v, r, d) -> DiffOp:
    coeffs = [[v[k * (d + 1) + j] for j in range(d + 1)] for k in range(r + 1)]
    return DiffOp(coeffs).normalized()


def guess_ode(f: UniSeries, max_order: int = 6, max_degree: int = 12,
              guard: float = 0.25) -> DiffOp | None:
    """Minimal (order, then degree) D-form operator annihilating f.

    Solves on a prefix of the coefficients and re-verifies on held-out ones.
    """
    if f.p is not None:
        raise PreconditionError("guess_ode works over Q")
    for r in range(1, max_order + 1):
        for d in range(0, max_degree + 1):
            unknowns = (r + 1) * (d + 1)
            avail = f.order - r + 1
            solve_rows = unknowns + max(1, math.ceil(guard * unknowns))
            if solve_rows + max(1, math.ceil(guard * solve_rows)) > avail:
                if r == max_order and d == 0:
                    raise PreconditionError("insufficient coefficients for the requested bounds")
                break
            M = _d_form_matrix(f, r, d, solve_rows)
            if not _has_kernel_mod_p(M):
                continue
            ker = nullspace_qq(M)
            if not ker:
                continue
            L = _op_from_vector(ker[0], r, d)
            if L.order < r:
                continue
            if L.apply(f).is_zero():
                return L
    return None


def _has_kernel_mod_p(M) -> bool:
    p = WORD_PRIMES[0]
    rows = []
    for row in M:
        den = 1
        for x in row:
            den = math.lcm(den, Fraction(x).denominator)
        rows.append([int(Fraction(x) * den) % p for x in row])
    K = nullspace_mod_p(np.array(rows, dtype=np.int64), p)
    return K.shape[0] > 0


def guess_theta_log(sols: Sequence[LogSeries], r: int, max_degree: int,
                    guard: float = 0.25) -> DiffOp | None:
    """theta-form operator sum_{k<=r, j<=d} c_kj x^j theta^k annihilating every
    log-graded series in ``sols``; smallest degree d wins."""
    N = min(s.order for s in sols)
    thetas = []
    for s in sols:
        ths = [s]
        for _ in range(r):
            ths.append(ths[-1].theta())
        thetas.append(ths)
    for d in range(max_degree + 1):
        unknowns = (r + 1) * (d + 1)
        rows_per_n = sum(len(s.parts) for s in sols)
        n_solve = N
        while n_solve > 0 and (n_solve - 1) * rows_per_n >= 2 * unknowns:
            n_solve -= 1
        n_solve = max(n_solve, math.ceil((1 + guard) * unknowns / rows_per_n) + d)
        if n_solve > N * 0.8:
            return None
        M = []
        for ths in thetas:
            for lp in range(len(ths[0].parts)):
                for n in range(n_solve + 1):
                    row = []
                    for k in range(r + 1):
                        g = ths[k].parts[lp] if lp < len(ths[k].parts) else None
                        for j in range(d + 1):
                            m = n - j
                            row.append(g.c[m] if g is not None and m >= 0 else 0)
                    M.append(row)
        if not _has_kernel_mod_p(M):
            continue
        ker = nullspace_qq(M)
        if not ker:
            continue
        v = ker[0]
        b = [[v[k * (d + 1) + j] for j in range(d + 1)] for k in range(r + 1)]
        L = DiffOp.from_theta(b).normalized()
        if L.order < r:
            continue
        if all(L.apply_log(s).is_zero() for s in sols):
            return L
    return None


def wronskian_pairs(basis: LogSolutionBasis) -> list:
    """x * (y_i y_j' - y_j y_i') = y_i theta(y_j) - y_j theta(y_i) for i < j."""
    ys = basis.solutions()
    ths = [y.theta() for y in ys]
    out = []
    for i in range(len(ys)):
        for j in range(i + 1, len(ys)):
            out.append(ys[i] * ths[j] - ys[j] * ths[i])
    return out


def log_rank(series: Sequence[LogSeries]) -> int:
    """Dimension of the Q-span of log-graded series (coefficientwise)."""
    rows = []
    for s in series:
        row = []
        for k in range(max(len(t.parts) for t in series)):
            part = s.parts[k] if k < len(s.parts) else None
            for n in range(s.order + 1):
                row.append(part.c[n] if part is not None else 0)
        rows.append(row)
    return rank_qq(rows)


@dataclass(frozen=True)
class ExteriorSquare:
    operator: DiffOp | None
    order: int


def exterior_square_order4(L: DiffOp, N: int = 120, max_degree: int = 24) -> ExteriorSquare:
    """Minimal operator annihilating all 2x2 Wronskians of the solutions of L."""
    if L.order != 4:
        raise PreconditionError("exterior square is implemented for order-4 operators")
    basis = frobenius_solutions(L, N)
    ws = wronskian_pairs(basis)
    r = log_rank(ws)
    # a basis of the span keeps the guessing system small
    chosen: list = []
    for w in ws:
        if log_rank(chosen + [w]) > len(chosen):
            chosen.append(w)
    M = guess_theta_log(chosen, r, max_degree)
    if M is None:
        raise PreconditionError(f"no order-{r} operator found up to degree {max_degree}")
    # M annihilates x*W; M o x annihilates W
    op = (M * x_op()).normalized()
    return ExteriorSquare(op, r)


def hadamard_ops(L1: DiffOp, L2: DiffOp, N: int = 80, max_order: int = 6,
                 max_degree: int = 12) -> DiffOp | None:
    f = series_from_op(L1, N)
    g = series_from_op(L2, N)
    return guess_ode(f.hadamard(g), max_order, max_degree)
