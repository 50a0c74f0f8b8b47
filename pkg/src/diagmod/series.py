"""Truncated power series over Q or F_p.

A :class:`UniSeries` knows coefficients c_0..c_N exactly; ``order`` is N.  Every
binary operation returns the minimum of the operand orders, so a result never
claims more than its inputs justify.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .arith import ModP, ModulusMismatch, as_rat, gen_binom, rat_str, ring_coerce, ring_inv


class PreconditionError(ValueError):
    """An operation was called outside its domain (e.g. inverse of a non-unit)."""


def _zero(p):
    return Fraction(0) if p is None else 0


class UniSeries:
    __slots__ = ("c", "order", "p", "var")

    def __init__(self, coeffs: Iterable, order: int | None = None, p: int | None = None,
                 var: str = "x"):
        cs = [ring_coerce(a, p) for a in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < -1:
            raise ValueError("truncation order must be >= -1")
        if len(cs) < order + 1:
            cs += [_zero(p)] * (order + 1 - len(cs))
        self.c = tuple(cs[: order + 1])
        self.order = order
        self.p = p
        self.var = var

    @classmethod
    def _raw(cls, cs, order, p, var):
        s = cls.__new__(cls)
        s.c, s.order, s.p, s.var = tuple(cs), order, p, var
        return s

    # constructors ------------------------------------------------------------
    @classmethod
    def zero(cls, order, p=None, var="x"):
        return cls._raw([_zero(p)] * (order + 1), order, p, var)

    @classmethod
    def one(cls, order, p=None, var="x"):
        return cls.monomial(0, order, p, var)

    @classmethod
    def monomial(cls, k, order, p=None, var="x", coeff=1):
        cs = [_zero(p)] * (order + 1)
        if k <= order:
            cs[k] = ring_coerce(coeff, p)
        return cls._raw(cs, order, p, var)

    @classmethod
    def from_function(cls, fn: Callable[[int], object], order: int, p=None, var="x"):
        return cls([fn(n) for n in range(order + 1)], order, p, var)

    @classmethod
    def from_poly(cls, coeffs: Sequence, order: int, p=None, var="x"):
        """An exact polynomial, viewed as a series truncated at ``order``."""
        return cls(list(coeffs)[: order + 1], order, p, var)

    @classmethod
    def from_rational(cls, num: Sequence, den: Sequence, order: int, p=None, var="x"):
        return cls.from_poly(num, order, p, var) * cls.from_poly(den, order, p, var).inv()

    # basic protocol --------------------------------------------------------------
    def __len__(self):
        return self.order + 1

    def __getitem__(self, k):
        if isinstance(k, slice):
            return self.c[k]
        if k < 0:
            raise IndexError("negative index")
        if k > self.order:
            raise IndexError(f"coefficient {k} beyond truncation order {self.order}")
        return self.c[k]

    def coeffs(self) -> list:
        return list(self.c)

    def _compat(self, other: "UniSeries"):
        if other.p != self.p:
            raise ModulusMismatch(f"series over different rings: {self.p} vs {other.p}")

    def _scalar(self, a):
        return ring_coerce(a, self.p)

    def _norm(self, v):
        return v % self.p if self.p is not None else v

    def __eq__(self, other):
        if isinstance(other, UniSeries):
            return self.p == other.p and self.order == other.order and self.c == other.c
        return NotImplemented

    def __hash__(self):
        return hash((self.c, self.order, self.p))

    def agrees(self, other: "UniSeries", through: int | None = None) -> bool:
        """Coefficient equality through a given order (default: shared order)."""
        n = min(self.order, other.order) if through is None else through
        if n > self.order or n > other.order:
            raise PreconditionError(f"cannot compare through {n}: orders {self.order}, {other.order}")
        return self.c[: n + 1] == other.c[: n + 1]

    def truncate(self, order: int) -> "UniSeries":
        if order > self.order:
            raise PreconditionError(f"cannot extend truncation from {self.order} to {order}")
        return UniSeries._raw(self.c[: order + 1], order, self.p, self.var)

    def valuation(self) -> int | None:
        for i, a in enumerate(self.c):
            if a:
                return i
        return None

    def is_zero(self) -> bool:
        return not any(self.c)

    # ring operations -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, UniSeries):
            cs = list(self.c)
            if cs:
                cs[0] = self._norm(cs[0] + self._scalar(other))
            return UniSeries._raw(cs, self.order, self.p, self.var)
        self._compat(other)
        n = min(self.order, other.order)
        cs = [self._norm(a + b) for a, b in zip(self.c[: n + 1], other.c[: n + 1])]
        return UniSeries._raw(cs, n, self.p, self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniSeries._raw([self._norm(-a) for a in self.c], self.order, self.p, self.var)

    def __sub__(self, other):
        return self + (-other if isinstance(other, UniSeries) else -self._scalar(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, a) -> "UniSeries":
        a = self._scalar(a)
        return UniSeries._raw([self._norm(a * b) for b in self.c], self.order, self.p, self.var)

    def __mul__(self, other):
        if not isinstance(other, UniSeries):
            return self.scale(other)
        self._compat(other)
        n = min(self.order, other.order)
        return UniSeries._raw(_convolve(self.c, other.c, n, self.p), n, self.p, self.var)

    __rmul__ = __mul__

    def inv(self) -> "UniSeries":
        f = self.c
        if not f or not f[0]:
            raise PreconditionError(
                f"series inverse needs a unit constant term, got {f[0] if f else 'nothing'}")
        p = self.p
        i0 = ring_inv(f[0], p)
        g = [i0]
        for n in range(1, self.order + 1):
            s = sum(f[k] * g[n - k] for k in range(1, n + 1) if f[k])
            g.append(self._norm(-s * i0))
        return UniSeries._raw(g, self.order, p, self.var)

    def __truediv__(self, other):
        if isinstance(other, UniSeries):
            return self * other.inv()
        return self.scale(ring_inv(self._scalar(other), self.p))

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e):
        if isinstance(e, int):
            if e < 0:
                return self.inv() ** (-e)
            result = UniSeries.one(self.order, self.p, self.var)
            base = self
            while e:
                if e & 1:
                    result = result * base
                e >>= 1
                if e:
                    base = base * base
            return result
        return self.power(e)

    def sqrt(self) -> "UniSeries":
        f = self.c
        p = self.p
        if not f:
            return self
        g0 = _exact_root(f[0], 2, p)
        if p == 2:
            raise PreconditionError("square roots of series are not defined over F_2")
        two_g0_inv = ring_inv(self._norm(2 * g0), p)
        g = [g0]
        for n in range(1, self.order + 1):
            s = sum(g[k] * g[n - k] for k in range(1, n))
            g.append(self._norm((f[n] - s) * two_g0_inv))
        return UniSeries._raw(g, self.order, p, self.var)

    def power(self, alpha) -> "UniSeries":
        """f**alpha for rational alpha; the constant term must be an exact power."""
        alpha = as_rat(alpha)
        if alpha.denominator == 1:
            return self ** int(alpha)
        if self.p is not None:
            if alpha.denominator == 2:
                return self.sqrt() ** alpha.numerator
            raise PreconditionError("rational powers over F_p are limited to half-integers")
        f = self.c
        if not f[0]:
            raise PreconditionError("rational power needs a nonzero constant term")
        g0 = _exact_root(f[0], alpha.denominator, None) ** alpha.numerator
        g = [Fraction(g0)]
        inv0 = 1 / f[0]
        for n in range(1, self.order + 1):
            s = sum((alpha * k - (n - k)) * f[k] * g[n - k] for k in range(1, n + 1) if f[k])
            g.append(s * inv0 / n)
        return UniSeries._raw(g, self.order, None, self.var)

    def exp(self) -> "UniSeries":
        f = self.c
        if f and f[0]:
            raise PreconditionError(f"exp needs zero constant term, got {f[0]}")
        if self.p is not None and self.order >= self.p:
            raise PreconditionError(f"exp over F_{self.p} is undefined beyond order {self.p - 1}")
        g = [ring_coerce(1, self.p)]
        kf = [k * f[k] for k in range(self.order + 1)]
        for n in range(1, self.order + 1):
            s = sum(kf[k] * g[n - k] for k in range(1, n + 1) if kf[k])
            g.append(self._norm(s * ring_inv(n, self.p)))
        return UniSeries._raw(g, self.order, self.p, self.var)

    def log(self) -> "UniSeries":
        if not self.c or self.c[0] != 1:
            raise PreconditionError(f"log needs constant term 1, got {self.c[0] if self.c else None}")
        if self.p is not None and self.order >= self.p:
            raise PreconditionError(f"log over F_{self.p} is undefined beyond order {self.p - 1}")
        return (self.deriv() * self.truncate(self.order - 1).inv()).integrate()

    # calculus ------------------------------------------------------------------------
    def deriv(self) -> "UniSeries":
        cs = [self._norm(k * self.c[k]) for k in range(1, self.order + 1)]
        return UniSeries._raw(cs, self.order - 1, self.p, self.var)

    def integrate(self) -> "UniSeries":
        cs = [_zero(self.p)]
        for k, a in enumerate(self.c):
            cs.append(self._norm(a * ring_inv(k + 1, self.p)))
        return UniSeries._raw(cs, self.order + 1, self.p, self.var)

    def theta(self) -> "UniSeries":
        """x d/dx, which keeps the truncation order."""
        return UniSeries._raw([self._norm(k * a) for k, a in enumerate(self.c)],
                              self.order, self.p, self.var)

    def shift(self, k: int) -> "UniSeries":
        """Multiply by x^k (k may be negative when the valuation allows it)."""
        if k >= 0:
            return UniSeries._raw([_zero(self.p)] * k + list(self.c), self.order + k, self.p, self.var)
        v = self.valuation()
        if v is not None and v < -k:
            raise PreconditionError(f"cannot divide by x^{-k}: valuation {v}")
        return UniSeries._raw(self.c[-k:], self.order + k, self.p, self.var)

    # composition ----------------------------------------------------------------------
    def compose(self, g: "UniSeries") -> "UniSeries":
        """f(g(x)) for g(0) = 0."""
        self._compat(g)
        if g.c and g.c[0]:
            raise PreconditionError("composition needs an inner series vanishing at 0")
        n = min(self.order, g.order)
        if n < 0:
            return UniSeries._raw([], n, self.p, g.var)
        gt = g.truncate(n)
        result = UniSeries.monomial(0, n, self.p, g.var, self.c[n])
        for i in range(n - 1, -1, -1):
            result = result * gt + self.c[i]
        return result

    def reversion(self) -> "UniSeries":
        """Compositional inverse of f = x + O(x^2)."""
        if self.order < 1 or self.c[0] or self.c[1] != 1:
            raise PreconditionError("reversion needs f = x + O(x^2)")
        N = self.order
        if self.p is None:
            # Lagrange: [q^n] g = (1/n) [x^(n-1)] (x/f)^n
            h = self.shift(-1).inv()
            out = [Fraction(0), Fraction(1)]
            hp = h
            for n in range(2, N + 1):
                hp = hp * h
                out.append(hp[n - 1] / n)
            return UniSeries._raw(out, N, None, self.var)
        phi = self - UniSeries.monomial(1, N, self.p, self.var)
        q = UniSeries.monomial(1, N, self.p, self.var)
        g = q
        for _ in range(N):
            g = q - phi.compose(g)
        return g

    def hadamard(self, other: "UniSeries") -> "UniSeries":
        self._compat(other)
        n = min(self.order, other.order)
        return UniSeries._raw([self._norm(a * b) for a, b in zip(self.c[: n + 1], other.c[: n + 1])],
                              n, self.p, self.var)

    # rings ------------------------------------------------------------------------------
    def reduce_mod_p(self, p: int) -> "UniSeries":
        if self.p is not None:
            raise PreconditionError("series is already over a prime field")
        cs = []
        for n, a in enumerate(self.c):
            if a.denominator % p == 0:
                raise PreconditionError(f"coefficient of order {n} has denominator divisible by {p}")
            cs.append(a.numerator * pow(a.denominator, -1, p) % p)
        return UniSeries._raw(cs, self.order, p, self.var)

    def is_integral(self) -> bool:
        return self.p is not None or all(a.denominator == 1 for a in self.c)

    # serialization ----------------------------------------------------------------------
    def to_json(self) -> dict:
        if self.p is None:
            cs = [rat_str(a) for a in self.c]
        else:
            cs = [str(a) for a in self.c]
        return {"var": self.var, "order": self.order, "prime": self.p, "coeffs": cs}

    @classmethod
    def from_json(cls, data: Mapping) -> "UniSeries":
        p = data.get("prime")
        cs = [Fraction(c) if p is None else int(c) for c in data["coeffs"]]
        return cls(cs, int(data["order"]), p, data.get("var", "x"))

    def __str__(self):
        parts = []
        for k, a in enumerate(self.c):
            if not a:
                continue
            s = rat_str(a) if self.p is None else str(a)
            mono = "" if k == 0 else (self.var if k == 1 else f"{self.var}^{k}")
            if not mono:
                parts.append(s)
            elif s == "1":
                parts.append(mono)
            elif s == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{s}*{mono}")
        body = " + ".join(parts).replace("+ -", "- ") or "0"
        return f"{body} + O({self.var}^{self.order + 1})"

    def __repr__(self):
        ring = "" if self.p is None else f" mod {self.p}"
        return f"UniSeries({self}{ring})"


def _exact_root(c, k: int, p):
    """An exact k-th root of a scalar (rational or in F_p)."""
    if p is None:
        c = as_rat(c)
        if c < 0 and k % 2 == 0:
            raise PreconditionError(f"constant term {c} has no real {k}-th root")
        num = _int_root(abs(c.numerator), k)
        den = _int_root(c.denominator, k)
        if num is None or den is None:
            raise PreconditionError(f"constant term {c} is not an exact {k}-th power")
        return Fraction(num if c >= 0 else -num, den)
    if k != 2:
        raise PreconditionError("only square roots are supported over F_p")
    c %= p
    if c == 0:
        raise PreconditionError("square root needs a nonzero constant term")
    for r in range(1, p) if p < 5000 else ():
        if r * r % p == c:
            return r
    if p >= 5000 and pow(c, (p - 1) // 2, p) == 1 and p % 4 == 3:
        return pow(c, (p + 1) // 4, p)
    raise PreconditionError(f"constant term {c} is not a square mod {p}")


def _int_root(n: int, k: int):
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k)) if n < 2**1000 else int(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def _convolve(a, b, n, p):
    """First n+1 coefficients of the product of coefficient tuples a, b."""
    if n < 0:
        return []
    if p is not None and p < 2**20 and n > 32:
        x = np.array(a[: n + 1], dtype=np.int64)
        y = np.array(b[: n + 1], dtype=np.int64)
        out = np.zeros(n + 1, dtype=np.int64)
        # chunk so partial sums stay below 2^63
        for i in np.nonzero(x)[0]:
            out[i:] = (out[i:] + int(x[i]) * y[: n + 1 - i]) % p
        return [int(v) for v in out]
    if p is None and n > 24 and _all_int(a, n) and _all_int(b, n):
        return [Fraction(v) for v in _kronecker_mul([int(v) for v in a[: n + 1]],
                                                    [int(v) for v in b[: n + 1]], n)]
    out = []
    for k in range(n + 1):
        s = 0
        for i in range(k + 1):
            ai = a[i]
            if ai:
                bi = b[k - i]
                if bi:
                    s += ai * bi
        out.append(s % p if p is not None else s)
    return out


def _all_int(a, n):
    return all(v.denominator == 1 for v in a[: n + 1])


def _kronecker_mul(a: list, b: list, n: int) -> list:
    """Exact integer polynomial product via big-integer packing (truncated at n)."""
    ma = max((abs(v) for v in a), default=0)
    mb = max((abs(v) for v in b), default=0)
    if ma == 0 or mb == 0:
        return [0] * (n + 1)
    bits = ma.bit_length() + mb.bit_length() + (n + 1).bit_length() + 2
    nbytes = (bits + 7) // 8
    return unpack_signed(pack_signed(a, nbytes) * pack_signed(b, nbytes), nbytes, n + 1)


def pack_signed(a, nbytes: int) -> int:
    """sum a_i 256^(nbytes*i) for signed integers a_i."""
    pos = bytearray()
    neg = bytearray()
    zero = bytes(nbytes)
    for v in a:
        if v >= 0:
            pos += v.to_bytes(nbytes, "little")
            neg += zero
        else:
            pos += zero
            neg += (-v).to_bytes(nbytes, "little")
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def unpack_signed(total: int, nbytes: int, count: int) -> list:
    """Inverse of pack_signed when every slot satisfies |v| < 2^(8 nbytes - 1)."""
    half = 1 << (8 * nbytes - 1)
    bias = int.from_bytes(half.to_bytes(nbytes, "little") * count, "little")
    # slots above `count` may borrow from below, never the reverse
    biased = (total + bias) & ((1 << (8 * nbytes * count)) - 1)
    raw = biased.to_bytes(nbytes * count, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - half
            for i in range(count)]


# ---------------------------------------------------------------------------
# pullbacks


@dataclass(frozen=True)
class PullbackSpec:
    """p(x) = lam * x^r * A(x) with A(0) = 1."""

    lam: Fraction
    r: int
    A: UniSeries
    # (numerator, denominator) of p itself when A is rational
    rational_form: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", as_rat(self.lam))
        if self.r < 1:
            raise PreconditionError("pullback exponent r must be >= 1 (valuation gain)")
        if self.A.order < 0 or self.A[0] != 1:
            raise PreconditionError("pullback A(x) must satisfy A(0) = 1")

    @classmethod
    def identity(cls, order: int = 64):
        return cls(Fraction(1), 1, UniSeries.one(order))

    @classmethod
    def rational(cls, lam, r: int, num: Sequence, den: Sequence, order: int):
        """A = num/den as exact polynomials (both with constant term 1)."""
        lam = as_rat(lam)
        top = [Fraction(0)] * r + [lam * as_rat(c) for c in num]
        return cls(lam, r, UniSeries.from_rational(num, den, order),
                   (tuple(top), tuple(as_rat(c) for c in den)))

    def series(self, order: int | None = None) -> UniSeries:
        n = self.A.order + self.r if order is None else order
        A = self.A.truncate(min(self.A.order, n - self.r))
        s = A.shift(self.r).scale(self.lam)
        return s.truncate(min(n, s.order))


def compose(f: UniSeries, p: PullbackSpec) -> UniSeries:
    return f.compose(p.series(f.order))


def reversion(f: UniSeries) -> UniSeries:
    return f.reversion()


def hadamard(f: UniSeries, g: UniSeries) -> UniSeries:
    return f.hadamard(g)


def series_mul(f, g):
    return f * g


def series_inv(f):
    return f.inv()


def series_sqrt(f):
    return f.sqrt()


def series_exp(f):
    return f.exp()


def series_log(f):
    return f.log()


# ---------------------------------------------------------------------------
# multivariate series


class MultiSeries:
    """Sparse multivariate series truncated per variable: exponent e_i <= bounds[i]."""

    __slots__ = ("vars", "terms", "bounds", "p")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, object],
                 bounds: Sequence[int], p: int | None = None):
        self.vars = tuple(variables)
        self.bounds = tuple(int(b) for b in bounds)
        self.p = p
        if len(self.bounds) != len(self.vars):
            raise ValueError("one bound per variable expected")
        t = {}
        for e, c in terms.items():
            e = tuple(e)
            if all(a <= b for a, b in zip(e, self.bounds)):
                c = ring_coerce(c, p)
                if c:
                    t[e] = c
        self.terms = t

    @classmethod
    def _raw(cls, variables, terms, bounds, p):
        s = cls.__new__(cls)
        s.vars, s.terms, s.bounds, s.p = variables, terms, bounds, p
        return s

    @classmethod
    def from_poly(cls, poly, bounds: Sequence[int]):
        return cls(poly.vars, poly.terms, bounds, poly.p)

    @classmethod
    def one(cls, variables, bounds, p=None):
        return cls(variables, {(0,) * len(tuple(variables)): 1}, bounds, p)

    @classmethod
    def product_of_univariates(cls, series: Sequence[UniSeries], names: Sequence[str]):
        """f_1(z_1) * ... * f_k(z_k)."""
        bounds = [s.order for s in series]
        p = series[0].p
        terms = {(): ring_coerce(1, p)}
        for s in series:
            nt = {}
            for e, c in terms.items():
                for k, a in enumerate(s.c):
                    if a:
                        v = c * a
                        nt[e + (k,)] = v % p if p is not None else v
            terms = nt
        return cls(names, terms, bounds, p)

    def _check(self, other):
        if other.vars != self.vars or other.p != self.p:
            raise ValueError("incompatible multivariate series")

    def _norm(self, v):
        return v % self.p if self.p is not None else v

    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            other = MultiSeries.one(self.vars, self.bounds, self.p).scale(other)
        self._check(other)
        bounds = tuple(min(a, b) for a, b in zip(self.bounds, other.bounds))
        t = {}
        for src in (self.terms, other.terms):
            for e, c in src.items():
                if all(a <= b for a, b in zip(e, bounds)):
                    t[e] = self._norm(t.get(e, 0) + c)
        return MultiSeries._raw(self.vars, {e: c for e, c in t.items() if c}, bounds, self.p)

    __radd__ = __add__

    def scale(self, a):
        a = ring_coerce(a, self.p)
        t = {e: self._norm(c * a) for e, c in self.terms.items()}
        return MultiSeries._raw(self.vars, {e: c for e, c in t.items() if c}, self.bounds, self.p)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiSeries) else -as_rat(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            return self.scale(other)
        self._check(other)
        bounds = tuple(min(a, b) for a, b in zip(self.bounds, other.bounds))
        t: dict = {}
        for e1, c1 in self.terms.items():
            if any(a > b for a, b in zip(e1, bounds)):
                continue
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if all(a <= b for a, b in zip(e, bounds)):
                    t[e] = t.get(e, 0) + c1 * c2
        t = {e: self._norm(c) for e, c in t.items()}
        return MultiSeries._raw(self.vars, {e: c for e, c in t.items() if c}, bounds, self.p)

    __rmul__ = __mul__

    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), _zero(self.p))

    def _unit_split(self):
        c0 = self.constant_term()
        if not c0:
            raise PreconditionError("operation needs a nonzero constant term")
        u = self.scale(ring_inv(c0, self.p)) - 1
        return c0, u

    def _series_in(self, u: "MultiSeries", coeff: Callable[[int], object]) -> "MultiSeries":
        """sum_j coeff(j) u^j with u of positive valuation (box truncation ends it)."""
        total = MultiSeries.one(self.vars, self.bounds, self.p).scale(coeff(0))
        power = MultiSeries.one(self.vars, self.bounds, self.p)
        j = 0
        while True:
            j += 1
            power = power * u
            if not power.terms:
                return total
            total = total + power.scale(coeff(j))

    def inv(self):
        c0, u = self._unit_split()
        return self._series_in(u, lambda j: (-1) ** j).scale(ring_inv(c0, self.p))

    def power(self, alpha):
        alpha = as_rat(alpha)
        c0, u = self._unit_split()
        root = _exact_root(c0, alpha.denominator, self.p)
        if self.p is None:
            lead = root ** alpha.numerator
        else:
            lead = pow(root, alpha.numerator, self.p) if alpha.numerator >= 0 else \
                pow(ring_inv(root, self.p), -alpha.numerator, self.p)
        return self._series_in(u, lambda j: gen_binom(alpha, j)).scale(lead)

    def sqrt(self):
        return self.power(Fraction(1, 2))

    def exp(self):
        if self.constant_term():
            raise PreconditionError("exp needs zero constant term")
        return self._series_in(self, lambda j: Fraction(1, _fact(j)))

    def log(self):
        c0, u = self._unit_split()
        if c0 != 1:
            raise PreconditionError("log needs constant term 1")
        return self._series_in(u, lambda j: Fraction(0) if j == 0 else Fraction((-1) ** (j + 1), j))

    def diag_extract(self, order: int | None = None) -> UniSeries:
        n = min(self.bounds) if order is None else order
        if any(b < n for b in self.bounds):
            raise PreconditionError(f"truncation bounds {self.bounds} below target order {n}")
        k = len(self.vars)
        cs = [self.terms.get((m,) * k, _zero(self.p)) for m in range(n + 1)]
        return UniSeries._raw(cs, n, self.p, "z")


def _fact(j):
    out = 1
    for i in range(2, j + 1):
        out *= i
    return out


def diag_extract(F: MultiSeries, order: int | None = None) -> UniSeries:
    return F.diag_extract(order)
