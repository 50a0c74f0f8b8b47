"""Exact scalars, sparse polynomials and combinatorial coefficients.

Rationals are plain :class:`fractions.Fraction` values (always reduced, positive
denominator).  Prime-field elements carry their modulus so that mixing two
different primes is caught immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rat = Fraction


def as_rat(value) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_str(value) -> str:
    """Render an exact rational as "num/den" (or "num" when integral)."""
    q = as_rat(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for s in small:
        if p % s == 0:
            return p == s
    d, r = p - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # deterministic for p < 3.3e24
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class ModulusMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ModP:
    """An element of the prime field F_p."""

    value: int
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        object.__setattr__(self, "value", self.value % self.p)

    @classmethod
    def from_rat(cls, q, p: int) -> "ModP":
        q = as_rat(q)
        if q.denominator % p == 0:
            raise ZeroDivisionError(f"denominator {q.denominator} divisible by {p}")
        return cls(q.numerator * pow(q.denominator, -1, p), p)

    def _coerce(self, other) -> int:
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ModulusMismatch(f"cannot combine F_{self.p} with F_{other.p}")
            return other.value
        if isinstance(other, int):
            return other % self.p
        if isinstance(other, Fraction):
            return ModP.from_rat(other, self.p).value
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModP(-self.value, self.p)

    def inverse(self) -> "ModP":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return ModP(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * ModP(o, self.p).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ModP(o, self.p) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return ModP(pow(self.value, e, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ModulusMismatch(f"cannot compare F_{self.p} with F_{other.p}")
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"ModP({self.value}, {self.p})"


# ---------------------------------------------------------------------------
# scalar helpers shared by the ring-generic code


def ring_coerce(c, p: int | None):
    """Map a scalar into Q (p None) or into F_p represented by ints in [0, p)."""
    if p is None:
        if isinstance(c, ModP):
            raise TypeError("prime-field element used where a rational is expected")
        return as_rat(c)
    if isinstance(c, ModP):
        if c.p != p:
            raise ModulusMismatch(f"cannot combine F_{c.p} with F_{p}")
        return c.value
    q = as_rat(c)
    if q.denominator % p == 0:
        raise ZeroDivisionError(f"denominator of {q} divisible by {p}")
    return q.numerator * pow(q.denominator, -1, p) % p


def ring_inv(c, p: int | None):
    if p is None:
        if c == 0:
            raise ZeroDivisionError("division by zero")
        return 1 / Fraction(c)
    if c % p == 0:
        raise ZeroDivisionError(f"0 has no inverse in F_{p}")
    return pow(c, -1, p)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials


class MultiPoly:
    """Sparse polynomial: exponent tuple -> coefficient over Q or F_p.

    Coefficients over F_p are stored as ints in [0, p).  Zero coefficients are
    never stored.  Instances are treated as immutable.
    """

    __slots__ = ("vars", "terms", "p")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, object] | None = None,
                 p: int | None = None):
        self.vars = tuple(variables)
        self.p = p
        clean = {}
        k = len(self.vars)
        for e, c in (terms or {}).items():
            e = tuple(int(a) for a in e)
            if len(e) != k:
                raise ValueError(f"exponent {e} does not match variables {self.vars}")
            if any(a < 0 for a in e):
                raise ValueError(f"negative exponent {e}")
            c = ring_coerce(c, p)
            if c:
                v = clean.get(e, 0) + c
                if p is not None:
                    v %= p
                if v:
                    clean[e] = v
                else:
                    clean.pop(e, None)
        self.terms = clean

    # constructors --------------------------------------------------------
    @classmethod
    def const(cls, variables, c, p=None):
        return cls(variables, {(0,) * len(tuple(variables)): c}, p)

    @classmethod
    def var(cls, variables, name, p=None):
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1}, p)

    @classmethod
    def from_univariate(cls, coeffs: Sequence, name: str = "x", p=None):
        return cls((name,), {(i,): c for i, c in enumerate(coeffs)}, p)

    # basic protocol --------------------------------------------------------
    def _new(self, terms):
        out = MultiPoly.__new__(MultiPoly)
        out.vars, out.p, out.terms = self.vars, self.p, terms
        return out

    def _check(self, other: "MultiPoly"):
        if other.vars != self.vars:
            raise ValueError(f"variable lists differ: {self.vars} vs {other.vars}")
        if other.p != self.p:
            raise ModulusMismatch(f"rings differ: {self.p} vs {other.p}")

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.const(self.vars, other, self.p)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            try:
                other = self._lift(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.vars == other.vars and self.p == other.p and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, self.p, frozenset(self.terms.items())))

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = t.get(e, 0) + c
            if self.p is not None:
                v %= self.p
            if v:
                t[e] = v
            else:
                t.pop(e, None)
        return self._new(t)

    __radd__ = __add__

    def __neg__(self):
        if self.p is None:
            return self._new({e: -c for e, c in self.terms.items()})
        return self._new({e: (-c) % self.p for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = ring_coerce(other, self.p)
            if not c:
                return self._new({})
            if self.p is None:
                return self._new({e: a * c for e, a in self.terms.items()})
            return self._new({e: a * c % self.p for e, a in self.terms.items()})
        self._check(other)
        t: dict = {}
        p = self.p
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        if p is None:
            t = {e: c for e, c in t.items() if c}
        else:
            t = {e: c % p for e, c in t.items() if c % p}
        return self._new(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(self.vars, 1, self.p)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # queries -----------------------------------------------------------------
    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), 0)

    def degree(self, var: str | None = None) -> int:
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def used_vars(self) -> tuple:
        return tuple(v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms))

    def diff(self, var: str) -> "MultiPoly":
        i = self.vars.index(var)
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                v = c * e[i]
                if self.p is not None:
                    v %= self.p
                if v:
                    t[tuple(f)] = v
        return self._new(t)

    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at a point; values may be scalars or anything supporting + and *."""
        total = 0
        for e, c in self.terms.items():
            term = c
            for v, a in zip(self.vars, e):
                if a:
                    term = term * (point[v] ** a)
            total = total + term
        return total

    def substitute(self, mapping: Mapping[str, "MultiPoly"]) -> "MultiPoly":
        """Substitute polynomials (all over one common variable list) for variables."""
        target = next(iter(mapping.values()))
        result = MultiPoly(target.vars, {}, target.p)
        for e, c in self.terms.items():
            term = MultiPoly.const(target.vars, c, target.p)
            for v, a in zip(self.vars, e):
                if a:
                    if v in mapping:
                        term = term * mapping[v] ** a
                    else:
                        term = term * MultiPoly.var(target.vars, v, target.p) ** a
            result = result + term
        return result

    def rename(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-express over a larger (or reordered) variable list."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.vars]
        t = {}
        for e, c in self.terms.items():
            f = [0] * len(variables)
            for i, a in zip(idx, e):
                f[i] = a
            t[tuple(f)] = c
        out = MultiPoly.__new__(MultiPoly)
        out.vars, out.p, out.terms = variables, self.p, t
        return out

    def reduce_mod(self, p: int) -> "MultiPoly":
        if self.p is not None:
            raise TypeError("polynomial already over a prime field")
        return MultiPoly(self.vars, {e: ring_coerce(c, p) for e, c in self.terms.items()}, p)

    def univariate_coeffs(self) -> list:
        if len(self.vars) != 1:
            raise ValueError("not a univariate polynomial")
        d = self.degree()
        out = [0 if self.p is not None else Fraction(0)] * (d + 1)
        for (e,), c in self.terms.items():
            out[e] = c
        return out

    def sorted_terms(self):
        """Terms in descending lexicographic exponent order (deterministic output)."""
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "prime": self.p,
            "terms": [[list(e), rat_str(c) if self.p is None else int(c)]
                      for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        p = data.get("prime")
        return cls(data["vars"], {tuple(e): (Fraction(c) if p is None else int(c))
                                  for e, c in data["terms"]}, p)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(v if a == 1 else f"{v}^{a}" for v, a in zip(self.vars, e) if a)
            cs = rat_str(c) if self.p is None else str(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"({cs})*{mono}" if "/" in cs else f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        ring = "Q" if self.p is None else f"F_{self.p}"
        return f"MultiPoly[{','.join(self.vars)} over {ring}]({self})"


# ---------------------------------------------------------------------------
# combinatorial coefficients


def binom(n: int, k: int) -> int:
    """Binomial coefficient, 0 outside 0 <= k <= n (n >= 0)."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def gen_binom(a, k: int):
    """binom(a, k) for rational a and integer k >= 0."""
    a = as_rat(a)
    if k < 0:
        return Fraction(0)
    out = Fraction(1)
    for i in range(k):
        out = out * (a - i) / (i + 1)
    return out


@dataclass(frozen=True)
class FactorialRatioSpec:
    """prod (a_i n)! / prod (b_j n)! with sum a_i == sum b_j."""

    num: tuple
    den: tuple

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(int(a) for a in self.num))
        object.__setattr__(self, "den", tuple(int(b) for b in self.den))
        if any(a <= 0 for a in self.num + self.den):
            raise ValueError("factorial multipliers must be positive")
        if sum(self.num) != sum(self.den):
            raise ValueError(
                f"unbalanced factorial ratio: sum {sum(self.num)} over {sum(self.den)}")


def factorial_ratio(spec: FactorialRatioSpec, n: int) -> Fraction:
    num = math.prod(math.factorial(a * n) for a in spec.num)
    den = math.prod(math.factorial(b * n) for b in spec.den)
    return Fraction(num, den)


@dataclass(frozen=True)
class HypergeomCoeffSpec:
    """Coefficients of pFq(upper; lower; scale * x), i.e. rho(n) with rho(0) = 1."""

    upper: tuple
    lower: tuple
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(as_rat(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(as_rat(b) for b in self.lower))
        object.__setattr__(self, "scale", as_rat(self.scale))
        for b in self.lower:
            if b.denominator == 1 and b <= 0:
                raise ValueError(f"lower parameter {b} is a non-positive integer (pole)")

    def ratio(self, n: int) -> Fraction:
        """rho(n+1)/rho(n); the trailing 1/(n+1) accounts for the n! of the series."""
        num = math.prod((a + n for a in self.upper), start=Fraction(1))
        den = math.prod((b + n for b in self.lower), start=Fraction(1)) * (n + 1)
        return num * self.scale / den


def hypergeom_coeffs(spec: HypergeomCoeffSpec, N: int) -> list:
    out = [Fraction(1)]
    for n in range(N):
        out.append(out[-1] * spec.ratio(n))
    return out


def hypergeom_coeff(spec: HypergeomCoeffSpec, n: int) -> Fraction:
    return hypergeom_coeffs(spec, n)[n]


@dataclass(frozen=True)
class ScanReport:
    all_integer: bool
    first_failure: int | None
    tested: int


def integrality_scan(spec, N: int) -> ScanReport:
    """Check that the n-th coefficient is an integer for every n <= N."""
    if isinstance(spec, HypergeomCoeffSpec):
        values: Iterable = enumerate(hypergeom_coeffs(spec, N))
    elif isinstance(spec, FactorialRatioSpec):
        values = ((n, factorial_ratio(spec, n)) for n in range(N + 1))
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    for n, v in values:
        if v.denominator != 1:
            return ScanReport(False, n, N)
    return ScanReport(True, None, N)
