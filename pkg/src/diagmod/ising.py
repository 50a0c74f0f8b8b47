"""The n-particle Ising susceptibility integrals as constant terms.

With z_k = exp(i phi_k) and z_0 = 1/(z_1 ... z_{n-1}), the integrand is

    A_k = 1 - w (z_k + 1/z_k),   y_k = (A_k^2 - 4w^2)^(-1/2),
    x_k = 2w / (A_k + (A_k^2 - 4w^2)^(1/2)),
    X = prod x_k,  Y = prod y_k,
    G = prod_{k<j} (2 - z_k/z_j - z_j/z_k) / (1 - x_k x_j)^2,
    F = Y X^(n-1) (1+X)/(1-X) G,

and chi~(n)(w) = (2w)^n / n! * CT_z[F].  Every factor except the bare
fermionic numerators is a balanced Laurent series (degree at most m in each
1/z_k at w^m), which is what makes the constant term a finite computation
order by order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from numpy.polynomial.chebyshev import cheb2poly

from .laurent import BalancedLaurentSeries, MembershipError, laurent_poly
from .series import PreconditionError, UniSeries

MAX_N = 4


def _check_n(n: int):
    if not 1 <= n <= MAX_N:
        raise PreconditionError(f"n must lie in 1..{MAX_N}, got {n}")


def _pick_method(method: str | None, modulus: int | None) -> str:
    if method is None:
        method = "sqrt" if modulus is None or modulus % 2 else "quadratic"
    if method not in ("sqrt", "quadratic"):
        raise ValueError(f"unknown method {method!r}")
    if method == "sqrt" and modulus is not None and modulus % 2 == 0:
        raise PreconditionError("the square-root route needs an odd modulus")
    return method


def _one_variable(order: int, bound: int, modulus: int | None, method: str):
    """A, v = x/w and y as one-variable members, checked after each step."""
    A = BalancedLaurentSeries.from_laurent(
        {(0, (0,)): 1, (1, (1,)): -1, (1, (-1,)): -1}, 1, order, bound, modulus)
    A.require_member("A")
    if method == "sqrt":
        # A^2 - 4w^2 = A^2 (1 - 4w^2/A^2): a perfect square times 1 + O(w^2)
        Ainv = A.inv().require_member("1/A")
        corr = (Ainv * Ainv).scale(-4).mul_w(2) + 1
        root = (A * corr.sqrt()).require_member("sqrt")
        y = root.inv().require_member("y")
        v = (A + root).inv().scale(2).require_member("x")
    else:
        # x = w u with u = (1 + w^2 u^2)/A, and sqrt(A^2 - 4w^2) = A - 2w^2 u
        Ainv = A.inv().require_member("1/A")
        v = Ainv
        for _ in range(order // 2 + 1):
            v = ((v * v).mul_w(2) + 1) * Ainv
        v.require_member("x")
        root = (A - v.mul_w(2).scale(2)).require_member("sqrt")
        y = root.inv().require_member("y")
    return A, v, y


def _fermion_numerator(n: int) -> dict:
    """prod_{k<j} (2 - z_k/z_j - z_j/z_k) with z_0 = 1/(z_1...z_{n-1})."""
    nz = n - 1
    unit = [tuple(1 if a == k - 1 else 0 for a in range(nz)) for k in range(1, n)]
    zs = [tuple(-1 for _ in range(nz))] + unit
    poly = {(0,) * nz: 1}
    for k in range(n):
        for j in range(k + 1, n):
            d = tuple(a - b for a, b in zip(zs[k], zs[j]))
            factor = {(0,) * nz: 2, d: -1, tuple(-a for a in d): -1}
            new: dict = {}
            for e1, c1 in poly.items():
                for e2, c2 in factor.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    new[e] = new.get(e, 0) + c1 * c2
            poly = {e: c for e, c in new.items() if c}
    return poly


def _slack_of(poly: dict, nz: int) -> int:
    return max([0] + [-e[i] for e in poly for i in range(nz)])


@dataclass
class ChiIntegrand:
    """All intermediate series of the integrand, kept for inspection."""

    n: int
    order: int
    modulus: int | None
    A: list = field(default_factory=list)
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    X: BalancedLaurentSeries | None = None
    Y: BalancedLaurentSeries | None = None
    ratio: BalancedLaurentSeries | None = None
    pairs: BalancedLaurentSeries | None = None
    G: BalancedLaurentSeries | None = None
    F: BalancedLaurentSeries | None = None

    def constant_term(self) -> UniSeries:
        return self.F.constant_term()


def build_integrand(n: int, N: int, modulus: int | None = None,
                    method: str | None = None) -> ChiIntegrand:
    """Integrand of chi~(n) accurate for chi~(n) through w^N.

    Rows are kept to relative order R = N - n^2 on every factor; the
    constant term of F is then known through w^(N - n).
    """
    _check_n(n)
    method = _pick_method(method, modulus)
    R = N - n * n
    if R < 0:
        raise PreconditionError(f"order {N} is below the valuation n^2 = {n * n}")
    nz = n - 1
    num = _fermion_numerator(n)
    bound = N - n + _slack_of(num, nz)
    # with no z left (n = 1) the lift evaluates at z = 1 and needs every term
    A1, v1, y1 = _one_variable(R, bound if nz else 2 * R + 2, modulus, method)

    def lift(s, k):
        return s.embed(nz, None if k == 0 else k - 1, bound)

    out = ChiIntegrand(n, N, modulus)
    out.A = [lift(A1, k).require_member(f"A_{k}") for k in range(n)]
    out.x = [lift(v1, k).mul_w(1).require_member(f"x_{k}") for k in range(n)]
    out.y = [lift(y1, k).require_member(f"y_{k}") for k in range(n)]

    X = out.x[0]
    Y = out.y[0]
    for k in range(1, n):
        X = X * out.x[k]
        Y = Y * out.y[k]
    out.X = X.require_member("X")
    out.Y = Y.require_member("Y")
    lead_X = X.leading()
    if lead_X != (n, {(0,) * nz: 1}):
        raise MembershipError("X", f"leading term {lead_X}, expected w^{n}")
    if Y.leading() != (0, {(0,) * nz: 1}):
        raise MembershipError("Y", "leading term is not 1")

    out.ratio = ((1 + X) * (1 - X).inv()).require_member("(1+X)/(1-X)")

    Q = None
    for k in range(n):
        for j in range(k + 1, n):
            q = 1 - out.x[k] * out.x[j]
            Q = q if Q is None else Q * q
    if Q is None:
        pairs = out.ratio.constant(1).truncate(R)
    else:
        Qi = Q.inv()
        pairs = Qi * Qi
    out.pairs = pairs.require_member("1/(1-x_k x_j)^2")
    numer = laurent_poly(num, nz, R, bound, modulus)
    # the bare numerators have 1/z-degree 2(n-1) at w^0, so G is not a member;
    # multiplying by X^(n-1) restores the balance
    out.G = numer * out.pairs

    XP = X ** (n - 1) if n > 1 else X.constant(1)
    F = out.Y * XP * out.ratio * out.G
    out.F = F.require_member("F")
    return out


def _normalize(ct: UniSeries, n: int, N: int) -> UniSeries:
    """(2w)^n / n! * CT, returned through w^N."""
    scale = Fraction(2**n, factorial(n))
    cs = [Fraction(0)] * (N + 1)
    for m, c in enumerate(ct.c):
        if m + n <= N:
            cs[m + n] = scale * c
    return UniSeries(cs, N, var="w")


def chi_tilde(n: int, N: int, method: str | None = None) -> UniSeries:
    """chi~(n)(w) through w^N, exact."""
    ct = build_integrand(n, N, None, method).constant_term()
    return _normalize(ct, n, N)


def chi_normalized_mod(n: int, N: int, m: int, method: str | None = None) -> UniSeries:
    """chi~(n) / 2^n through w^N modulo m, as a series over Z/m.

    The constant term is computed modulo m * n!; it is divisible by n!, so the
    quotient is the true residue.
    """
    M = m * factorial(n)
    ct = build_integrand(n, N, M, method).constant_term()
    f = factorial(n)
    cs = [0] * (N + 1)
    for k, c in enumerate(ct.c):
        c = int(c) % M
        if c % f:
            raise PreconditionError(f"constant term at w^{k} not divisible by {n}!")
        if k + n <= N:
            cs[k + n] = c // f % m
    return UniSeries(cs, N, p=m if _is_prime_modulus(m) else None, var="w")


def _is_prime_modulus(m: int) -> bool:
    return m > 1 and all(m % d for d in range(2, int(m**0.5) + 1))


# ---------------------------------------------------------------------------
# termwise oracle


def _catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


class _Sparse:
    """Dict-backed truncated series: {(m, e): c} with m <= top, e_i + m <= bound."""

    def __init__(self, terms, top, bound):
        self.top, self.bound = top, bound
        self.t = {k: c for k, c in terms.items()
                  if c and k[0] <= top and all(e + k[0] <= bound for e in k[1])}

    def __mul__(self, other):
        out: dict = {}
        for (m1, e1), c1 in self.t.items():
            for (m2, e2), c2 in other.t.items():
                m = m1 + m2
                if m > self.top:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                if any(a + m > self.bound for a in e):
                    continue
                out[(m, e)] = out.get((m, e), 0) + c1 * c2
        return _Sparse(out, self.top, self.bound)

    def __add__(self, other):
        out = dict(self.t)
        for k, c in other.t.items():
            out[k] = out.get(k, 0) + c
        return _Sparse(out, self.top, self.bound)

    def scale(self, c):
        return _Sparse({k: v * c for k, v in self.t.items()}, self.top, self.bound)


def _explicit(kind: str, top: int, bound: int, direction: tuple) -> _Sparse:
    """x or y from their binomial expansions, with z replaced by z^direction.

    x = sum_k Cat_k w^(2k+1) A^-(2k+1) and y = sum_k C(2k,k) w^(2k) A^-(2k+1),
    A^-j = sum_l C(j+l-1, l) w^l (z + 1/z)^l.
    """
    terms: dict = {}
    for k in range(top // 2 + 1):
        c = _catalan(k) if kind == "x" else comb(2 * k, k)
        base = 2 * k + 1 if kind == "x" else 2 * k
        j = 2 * k + 1
        for l in range(top - base + 1):
            cl = c * comb(j + l - 1, l)
            for i in range(l + 1):
                e = tuple((l - 2 * i) * d for d in direction)
                key = (base + l, e)
                terms[key] = terms.get(key, 0) + cl * comb(l, i)
    return _Sparse(terms, top, bound)


def chi_tilde_termwise(n: int, N: int) -> UniSeries:
    """Reference chi~(n) from explicit binomial expansions and dict arithmetic.

    Shares no code with :func:`chi_tilde` beyond the fermionic numerator; the
    geometric and squared-geometric factors are expanded term by term.
    """
    _check_n(n)
    nz = n - 1
    num = _fermion_numerator(n)
    top = N - n
    bound = top + _slack_of(num, nz)
    dirs = [tuple(1 for _ in range(nz))] + [tuple(1 if a == k - 1 else 0 for a in range(nz))
                                           for k in range(1, n)]
    xs = [_explicit("x", top, bound, d) for d in dirs]
    ys = [_explicit("y", top, bound, d) for d in dirs]
    one = _Sparse({(0, (0,) * nz): 1}, top, bound)
    X, Y = one, one
    for k in range(n):
        X, Y = X * xs[k], Y * ys[k]
    # (1+X)/(1-X) = 1 + 2 sum_{i>=1} X^i
    ratio, power = one, one
    for _ in range(top // n):
        power = power * X
        ratio = ratio + power.scale(2)
    F = Y * ratio
    for _ in range(n - 1):
        F = F * X
    for k in range(n):
        for j in range(k + 1, n):
            p = xs[k] * xs[j]
            # (1 - p)^-2 = sum (i+1) p^i
            acc, pw = one, one
            for i in range(1, top // 2 + 1):
                pw = pw * p
                acc = acc + pw.scale(i + 1)
            F = F * acc
    ct = [0] * (top + 1)
    for (m, e), c in F.t.items():
        for eg, cg in num.items():
            if all(a + b == 0 for a, b in zip(e, eg)):
                ct[m] += c * cg
    return _normalize(UniSeries(ct, top, var="w"), n, N)


# ---------------------------------------------------------------------------
# sign variants


class _Cone:
    """Laurent series in (z1, z2) expanded along a weight direction.

    A term z^e has weight <a, e>; series are bounded below in weight and
    truncated above ``cap``.  Inverting a Laurent polynomial expands around
    its unique lowest-weight monomial, which amounts to integrating over the
    torus |z_i| = exp(-eps a_i) for a small eps > 0.
    """

    def __init__(self, a: tuple, cap: int):
        self.a, self.cap = a, cap

    def weight(self, e) -> int:
        return self.a[0] * e[0] + self.a[1] * e[1]

    @staticmethod
    def add(x: dict, y: dict, c=1) -> dict:
        r = dict(x)
        for e, v in y.items():
            t = r.get(e, 0) + c * v
            if t:
                r[e] = t
            else:
                r.pop(e, None)
        return r

    def mul(self, x: dict, y: dict, cap: int | None = None) -> dict:
        cap = self.cap if cap is None else cap
        r: dict = {}
        wy = [(e, v, self.weight(e)) for e, v in y.items()]
        for e1, v1 in x.items():
            w1 = self.weight(e1)
            for e2, v2, w2 in wy:
                if w1 + w2 <= cap:
                    e = (e1[0] + e2[0], e1[1] + e2[1])
                    r[e] = r.get(e, 0) + v1 * v2
        return {e: v for e, v in r.items() if v}

    def inv(self, x: dict) -> dict:
        lo = min(self.weight(e) for e in x)
        leads = [e for e in x if self.weight(e) == lo]
        if len(leads) != 1:
            raise PreconditionError(f"direction {self.a} is not generic for {sorted(leads)}")
        e0 = leads[0]
        c0 = Fraction(x[e0])
        rest = {(e[0] - e0[0], e[1] - e0[1]): -v / c0 for e, v in x.items() if e != e0}
        acc = {(0, 0): Fraction(1)}
        term = dict(acc)
        while True:
            term = self.mul(term, rest, self.cap + lo)
            if not term:
                break
            acc = self.add(acc, term)
        return {(e[0] - e0[0], e[1] - e0[1]): v / c0 for e, v in acc.items()}


class _WSeries:
    """Laurent series in w with _Cone coefficients, ``len(cs)`` terms from ``val``."""

    def __init__(self, val: int, cs: list):
        self.val, self.cs = val, cs

    @property
    def top(self) -> int:
        return self.val + len(self.cs) - 1

    def scaled(self, c, shift: int = 0) -> "_WSeries":
        return _WSeries(self.val + shift, [{e: c * v for e, v in x.items()} for x in self.cs])

    def normalized(self) -> "_WSeries":
        i = 0
        while i < len(self.cs) and not self.cs[i]:
            i += 1
        return _WSeries(self.val + i, self.cs[i:])


def _w_add(f: _WSeries, g: _WSeries, c=1) -> _WSeries:
    top, val = min(f.top, g.top), min(f.val, g.val)
    cs: list = [{} for _ in range(top - val + 1)]
    for s, k in ((f, 1), (g, c)):
        for i, x in enumerate(s.cs):
            m = s.val + i
            if m <= top:
                cs[m - val] = _Cone.add(cs[m - val], x, k)
    return _WSeries(val, cs)


def _w_mul(ring: _Cone, f: _WSeries, g: _WSeries) -> _WSeries:
    L = min(len(f.cs), len(g.cs))
    cs: list = [{} for _ in range(L)]
    for i in range(L):
        if not f.cs[i]:
            continue
        for j in range(L - i):
            if g.cs[j]:
                cs[i + j] = _Cone.add(cs[i + j], ring.mul(f.cs[i], g.cs[j]))
    return _WSeries(f.val + g.val, cs)


def _w_inv(ring: _Cone, f: _WSeries) -> _WSeries:
    f = f.normalized()
    if not f.cs:
        raise PreconditionError("inverting a series that vanishes to the working order")
    c0 = ring.inv(f.cs[0])
    g = [c0]
    for k in range(1, len(f.cs)):
        s: dict = {}
        for j in range(1, k + 1):
            if f.cs[j] and g[k - j]:
                s = _Cone.add(s, ring.mul(f.cs[j], g[k - j]))
        g.append({e: -v for e, v in ring.mul(c0, s).items()})
    return _WSeries(-f.val, g)


def _w_sqrt(ring: _Cone, f: _WSeries) -> _WSeries:
    if f.val != 0 or f.cs[0] != {(0, 0): 1}:
        raise PreconditionError("square root needs constant term 1")
    g = [{(0, 0): Fraction(1)}]
    for k in range(1, len(f.cs)):
        s = dict(f.cs[k])
        for j in range(1, k):
            s = _Cone.add(s, ring.mul(g[j], g[k - j]), -1)
        g.append({e: v / 2 for e, v in s.items()})
    return _WSeries(0, g)


def chi_sign_variant(n: int, signs: tuple, N: int, direction: tuple = (1, -3),
                     weight_cap: int | None = None, normalized: bool = True) -> UniSeries:
    """chi~(3) with the square root in x_k (and y_k) negated where signs[k] = -1.

    Negating the root sends x_k to 1/x_k and y_k to -y_k.  The pair factors
    then have poles on the unit torus, so the constant term is taken on the
    displaced torus selected by ``direction`` (see :class:`_Cone`).  Different
    chambers of directions give different solutions.  With ``normalized`` the
    series is divided by its leading coefficient.
    """
    if n != 3:
        raise PreconditionError(f"sign variants are implemented for n = 3 only, got {n}")
    signs = tuple(signs)
    if len(signs) != 3 or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be three entries of +1 or -1")
    if all(s == 1 for s in signs):
        out = chi_tilde(3, N)
    else:
        L = N + 1
        ring = _Cone(tuple(direction), 4 * L if weight_cap is None else weight_cap)
        zs = [(-1, -1), (1, 0), (0, 1)]
        pad = [{} for _ in range(L + 4)]

        def const(c, val=0):
            return _WSeries(val, [c] + pad[: L + 3])

        xs, ys = [], []
        for k, s in enumerate(signs):
            e = zs[k]
            A = _WSeries(0, [{(0, 0): Fraction(1)}, {e: Fraction(-1), (-e[0], -e[1]): Fraction(-1)}]
                         + pad[: L - 2])
            rad = _w_add(_w_mul(ring, A, A), const({(0, 0): Fraction(4)}, 2), -1)
            root = _w_sqrt(ring, _WSeries(0, rad.cs[:L]))
            if s == 1:
                xs.append(_w_inv(ring, _w_add(A, root)).scaled(2, 1))
                ys.append(_w_inv(ring, root))
            else:
                xs.append(_w_add(A, root).scaled(Fraction(1, 2), -1))
                ys.append(_w_inv(ring, root.scaled(-1)))
        one = const({(0, 0): Fraction(1)})
        X = _w_mul(ring, _w_mul(ring, xs[0], xs[1]), xs[2])
        Y = _w_mul(ring, _w_mul(ring, ys[0], ys[1]), ys[2])
        ratio = _w_mul(ring, _w_add(one, X), _w_inv(ring, _w_add(one, X, -1)))
        F = _w_mul(ring, _w_mul(ring, Y, _w_mul(ring, X, X)), ratio)
        for k in range(3):
            for j in range(k + 1, 3):
                d = (zs[k][0] - zs[j][0], zs[k][1] - zs[j][1])
                num = const({(0, 0): Fraction(2), d: Fraction(-1), (-d[0], -d[1]): Fraction(-1)})
                qi = _w_inv(ring, _w_add(one, _w_mul(ring, xs[k], xs[j]), -1))
                F = _w_mul(ring, F, _w_mul(ring, num, _w_mul(ring, qi, qi)))
        F = F.normalized()
        if F.val + 3 < 0 or F.top + 3 < N:
            raise PreconditionError(f"working order too small: known through w^{F.top + 3}")
        cs = [Fraction(0)] * (N + 1)
        for i, c in enumerate(F.cs):
            m = F.val + 3 + i
            if m <= N:
                cs[m] = Fraction(8, 6) * c.get((0, 0), 0)
        out = UniSeries(cs, N, var="w")
    if normalized:
        v = out.valuation()
        if v is not None:
            lead = out.c[v]
            out = UniSeries([c / lead for c in out.c], N, var="w")
    return out


# ---------------------------------------------------------------------------
# the simple integrals Phi_D


@dataclass(frozen=True)
class PhiDSpec:
    """The algebraic function in (w, t) whose diagonal is Phi_D^(n).

    2/n! (1-t^2)^(-1/2) G F^(n-1) / (G F^(n-1) - (2wt)^n) - 1/n! with
    F = 1 - 2w + (1 - 4w + 4w^2 - 4w^2 t^2)^(1/2) and
    G = B + (B^2 - 4w^2 t^2)^(1/2), B = 1 - 2w t T_(n-1)(1/t).
    """

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    def chebyshev_term(self) -> dict:
        """t T_(n-1)(1/t) as {exponent of t: coefficient}."""
        coeffs = [int(round(c)) for c in cheb2poly([0] * (self.n - 1) + [1])]
        return {1 - j: c for j, c in enumerate(coeffs) if c}

    @property
    def rate(self) -> int:
        return max(1, self.n - 2)


def phiD_series(n: int, N: int) -> UniSeries:
    """Phi_D^(n)(w) through w^N: the coefficients of (w t)^m of PhiDSpec(n)."""
    spec = PhiDSpec(n)
    r = spec.rate
    bound = (r + 1) * N

    def poly(terms):
        return BalancedLaurentSeries.from_laurent(terms, 1, N, bound, None, [0], r)

    t2 = {(2, (2,)): -4}
    Frad = poly({(0, (0,)): 1, (1, (0,)): -4, (2, (0,)): 4, **t2})
    Fn = poly({(0, (0,)): 1, (1, (0,)): -2}) + Frad.sqrt()
    B = poly({(0, (0,)): 1, **{(1, (e,)): -2 * c for e, c in spec.chebyshev_term().items()}})
    Gn = B + (B * B + poly(t2)).sqrt()
    GF = Gn * (Fn ** (n - 1) if n > 1 else Fn.constant(1))
    denom = GF - poly({(n, (n,)): 2**n})
    # (1 - t^2)^(-1/2) = sum C(2k, k) (t/2)^(2k)
    half = poly({(0, (2 * k,)): Fraction(comb(2 * k, k), 4**k) for k in range(bound // 2 + 1)})
    H = half * GF * denom.inv()
    H.require_member("Phi_D integrand")
    scale = Fraction(2, factorial(n))
    cs = [Fraction(0)] * (N + 1)
    for (m, e), c in H.laurent_terms().items():
        if m <= N and e == (m,):
            cs[m] += scale * c
    cs[0] -= Fraction(1, factorial(n))
    return UniSeries(cs, N, var="w")
