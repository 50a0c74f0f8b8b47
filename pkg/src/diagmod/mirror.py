"""Nome, mirror map, Yukawa couplings and determinantal invariants.

All determinants are taken in theta-form: W_m(theta) = det[theta^j y_i] for
0 <= i, j < m, which relates to the D_x determinants by
W_m = x^(-m(m-1)/2) * W_m(theta).  Every invariant used here (K, K*, K_n) is
homogeneous of weight zero in that factor, so the theta versions give the
same series while staying inside power series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dfinite import (DiffOp, LogSolutionBasis, PreconditionError, _shift_theta, frobenius_solutions,
                      padd, pderiv, pmul, pscale, ptrim)
from .series import PullbackSpec, UniSeries


class InvariantBreach(ArithmeticError):
    """Two independent computations that must agree did not."""


def _basis(L_or_basis, N: int) -> LogSolutionBasis:
    if isinstance(L_or_basis, LogSolutionBasis):
        return L_or_basis
    return frobenius_solutions(L_or_basis, N)


def nome(L, N: int) -> UniSeries:
    """q = x * exp(y~1 / y0)."""
    b = _basis(L, N)
    if b.order < 2:
        raise PreconditionError("the nome needs an operator of order at least 2")
    e = (b.parts[1] / b.parts[0]).exp()
    return e.shift(1).truncate(N)


def mirror_map(L, N: int) -> UniSeries:
    return nome(L, N).reversion()


def _det(M: list) -> UniSeries:
    """Laplace expansion along the first row; sizes here are at most 6."""
    n = len(M)
    if n == 1:
        return M[0][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class WronskianSet:
    """W_m(theta) = det[theta^j y_i]_{i,j<m}; W_m = x^(-m(m-1)/2) W_m(theta)."""

    W: tuple
    rho: int = 0

    def __getitem__(self, m: int) -> UniSeries:
        return self.W[m - 1]

    def __len__(self):
        return len(self.W)

    @staticmethod
    def x_power(m: int) -> int:
        return -m * (m - 1) // 2


def wronskians(L, N: int) -> WronskianSet:
    """Determinantal variables of the log-graded basis.

    Each W_m is free of logarithms, so it equals the determinant of the
    log-free parts of the entries.  The common factor x^rho of a shifted
    basis is left out; it cancels in every invariant.
    """
    b = _basis(L, N)
    r = b.order
    sols = [b.gauged_solution(j) for j in range(r)]
    ths = []
    for s in sols:
        row = [s]
        for _ in range(r - 1):
            row.append(row[-1].theta())
        ths.append([t.parts[0] for t in row])
    W = []
    for m in range(1, r + 1):
        M = [[ths[i][j] for i in range(m)] for j in range(m)]
        W.append(_det(M))
    return WronskianSet(tuple(W), b.rho)


def theta_q(f: UniSeries) -> UniSeries:
    return f.theta()


@dataclass(frozen=True)
class YukawaData:
    K_q: UniSeries
    K_star_q: UniSeries | None
    K_x: UniSeries
    K_star_x: UniSeries | None
    K_direct_q: UniSeries
    kn: dict = field(default_factory=dict)

    @staticmethod
    def exponents(n: int):
        return n * (n - 2), n * (n - 1) // 2


def _k3_x(W: WronskianSet) -> UniSeries:
    return W[1] ** 3 * W[3] / W[2] ** 3


def _kstar_x(W: WronskianSet) -> UniSeries:
    return W[1] * W[3] ** 3 / (W[4] * W[2] ** 3)


def yukawa_direct(L, N: int) -> UniSeries:
    """K(q) = (q d/dq)^2 (y2/y0), through the nome.

    With t = ln q one has y2/y0 = t^2/2 + g where g = y~2/y0 - (y~1/y0)^2/2,
    so K = 1 + (q d/dq)^2 g(x(q)).
    """
    b = _basis(L, N)
    if b.order < 3:
        raise PreconditionError("the Yukawa coupling needs order at least 3")
    y0, y1, y2 = b.parts[:3]
    g = y2 / y0 - (y1 / y0) ** 2 * Fraction(1, 2)
    xq = nome(b, N).reversion()
    gq = g.compose(xq)
    return UniSeries.one(N) + gq.theta().theta()


def yukawa(L, N: int) -> YukawaData:
    """K via (q d/dq)^2(y2/y0) and via W1^3 W3 / W2^3, agreement enforced."""
    b = _basis(L, N)
    W = wronskians(b, N)
    Kx = _k3_x(W)
    xq = nome(b, N).reversion()
    Kq = Kx.compose(xq)
    direct = yukawa_direct(b, N)
    if not Kq.agrees(direct):
        raise InvariantBreach("direct and determinantal Yukawa couplings differ")
    Ksx = Ksq = None
    if b.order == 4 and isinstance(L, DiffOp):
        Ksx = _kstar_x(W)
        Ksq = _kstar_q(L, Ksx, N)
    return YukawaData(Kq, Ksq, Kx, Ksx, direct, kn_invariants(b, N, W))


def _kstar_q(L: DiffOp, Ksx: UniSeries, N: int) -> UniSeries:
    # K* is the Yukawa coupling of the adjoint, so it is expanded in the
    # adjoint's own nome; the two nomes only coincide when L is conjugated
    # to its adjoint by a function.
    adj = frobenius_solutions(L.adjoint(), N)
    Ksq = Ksx.compose(nome(adj, N).reversion())
    if not Ksq.agrees(yukawa_direct(adj, N)):
        raise InvariantBreach("W1 W3^3/(W4 W2^3) differs from the adjoint's Yukawa coupling")
    return Ksq


def yukawa_adjoint(L: DiffOp, N: int) -> UniSeries:
    """K*(q) = W1 W3^3 / (W4 W2^3), expanded in the nome of adjoint(L)."""
    if L.order != 4:
        raise PreconditionError("the adjoint Yukawa coupling is defined for order four")
    W = wronskians(L, N)
    return _kstar_q(L, _kstar_x(W), N)


def kn_invariants(L, N: int, W: WronskianSet | None = None) -> dict:
    """K_m = W1^(m(m-2)) W_m / W2^(m(m-1)/2) for 3 <= m <= order, as series in x."""
    if W is None:
        W = wronskians(L, N)
    out = {}
    for m in range(3, len(W) + 1):
        a, bexp = YukawaData.exponents(m)
        out[m] = W[1] ** a * W[m] / W[2] ** bexp
    return out


def check_condmagic(L, N: int) -> bool:
    """W3^2 = W4 W1^2 (theta-form weights agree: 6 = 6 + 0)."""
    W = wronskians(L, N)
    if len(W) != 4:
        raise PreconditionError("condition is stated for order-four operators")
    return (W[3] ** 2).agrees(W[4] * W[1] ** 2)


# ---------------------------------------------------------------------------
# pullbacks of operators


def _rat_add(a, b):
    (n1, d1), (n2, d2) = a, b
    if d1 == d2:
        return padd(n1, n2), d1
    return padd(pmul(n1, d2), pmul(n2, d1)), pmul(d1, d2)


def _poly_gcd(a, b):
    a, b = ptrim([Fraction(x) for x in a]), ptrim([Fraction(x) for x in b])
    while b:
        # a mod b
        r = list(a)
        while len(r) >= len(b) and r:
            f = r[-1] / b[-1]
            k = len(r) - len(b)
            for i, c in enumerate(b):
                r[i + k] -= f * c
            r = ptrim(r)
        a, b = b, r
    return [c / a[-1] for c in a] if a else [Fraction(1)]


def _poly_div(a, b):
    a = [Fraction(x) for x in a]
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b) and ptrim(r):
        k = len(r) - len(b)
        f = r[-1] / b[-1]
        q[k] = f
        for i, c in enumerate(b):
            r[i + k] -= f * c
        r = ptrim(r)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return ptrim(q)


def pullback_operator(L: DiffOp, num, den) -> DiffOp:
    """Operator annihilating y(p(x)) for every solution y of L, p = num/den."""
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    # p' = u / den^2
    u = padd(pmul(pderiv(num), den), pscale(pmul(num, pderiv(den)), -1))
    den2 = pmul(den, den)
    # D_X^k written as (1/c_k) sum_j e_{k,j} D_x^j, with D_X = (den^2/u) D_x
    powers = [([[Fraction(1)]], [Fraction(1)])]
    for _ in range(L.order):
        e, c = powers[-1]
        # D_x o (1/c) sum e_j D^j = (1/c^2) sum [(e_j' c - e_j c') D^j + e_j c D^(j+1)]
        dc = pderiv(c)
        new = [[] for _ in range(len(e) + 1)]
        for j, ej in enumerate(e):
            new[j] = padd(new[j], padd(pmul(pderiv(ej), c), pscale(pmul(ej, dc), -1)))
            new[j + 1] = padd(new[j + 1], pmul(ej, c))
        new = [pmul(den2, t) for t in new]
        cc = pmul(pmul(c, c), u)
        g = cc
        for t in new:
            if t:
                g = _poly_gcd(g, t)
        if len(g) > 1:
            new = [_poly_div(t, g) if t else [] for t in new]
            cc = _poly_div(cc, g)
        powers.append((new, cc))
    # a_k(p(x)) = A_k(num, den) / den^deg
    terms = []
    for k, ak in enumerate(L.a):
        if not ak:
            continue
        d = len(ak) - 1
        top = [Fraction(0)]
        for i, c in enumerate(ak):
            if c:
                t = [Fraction(c)]
                for _ in range(i):
                    t = pmul(t, num)
                for _ in range(d - i):
                    t = pmul(t, den)
                top = padd(top, t)
        bottom = [Fraction(1)]
        for _ in range(d):
            bottom = pmul(bottom, den)
        e, c = powers[k]
        terms.append(([pmul(top, ej) for ej in e], pmul(bottom, c)))
    # common denominator
    common = [Fraction(1)]
    for _, c in terms:
        g = _poly_gcd(common, c)
        common = pmul(common, _poly_div(c, g))
    out = [[] for _ in range(L.order + 1)]
    for e, c in terms:
        mult = _poly_div(common, c)
        for j, ej in enumerate(e):
            out[j] = padd(out[j], pmul(ej, mult))
    g = []
    for t in out:
        if t:
            g = t if not g else _poly_gcd(g, t)
    if len(g) > 1:
        out = [_poly_div(t, g) if t else [] for t in out]
    return DiffOp(out).normalized()


@dataclass(frozen=True)
class CovarianceReport:
    wronskians: tuple
    nome: bool
    yukawa: bool

    @property
    def ok(self) -> bool:
        return all(self.wronskians) and self.nome and self.yukawa


def check_pullback_covariance(L: DiffOp, pb: PullbackSpec, N: int, num=None, den=None,
                              Lp: DiffOp | None = None) -> CovarianceReport:
    """W_m -> (p'/r)^(m(m-1)/2) W_m(p), lambda Q^r = q(p), K(q) -> K(lambda Q^r).

    The pulled-back operator is built from num/den (p = num/den) unless given,
    and its own Frobenius basis is compared with the substituted one.
    """
    if pb.lam != 1:
        raise PreconditionError("covariance of the normalized basis needs lambda = 1")
    if Lp is None:
        if num is None and pb.rational_form is not None:
            num, den = pb.rational_form
        if num is None:
            raise PreconditionError("a rational pullback num/den is required")
        Lp = pullback_operator(L, num, den)
    r = pb.r
    M = N + r
    p = pb.series(M * r + 2)
    W = wronskians(L, M * r + 2)
    Wp = wronskians(Lp, N)
    # theta-form factor (x p' / (r p))
    unit = (p.deriv().shift(1 - r) / p.shift(-r)).scale(Fraction(1, r)).truncate(N)
    checks = []
    for m in range(1, len(W) + 1):
        e = m * (m - 1) // 2
        expect = (unit ** e) * W[m].compose(p.truncate(N))
        checks.append(Wp[m].agrees(expect))
    q = nome(L, M * r + 2)
    Q = nome(Lp, N)
    nome_ok = (Q ** r).scale(pb.lam).agrees(q.compose(p.truncate(N)).truncate(N))
    yuk_ok = True
    if len(W) >= 3:
        K = _k3_x(W).compose(q.reversion())
        Kp = _k3_x(Wp).compose(Q.reversion())
        lamQr = UniSeries.monomial(r, N, coeff=pb.lam)
        yuk_ok = Kp.agrees(K.truncate(N).compose(lamQr).truncate(N))
    return CovarianceReport(tuple(checks), nome_ok, yuk_ok)


# ---------------------------------------------------------------------------
# integrality evidence


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _prime_factors(n: int) -> list:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class IntegralityReport:
    order: int
    primes: tuple  # ((p, first_order), ...)
    rescale: int | None
    verdict: str
    witness: tuple | None = None  # (p, order) when non-integral

    @property
    def integral(self) -> bool:
        return self.verdict == "integer-after-rescale"

    def to_json(self) -> dict:
        return {"order": self.order,
                "primes": [{"p": p, "first_order": n} for p, n in self.primes],
                "rescale": self.rescale,
                "verdict": self.verdict}


def integrality_report(f: UniSeries, M: int | None = None, calibration: int | None = None) -> IntegralityReport:
    """Fit a rescaling N on the first half of the orders, re-test through M.

    N = prod p^ceil(max v_p(den c_n)/n) over the calibration window.  Any
    denominator prime that only shows up after the window, or a coefficient
    that stays non-integral after rescaling, makes the verdict non-integral.
    """
    if f.p is not None:
        raise PreconditionError("integrality is tested on rational series")
    M = f.order if M is None else min(M, f.order)
    if calibration is None:
        calibration = max(1, M // 2)
    c0 = Fraction(f[0])
    if c0 == 0:
        raise PreconditionError("series must have a nonzero constant term")
    coeffs = [Fraction(f[n]) / c0 for n in range(M + 1)]
    first = {}
    ratio = {}
    for n in range(1, M + 1):
        d = coeffs[n].denominator
        if d == 1:
            continue
        for p in _prime_factors(d):
            first.setdefault(p, n)
            if n <= calibration:
                v = _vp(d, p)
                ratio[p] = max(ratio.get(p, 0), math.ceil(Fraction(v, n)))
    primes = tuple(sorted(first.items()))
    late = [(n, p) for p, n in first.items() if n > calibration]
    if late:
        n, p = min(late)
        return IntegralityReport(M, primes, None, "non-integral", (p, n))
    N = 1
    for p, e in ratio.items():
        N *= p**e
    for n in range(M + 1):
        if (coeffs[n] * N**n).denominator != 1:
            d = (coeffs[n] * N**n).denominator
            return IntegralityReport(M, primes, None, "non-integral", (_prime_factors(d)[0], n))
    return IntegralityReport(M, primes, N, "integer-after-rescale")
