"""Series in w whose coefficients are Laurent polynomials in z_1..z_k.

The membership class used for constant-term extraction consists of series
sum_m P_m(z) w^m where every P_m has degree at most m in each 1/z_i.  Such a
series becomes an ordinary Taylor series after the monomial change
w^m z^e -> s^m t^(e+m), so it is stored densely in the lifted exponents.

A ``slack`` kappa_i >= 0 widens the stored window to e_i >= -m - kappa_i.  This
lets non-members (the fermionic factor of the Ising integrand, say) be
represented, and makes membership an explicit predicate: the slice of lifted
exponents below kappa must vanish.

More generally a ``rate`` r allows degree r*m in each 1/z_i at w^m; the
Ising integrand uses r = 1.

Index layout: ``data[i, j_1, .., j_k]`` is the coefficient of
``w^m * prod z_l^(j_l - r*m - kappa_l)`` with m = val + i; rows i = 0..order.  Lifted
exponents above ``bound`` are dropped.  That truncation is harmless as long as
``bound`` is at least (largest w-exponent needed) + (slack of the final
product), because lifted exponents only grow under multiplication.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Mapping

import gmpy2
import numpy as np
from scipy import fft

from .arith import ring_coerce
from .series import PreconditionError, UniSeries, pack_signed, unpack_signed


class MembershipError(PreconditionError):
    """A series left the balanced class; ``component`` names the culprit."""

    def __init__(self, component: str, detail: str = ""):
        self.component = component
        msg = f"component {component!r} is not a balanced Laurent series"
        super().__init__(msg + (f": {detail}" if detail else ""))


def _exact(c):
    """Rational entry, stored as a plain int when integral."""
    c = ring_coerce(c, None)
    return int(c) if c.denominator == 1 else c


def _bigmul(a: int, b: int) -> int:
    return int(gmpy2.mpz(a) * gmpy2.mpz(b))


def _exact_conv(a: np.ndarray, b: np.ndarray, rows: int, bound: int) -> np.ndarray:
    """Truncated product of two object arrays via one big-integer multiplication."""
    nz = a.ndim - 1
    da = lcm(1, *(getattr(v, "denominator", 1) for v in a.flat))
    db = lcm(1, *(getattr(v, "denominator", 1) for v in b.flat))
    ia = [int(v * da) for v in a.flat] if da != 1 else [int(v) for v in a.flat]
    ib = [int(v * db) for v in b.flat] if db != 1 else [int(v) for v in b.flat]
    ma = max(map(abs, ia), default=0)
    mb = max(map(abs, ib), default=0)
    out_shape = (rows,) + (bound + 1,) * nz
    if ma == 0 or mb == 0:
        return np.full(out_shape, 0, dtype=object)
    width = 2 * bound + 1
    pad = (rows,) + (width,) * nz

    def packed(flat, arr):
        buf = np.zeros(pad, dtype=object)
        src = np.array(flat, dtype=object).reshape(arr.shape)[:rows]
        buf[tuple(slice(0, s) for s in src.shape)] = src
        return buf.ravel().tolist()

    terms = min(a.size, b.size)
    nbytes = (ma.bit_length() + mb.bit_length() + terms.bit_length() + 2 + 7) // 8
    pa = pack_signed(packed(ia, a), nbytes)
    pb = pack_signed(packed(ib, b), nbytes)
    count = rows * width**nz
    flat = unpack_signed(_bigmul(pa, pb), nbytes, count)
    res = np.array(flat, dtype=object).reshape(pad)
    res = res[(slice(None),) + (slice(0, bound + 1),) * nz]
    d = da * db
    if d != 1:
        res = np.vectorize(lambda v: Fraction(v, d) if v % d else v // d, otypes=[object])(res)
    return res


_FLOAT_EXACT = 2.0**50


def _mod_conv(a: np.ndarray, b: np.ndarray, rows: int, bound: int, M: int) -> np.ndarray:
    """Truncated product modulo M with float FFTs on balanced residues."""
    half = M // 2
    a = a[:rows]
    b = b[:rows]
    terms = min(np.count_nonzero(a), np.count_nonzero(b))
    if terms * float(half) ** 2 >= _FLOAT_EXACT:
        # split into base-B digits so every partial product stays exact
        B = int(np.ceil(np.sqrt(M)))
        a0, a1 = a % B, a // B
        b0, b1 = b % B, b // B
        lo = _fft_conv(a0, b0, rows, bound)
        mid = _fft_conv(a0, b1, rows, bound) + _fft_conv(a1, b0, rows, bound)
        hi = _fft_conv(a1, b1, rows, bound)
        out = (lo % M + (mid % M) * B % M + (hi % M) * (B * B % M)) % M
        return out.astype(np.int64)
    sa = np.where(a > half, a - M, a)
    sb = np.where(b > half, b - M, b)
    return _fft_conv(sa, sb, rows, bound) % M


def _fft_conv(a, b, rows, bound):
    if not a.any() or not b.any():
        return np.zeros((rows,) + (bound + 1,) * (a.ndim - 1), dtype=np.int64)
    shape = [fft.next_fast_len(sa + sb - 1, real=True) for sa, sb in zip(a.shape, b.shape)]
    fa = fft.rfftn(a.astype(np.float64), shape)
    fb = fft.rfftn(b.astype(np.float64), shape)
    c = fft.irfftn(fa * fb, shape)
    c = c[(slice(0, rows),) + (slice(0, bound + 1),) * (a.ndim - 1)]
    out = np.zeros((rows,) + (bound + 1,) * (a.ndim - 1), dtype=np.int64)
    out[tuple(slice(0, s) for s in c.shape)] = np.rint(c).astype(np.int64)
    return out


class BalancedLaurentSeries:
    __slots__ = ("nz", "val", "order", "bound", "slack", "data", "modulus", "rate")

    def __init__(self, nz: int, val: int, order: int, bound: int, slack, data,
                 modulus: int | None = None, rate: int = 1):
        self.nz = nz
        self.rate = rate
        self.val = val
        self.order = order
        self.bound = bound
        self.slack = tuple(slack)
        self.modulus = modulus
        self.data = data
        if len(self.slack) != nz or data.shape != (order + 1,) + (bound + 1,) * nz:
            raise ValueError("inconsistent balanced series layout")

    # construction ------------------------------------------------------------
    @staticmethod
    def _empty(nz, order, bound, modulus):
        shape = (order + 1,) + (bound + 1,) * nz
        if modulus is None:
            return np.full(shape, 0, dtype=object)
        return np.zeros(shape, dtype=np.int64)

    @classmethod
    def zero(cls, nz, order, bound, modulus=None, val=0, slack=None, rate=1):
        slack = (0,) * nz if slack is None else slack
        return cls(nz, val, order, bound, slack, cls._empty(nz, order, bound, modulus),
                   modulus, rate)

    @classmethod
    def one(cls, nz, order, bound, modulus=None, rate=1):
        out = cls.zero(nz, order, bound, modulus, rate=rate)
        out.data[(0,) * (nz + 1)] = 1
        return out

    @classmethod
    def from_laurent(cls, terms: Mapping, nz: int, order: int, bound: int,
                     modulus: int | None = None, slack=None, rate: int = 1):
        """Build from {(m, (e_1..e_k)): c}; the w-exponent is absolute.

        The default slack is the smallest one that fits every term.
        """
        terms = {(int(m), tuple(e)): c for (m, e), c in terms.items() if c}
        if slack is None:
            slack = [0] * nz
            for (m, e) in terms:
                for i in range(nz):
                    slack[i] = max(slack[i], -e[i] - rate * m)
        out = cls.zero(nz, order, bound, modulus, 0, slack, rate)
        for (m, e), c in terms.items():
            if m < 0:
                raise MembershipError("input", "negative power of w")
            if m > order:
                continue
            idx = tuple(ei + rate * m + s for ei, s in zip(e, out.slack))
            if min(idx, default=0) < 0:
                raise MembershipError("input", f"term w^{m} z^{e} below the slack window")
            if max(idx, default=0) > bound:
                continue
            out.data[(m,) + idx] = _exact(c) if modulus is None else int(c) % modulus
        return out

    def _like(self, data, val=None, order=None, slack=None):
        return BalancedLaurentSeries(self.nz, self.val if val is None else val,
                                     self.order if order is None else order, self.bound,
                                     self.slack if slack is None else slack, data, self.modulus,
                                     self.rate)

    # inspection --------------------------------------------------------------
    @property
    def top(self) -> int:
        """Largest absolute w-exponent known."""
        return self.val + self.order

    def laurent_terms(self) -> dict:
        out = {}
        for idx in zip(*np.nonzero(self.data != 0)):
            i = int(idx[0])
            m = self.val + i
            e = tuple(int(j) - self.rate * m - s for j, s in zip(idx[1:], self.slack))
            out[(m, e)] = self.data[idx]
        return out

    def is_member(self) -> bool:
        """True when every P_m has degree at most rate*m in each 1/z_i."""
        for axis, s in enumerate(self.slack):
            if s:
                sl = [slice(None)] * (self.nz + 1)
                sl[axis + 1] = slice(0, s)
                if np.any(self.data[tuple(sl)] != 0):
                    return False
        return True

    def require_member(self, component: str) -> "BalancedLaurentSeries":
        if not self.is_member():
            raise MembershipError(component)
        return self

    def leading(self):
        """(valuation, P_val as Laurent terms) of the first nonzero row."""
        for i in range(self.order + 1):
            row = self.data[i]
            if np.any(row != 0):
                m = self.val + i
                terms = {}
                if self.nz == 0:
                    return m, {(): row}
                for idx in zip(*np.nonzero(row != 0)):
                    terms[tuple(int(j) - self.rate * m - s
                                for j, s in zip(idx, self.slack))] = row[idx]
                return m, terms
        return None, {}

    def constant_term(self) -> UniSeries:
        """Constant term in all z's, as a series in w known through ``top``."""
        cs = [0] * (self.top + 1)
        for i in range(self.order + 1):
            m = self.val + i
            idx = tuple(self.rate * m + s for s in self.slack)
            if max(idx, default=0) > self.bound:
                raise PreconditionError(
                    f"bound {self.bound} too small for the constant term at w^{m}")
            cs[m] = self.data[(i,) + idx]
        if self.modulus is None:
            return UniSeries(cs, self.top, var="w")
        return UniSeries([int(c) for c in cs], self.top, p=None, var="w")

    # alignment -----------------------------------------------------------------
    def _check(self, other: "BalancedLaurentSeries"):
        if ((other.nz, other.bound, other.modulus, other.rate)
                != (self.nz, self.bound, self.modulus, self.rate)):
            raise ValueError("incompatible balanced series")

    def with_val(self, v: int) -> "BalancedLaurentSeries":
        """Same series with rows starting at w^v (v <= val)."""
        d = self.val - v
        if d < 0:
            raise ValueError("can only lower the stored valuation")
        if d == 0:
            return self
        data = self._empty(self.nz, self.order + d, self.bound, self.modulus)
        data[d:] = self.data
        return BalancedLaurentSeries(self.nz, v, self.order + d, self.bound, self.slack,
                                     data, self.modulus, self.rate)

    def with_slack(self, slack) -> "BalancedLaurentSeries":
        slack = tuple(slack)
        if slack == self.slack:
            return self
        shift = [t - s for s, t in zip(self.slack, slack)]
        if min(shift) < 0:
            raise ValueError("can only widen the slack")
        data = self._empty(self.nz, self.order, self.bound, self.modulus)
        dst = (slice(None),) + tuple(slice(d, None) for d in shift)
        src = (slice(None),) + tuple(slice(0, self.bound + 1 - d) for d in shift)
        data[dst] = self.data[src]
        return self._like(data, slack=slack)

    def truncate(self, top: int) -> "BalancedLaurentSeries":
        order = top - self.val
        if order >= self.order:
            return self
        return self._like(self.data[: order + 1].copy(), order=order)

    def _aligned(self, other):
        self._check(other)
        v = min(self.val, other.val)
        top = min(self.top, other.top)
        slack = tuple(max(a, b) for a, b in zip(self.slack, other.slack))
        a = self.with_val(v).with_slack(slack).truncate(top)
        b = other.with_val(v).with_slack(slack).truncate(top)
        return a, b

    # arithmetic ----------------------------------------------------------------
    def _reduce(self, data):
        return data % self.modulus if self.modulus is not None else data

    def __add__(self, other):
        if not isinstance(other, BalancedLaurentSeries):
            other = self.constant(other)
        a, b = self._aligned(other)
        return a._like(a._reduce(a.data + b.data))

    __radd__ = __add__

    def __neg__(self):
        return self._like(self._reduce(-self.data))

    def __sub__(self, other):
        if not isinstance(other, BalancedLaurentSeries):
            other = self.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def constant(self, c) -> "BalancedLaurentSeries":
        out = BalancedLaurentSeries.zero(self.nz, self.top, self.bound, self.modulus,
                                         rate=self.rate)
        out.data[(0,) * (self.nz + 1)] = (_exact(c) if self.modulus is None
                                         else int(c) % self.modulus)
        return out

    def scale(self, c) -> "BalancedLaurentSeries":
        if self.modulus is None:
            return self._like(self.data * _exact(c))
        return self._like(self.data * (int(c) % self.modulus) % self.modulus)

    def mul_w(self, k: int) -> "BalancedLaurentSeries":
        """Multiply by w^k (k >= 0); lifted z-indices move up by rate*k."""
        d = self.rate * k
        if d == 0 or self.nz == 0:
            return self._like(self.data, val=self.val + k)
        data = self._empty(self.nz, self.order, self.bound, self.modulus)
        data[(slice(None),) + (slice(d, None),) * self.nz] = \
            self.data[(slice(None),) + (slice(0, self.bound + 1 - d),) * self.nz]
        return self._like(data, val=self.val + k)

    def __mul__(self, other):
        if not isinstance(other, BalancedLaurentSeries):
            return self.scale(other)
        self._check(other)
        order = min(self.order, other.order)
        slack = tuple(a + b for a, b in zip(self.slack, other.slack))
        if self.modulus is None:
            data = _exact_conv(self.data, other.data, order + 1, self.bound)
        else:
            data = _mod_conv(self.data, other.data, order + 1, self.bound, self.modulus)
        return BalancedLaurentSeries(self.nz, self.val + other.val, order, self.bound, slack,
                                     data, self.modulus, self.rate)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        out = None
        base = self
        while e:
            if e & 1:
                out = base if out is None else out * base
            e >>= 1
            if e:
                base = base * base
        return out if out is not None else self.constant(1).truncate(self.order)

    def _unit_constant(self, what: str):
        """The constant c of a series c + O(w) with a z-free leading row."""
        if self.val != 0 or any(self.slack):
            raise PreconditionError(f"{what} needs a member with valuation 0 and no slack")
        row = self.data[0:1].reshape(self.data.shape[1:] or (1,))
        c0 = row.flat[0]
        rest = row.copy()
        rest.flat[0] = 0
        if np.any(rest != 0):
            raise PreconditionError(f"{what} needs a z-free coefficient of w^0")
        if self.modulus is None:
            if not c0:
                raise PreconditionError(f"{what} needs a unit constant term, got {c0}")
            return c0
        try:
            pow(int(c0), -1, self.modulus)
        except ValueError:
            raise PreconditionError(
                f"{what}: constant term {c0} is not a unit modulo {self.modulus}") from None
        return int(c0)

    def _newton(self, step, start):
        """Run a precision-doubling iteration from the constant ``start``."""
        g = self.constant(start).truncate(0)
        prec = 1
        while prec < self.order + 1:
            prec = min(2 * prec, self.order + 1)
            g = step(self.truncate(prec - 1), g.with_val(0).extend(prec - 1))
        return g

    def extend(self, order: int) -> "BalancedLaurentSeries":
        """Pad with zero rows up to ``order`` (a precision claim the caller makes)."""
        if order <= self.order:
            return self.truncate(self.val + order)
        data = self._empty(self.nz, order, self.bound, self.modulus)
        data[: self.order + 1] = self.data
        return self._like(data, order=order)

    def inv(self) -> "BalancedLaurentSeries":
        c0 = self._unit_constant("inverse")
        if self.modulus is None:
            start = _exact(Fraction(1) / c0)
        else:
            start = pow(int(c0), -1, self.modulus)

        def step(f, g):
            return g + g * (1 - f * g)

        return self._newton(step, start)

    def sqrt(self) -> "BalancedLaurentSeries":
        """Square root of 1 + O(w) (odd modulus or exact)."""
        c0 = self._unit_constant("sqrt")
        if c0 != 1:
            raise PreconditionError(f"sqrt needs constant term 1, got {c0}")
        if self.modulus is not None and self.modulus % 2 == 0:
            raise PreconditionError("sqrt needs an odd modulus")
        half = Fraction(1, 2) if self.modulus is None else pow(2, -1, self.modulus)

        def step(f, h):
            return h + (h * (1 - f * h * h)).scale(half)

        return (self._newton(step, 1)) * self

    def embed(self, nz: int, axis: int | None, bound: int | None = None) -> "BalancedLaurentSeries":
        """Lift a one-variable member into nz variables.

        ``axis`` = i substitutes z -> z_{i+1}; ``axis`` = None substitutes
        z -> z_1 z_2 ... z_nz.
        """
        if self.nz != 1 or any(self.slack):
            raise ValueError("embed expects a one-variable member")
        bound = self.bound if bound is None else bound
        out = BalancedLaurentSeries.zero(nz, self.order, bound, self.modulus, self.val,
                                         rate=self.rate)
        r = self.rate
        for i in range(self.order + 1):
            m = self.val + i
            for j in np.nonzero(self.data[i] != 0)[0]:
                j = int(j)
                e = j - r * m
                if axis is None:
                    idx = (e + r * m,) * nz
                else:
                    idx = tuple(e + r * m if a == axis else r * m for a in range(nz))
                if max(idx, default=0) <= bound:
                    # nz = 0 evaluates at z = 1, so terms accumulate
                    out.data[(i,) + idx] += self.data[i, j]
        return out._like(out._reduce(out.data))

    def __eq__(self, other):
        if not isinstance(other, BalancedLaurentSeries):
            return NotImplemented
        return self.laurent_terms() == other.laurent_terms()

    __hash__ = None

    def __repr__(self):
        return (f"BalancedLaurentSeries(nz={self.nz}, w^{self.val}..w^{self.top}, "
                f"bound={self.bound}, slack={self.slack}, modulus={self.modulus})")


def laurent_poly(terms: Mapping, nz: int, order: int, bound: int, modulus=None, rate=1):
    """Convenience: a z-Laurent polynomial (w-exponent 0) given as {e: c}."""
    return BalancedLaurentSeries.from_laurent({(0, e): c for e, c in terms.items()},
                                              nz, order, bound, modulus, rate=rate)

