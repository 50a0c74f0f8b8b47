"""Exact linear algebra: kernels over F_p (vectorized) and over Q (multimodular).

The rational kernel is reconstructed from reduced row echelon forms modulo
several word-size primes, then checked against the integer matrix, so the
returned basis is always exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import Sequence

import numpy as np

from .arith import is_prime


def _primes_below(bound: int):
    p = bound - 1
    while p > 2:
        if is_prime(p):
            yield p
        p -= 2 if p % 2 else 1


# large enough to rarely divide anything, small enough for int64 products
WORD_PRIMES = tuple(p for _, p in zip(range(64), _primes_below(2**31)))


def rref_mod_p(A: np.ndarray, p: int):
    """Reduced row echelon form of an int64 matrix over F_p.

    Returns (R, pivots) where R has len(pivots) nonzero rows.
    """
    M = np.array(A, dtype=np.int64) % p
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        inv = pow(int(M[r, c]), -1, p)
        M[r] = M[r] * inv % p
        col = M[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            M[nzr] = (M[nzr] - np.outer(col[nzr], M[r])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def kernel_from_rref(R: np.ndarray, pivots: Sequence[int], cols: int, p: int) -> np.ndarray:
    """Canonical kernel basis: one vector per free column, free entry 1."""
    free = [c for c in range(cols) if c not in set(pivots)]
    K = np.zeros((len(free), cols), dtype=np.int64)
    for j, f in enumerate(free):
        K[j, f] = 1
        for i, c in enumerate(pivots):
            K[j, c] = (-R[i, f]) % p
    return K


def nullspace_mod_p(A, p: int) -> np.ndarray:
    """Kernel basis (rows) of A over F_p."""
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("matrix expected")
    if p >= 2**31:
        raise ValueError("modulus too large for the vectorized kernel")
    R, piv = rref_mod_p(A, p)
    return kernel_from_rref(R, piv, A.shape[1], p)


def rank_mod_p(A, p: int) -> int:
    return len(rref_mod_p(np.asarray(A, dtype=np.int64), p)[1])


def _integer_rows(A) -> list:
    rows = []
    for row in A:
        row = [Fraction(x) for x in row]
        d = 1
        for x in row:
            d = lcm(d, x.denominator)
        rows.append([int(x * d) for x in row])
    return rows


def rational_reconstruction(a: int, m: int):
    """Return n/d with n = a d mod m and |n|, d <= sqrt(m/2), or None."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def nullspace_qq(A, max_primes: int = 64) -> list:
    """Exact kernel basis over Q of a rational matrix (list of rows).

    Vectors are normalized with a 1 at their free column, matching the
    reduced echelon form over Q.
    """
    rows = _integer_rows(A)
    if not rows:
        raise ValueError("empty matrix")
    cols = len(rows[0])
    count = 0
    modulus = 1
    best_key = None
    previous = None
    combined: list = []
    for p in WORD_PRIMES[:max_primes]:
        Ap = np.array([[x % p for x in row] for row in rows], dtype=np.int64)
        R, piv = rref_mod_p(Ap, p)
        # unlucky primes lose rank or push a pivot to the right
        key = (len(piv), [-c for c in piv])
        if best_key is not None and key < best_key:
            continue
        if best_key is None or key > best_key:
            best_key, count, modulus, previous = key, 0, 1, None
        K = kernel_from_rref(R, piv, cols, p)
        if K.shape[0] == 0:
            return []
        count += 1
        if count == 1:
            combined = [[int(v) for v in row] for row in K]
            modulus = p
        else:
            combined = [[_crt(c, modulus, int(v), p) for c, v in zip(crow, krow)]
                        for crow, krow in zip(combined, K)]
            modulus *= p
        cand = []
        ok = True
        for row in combined:
            vec = []
            for v in row:
                q = rational_reconstruction(v, modulus)
                if q is None:
                    ok = False
                    break
                vec.append(q)
            if not ok:
                break
            cand.append(vec)
        if ok and cand == previous and _is_kernel(rows, cand):
            return cand
        previous = cand if ok else None
    raise ArithmeticError("kernel reconstruction did not stabilize")


def _crt(a: int, m: int, b: int, p: int) -> int:
    t = (b - a) * pow(m, -1, p) % p
    return a + m * t


def _is_kernel(rows, vecs) -> bool:
    for v in vecs:
        d = 1
        for x in v:
            d = lcm(d, x.denominator)
        iv = [int(x * d) for x in v]
        for row in rows:
            if sum(a * b for a, b in zip(row, iv) if a and b):
                return False
    return True


def rank_qq(A) -> int:
    """Rank over Q (exact: the rank modulo a prime never exceeds it, and the
    maximum over a few primes reaches it unless all of them divide a minor)."""
    rows = _integer_rows(A)
    best = 0
    for p in WORD_PRIMES[:3]:
        Ap = np.array([[x % p for x in row] for row in rows], dtype=np.int64)
        best = max(best, rank_mod_p(Ap, p))
    return best


def nullspace_qq_small(A) -> list:
    """Plain Gauss-Jordan over Fractions; reference implementation for tests."""
    M = [[Fraction(x) for x in row] for row in A]
    rows, cols = len(M), len(M[0])
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -M[i][f]
        basis.append(v)
    return basis
