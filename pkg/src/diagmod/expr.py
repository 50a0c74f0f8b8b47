"""Text forms for polynomials, rational functions, series and operators.

Grammar: integers, names, ``+ - * / ^`` (``**`` also accepted) and
parentheses.  Parsing goes through Python's :mod:`ast`, with a whitelist of
node types, so no code is ever evaluated.

Operators accept ``x``, ``D`` (d/dx) and ``theta`` (x d/dx); products are
compositions, so ``x*D`` is x d/dx while ``D*x`` is x d/dx + 1.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from typing import Sequence

from .arith import MultiPoly, rat_str
from .dfinite import DiffOp, theta_op


class ParseError(ValueError):
    """Malformed or unsupported expression text."""


def _tree(text: str) -> ast.AST:
    try:
        return ast.parse(text.replace("^", "**").strip(), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None


class _Rat:
    """num/den pair of MultiPolys (den may be a constant)."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly):
        self.num, self.den = num, den

    def __add__(self, o):
        return _Rat(self.num * o.den + o.num * self.den, self.den * o.den)

    def __sub__(self, o):
        return _Rat(self.num * o.den - o.num * self.den, self.den * o.den)

    def __mul__(self, o):
        return _Rat(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        if o.num.is_zero():
            raise ParseError("division by zero")
        return _Rat(self.num * o.den, self.den * o.num)

    def __neg__(self):
        return _Rat(-self.num, self.den)

    def __pow__(self, e: int):
        if e < 0:
            return _Rat(self.den ** (-e), self.num ** (-e))
        return _Rat(self.num ** e, self.den ** e)


def _eval(node, leaf, allow_div=True):
    """Fold an expression tree with ``leaf`` mapping names/constants to values."""
    if isinstance(node, ast.BinOp):
        left = _eval(node.left, leaf, allow_div)
        if isinstance(node.op, ast.Pow):
            e = _int_literal(node.right)
            return left ** e
        right = _eval(node.right, leaf, allow_div)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div) and allow_div:
            return left / right
        raise ParseError(f"unsupported operator {type(node.op).__name__}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, leaf, allow_div)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return leaf(int(node.value))
    if isinstance(node, ast.Name):
        return leaf(node.id)
    raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _int_literal(node) -> int:
    sign = 1
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        sign, node = -1, node.operand
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return sign * int(node.value)
    raise ParseError("exponents must be integer literals")


def parse_ratfun(text: str, variables: Sequence[str], p: int | None = None):
    """Return (numerator, denominator) MultiPolys."""
    variables = tuple(variables)

    def leaf(v):
        one = MultiPoly.const(variables, 1, p)
        if isinstance(v, int):
            return _Rat(MultiPoly.const(variables, v, p), one)
        if v not in variables:
            raise ParseError(f"unknown variable {v!r}; expected one of {variables}")
        return _Rat(MultiPoly.var(variables, v, p), one)

    r = _eval(_tree(text), leaf)
    return r.num, r.den


def parse_poly(text: str, variables: Sequence[str], p: int | None = None) -> MultiPoly:
    """A polynomial; division is allowed by nonzero constants only."""
    num, den = parse_ratfun(text, variables, p)
    if den.degree() > 0:
        raise ParseError(f"{text!r} is not a polynomial")
    c = den.constant_term()
    inv = Fraction(1) / c if p is None else pow(int(c), -1, p)
    return num * MultiPoly.const(num.vars, inv, p)


def parse_operator(text: str, p: int | None = None) -> DiffOp:
    """Linear differential operator in x, D and theta with integer coefficients."""

    def leaf(v):
        if isinstance(v, int):
            return _Op(DiffOp([[v]], p) if v else None)
        if v == "x":
            return _Op(DiffOp([[0, 1]], p))
        if v == "D":
            return _Op(DiffOp([[], [1]], p))
        if v in ("theta", "θ"):
            op = theta_op(1)
            return _Op(op.reduce_mod_p(p) if p is not None else op)
        raise ParseError(f"unknown operator symbol {v!r}")

    r = _eval(_tree(text), leaf, allow_div=False)
    if r.op is None:
        raise ParseError("the zero operator is not allowed")
    return r.op


class _Op:
    """DiffOp wrapper allowing a zero value during folding."""

    __slots__ = ("op",)

    def __init__(self, op):
        self.op = op

    def __add__(self, o):
        if self.op is None:
            return o
        if o.op is None:
            return self
        try:
            return _Op(self.op + o.op)
        except ValueError:
            return _Op(None)

    def __neg__(self):
        return _Op(None if self.op is None else -self.op)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if self.op is None or o.op is None:
            return _Op(None)
        return _Op(self.op * o.op)

    def __pow__(self, e: int):
        if e < 0:
            raise ParseError("negative powers of operators are not supported")
        out = _Op(DiffOp([[1]], self.op.p if self.op else None))
        for _ in range(e):
            out = out * self
        return out


def format_series(coeffs: Sequence, var: str = "x") -> str:
    """Plain-text series with exact rational coefficients."""
    parts = []
    for k, c in enumerate(coeffs):
        if not c:
            continue
        cs = rat_str(c) if not isinstance(c, int) else str(c)
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(f"{cs}*{mono}")
    return " + ".join(parts).replace("+ -", "- ") or "0"
