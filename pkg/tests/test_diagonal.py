from fractions import Fraction as Fr

import pytest

from diagmod import catalog
from diagmod.arith import MultiPoly, binom
from diagmod.diagonal import (BinSumExpr, RationalFunctionRep, binsum_to_ratfun, diagonal, furstenberg_embed,
                              verify_representation)
from diagmod.expr import parse_poly
from diagmod.series import PreconditionError, UniSeries

XY = ("x", "y")


def test_furstenberg_linear():
    d = diagonal(furstenberg_embed(parse_poly("y - x", XY)), 6)
    assert d == UniSeries.monomial(1, 6)


def test_furstenberg_catalan():
    d = diagonal(furstenberg_embed(parse_poly("y - x - y^2", XY)), 10)
    catalan = [0] + [binom(2 * n, n) // (n + 1) for n in range(10)]
    assert list(d.c) == catalan


def test_furstenberg_rejects_singular_root():
    with pytest.raises(PreconditionError):
        furstenberg_embed(parse_poly("y^2 - x^2", XY))
    with pytest.raises(PreconditionError):
        furstenberg_embed(parse_poly("1 + y - x", XY))


@pytest.mark.parametrize("c", [0, 1, 5])
def test_family_with_constant_diagonal(c):
    R = RationalFunctionRep(parse_poly(f"2*x*y - {c}*x + {c}*y", XY), parse_poly("x + y + 2", XY))
    expected = UniSeries([1, -1], 8).power(Fr(-1, 2)).shift(1).truncate(8)
    assert diagonal(R, 8) == expected


def test_product_of_geometric_factors():
    v = ("a", "b")
    R = RationalFunctionRep.from_factors(parse_poly("1", v), [parse_poly("1 - a", v), parse_poly("1 - b", v)])
    assert diagonal(R, 5).c == (1,) * 6


def test_franel_4var_negative_control():
    _, R, entry = next(e for e in catalog.diagonal_corpus() if e[0] == "franel-4var")
    names = R.variables
    factors = [parse_poly(f, names) for f in entry["factors"]]
    factors[1] = factors[1] - MultiPoly.var(names, "z1") * MultiPoly.var(names, "z2")
    perturbed = RationalFunctionRep.from_factors(R.num, factors)
    target = UniSeries(entry["series"], 6)
    assert verify_representation(R, target, 6)
    assert not verify_representation(perturbed, target, 6)


def test_diagonal_mod_p_agrees():
    _, R, _ = next(e for e in catalog.diagonal_corpus() if e[0] == "cube-8")
    assert diagonal(R, 10, 11) == diagonal(R, 10).reduce_mod_p(11)


def test_binsum_coefficients():
    e = BinSumExpr.parse("binom(n,k)^2*binom(2*k,n)")
    assert [e.coefficient(n) for n in range(7)] == [1, 2, 10, 56, 346, 2252, 15184]
    assert e.depth == 1


@pytest.mark.parametrize("text", ["binom(n,k)^3", "binom(n,k)^2*binom(n+k,k)", "binom(n,k)*binom(2*k,k)"])
def test_binsum_residue(text):
    e = BinSumExpr.parse(text)
    assert diagonal(binsum_to_ratfun(e), 7) == e.series(7)


def test_binsum_parse_errors():
    with pytest.raises(PreconditionError):
        BinSumExpr.parse("binom(n,k")
    with pytest.raises(PreconditionError):
        BinSumExpr.parse("binom(n*k,k)")
    with pytest.raises(PreconditionError):
        BinSumExpr.parse("sqrt(n)")


def test_ratfun_json_roundtrip():
    _, R, _ = next(e for e in catalog.diagonal_corpus() if e[0] == "franel-4var")
    assert RationalFunctionRep.from_json(R.to_json()) == R


@pytest.mark.parametrize("p", [None, 7])
def test_constant_rational_function(p):
    v = ("a", "b")
    R = RationalFunctionRep(MultiPoly.const(v, 3), MultiPoly.const(v, 2))
    d = diagonal(R, 3, p)
    expected = UniSeries([Fr(3, 2)], 3)
    assert d == (expected if p is None else expected.reduce_mod_p(p))
