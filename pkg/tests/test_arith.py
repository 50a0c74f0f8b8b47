from fractions import Fraction as Fr

import pytest

from diagmod.arith import (FactorialRatioSpec, HypergeomCoeffSpec, ModP, ModulusMismatch, MultiPoly,
                           binom, factorial_ratio, gen_binom, hypergeom_coeff, hypergeom_coeffs,
                           integrality_scan, is_prime)

NINTHS_3F2 = HypergeomCoeffSpec((Fr(1, 9), Fr(4, 9), Fr(5, 9)), (Fr(1, 3), 1), 729)


def test_binomials():
    assert binom(4, 2) == 6
    assert binom(10, 5) == 252
    assert binom(3, 5) == 0 and binom(3, -1) == 0
    assert gen_binom(Fr(1, 2), 2) == Fr(-1, 8)


def test_factorial_ratio_value():
    assert factorial_ratio(FactorialRatioSpec((3,), (1, 1, 1)), 2) == 90


def test_unbalanced_factorial_ratio_rejected():
    with pytest.raises(ValueError, match="unbalanced"):
        FactorialRatioSpec((3,), (1, 1))


def test_ninths_3f2_coefficients():
    assert hypergeom_coeff(NINTHS_3F2, 1) == 60
    assert hypergeom_coeff(NINTHS_3F2, 2) == 20475
    assert hypergeom_coeffs(NINTHS_3F2, 6)[3:] == [9373650, 4881796920, 2734407111744, 1605040007778900]


def test_ninths_3f2_ratio_closed_form():
    for n in range(101):
        closed = Fr(3 * (1 + 9 * n) * (4 + 9 * n) * (5 + 9 * n), (1 + 3 * n) * (1 + n) ** 2)
        assert NINTHS_3F2.ratio(n) == closed


def test_ninths_3f2_integral_to_200():
    assert integrality_scan(NINTHS_3F2, 200).all_integer


def test_companion_series_values():
    spec = HypergeomCoeffSpec((Fr(1, 9), Fr(2, 9), Fr(7, 9)), (Fr(2, 3), 1), 729)
    assert hypergeom_coeffs(spec, 4) == [1, 21, 5544, 2194500, 1032711750]


def test_eleven_companion_not_globally_bounded():
    spec = HypergeomCoeffSpec((Fr(1, 11), Fr(2, 11), Fr(6, 11)), (Fr(1, 2), 1), 11**4)
    report = integrality_scan(spec, 100)
    assert not report.all_integer and report.first_failure == 3
    assert hypergeom_coeff(spec, 3).denominator == 5


def test_negative_control_scan():
    report = integrality_scan(HypergeomCoeffSpec((Fr(1, 2), Fr(1, 2)), (Fr(1, 3),), 1), 20)
    assert not report.all_integer and report.first_failure == 1


def test_lower_pole_rejected():
    with pytest.raises(ValueError):
        HypergeomCoeffSpec((Fr(1, 2),), (0,))


def test_modp_field():
    a = ModP(3, 7)
    assert a * a.inverse() == 1
    assert a / 2 == ModP(5, 7)
    assert ModP.from_rat(Fr(1, 3), 7) == 5
    with pytest.raises(ModulusMismatch):
        a + ModP(1, 5)
    with pytest.raises(ZeroDivisionError):
        ModP(0, 7).inverse()
    with pytest.raises(ValueError):
        ModP(1, 9)


def test_is_prime():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_multipoly_ops():
    v = ("x", "y")
    x, y = MultiPoly.var(v, "x"), MultiPoly.var(v, "y")
    f = (x + y) * (x - y)
    assert f == x * x - y * y
    assert f.degree() == 2 and f.degree("y") == 2
    assert f.evaluate({"x": 3, "y": 2}) == 5
    assert f.diff("x") == x + x
    assert MultiPoly.from_json(f.to_json()) == f


def test_multipoly_mod_p():
    v = ("x",)
    x = MultiPoly.var(v, "x", 3)
    assert (x + 1) * (x + 1) * (x + 1) == x * x * x + 1
    with pytest.raises(ValueError):
        MultiPoly(v, {(1, 2): 1})
