from fractions import Fraction as Fr

import pytest

from diagmod import catalog
from diagmod.arith import HypergeomCoeffSpec, binom, hypergeom_coeffs
from diagmod.dfinite import (DiffOp, HeunSpec, adjoint, exterior_square_order4, frobenius_solutions,
                             guess_ode, heun_operator, heun_series, hypergeom_operator, is_mum,
                             mum_exponent, op_mul, series_from_op, theta_op, x_op)
from diagmod.expr import parse_operator
from diagmod.series import PreconditionError, UniSeries


def test_guess_geometric():
    L = guess_ode(UniSeries([1] * 30, 29), 3, 3)
    assert L.normalized() == parse_operator("(1-x)*D - 1").normalized()


def test_guess_apery_like():
    f = UniSeries([sum(binom(n, k) ** 2 * binom(n + k, k) for k in range(n + 1)) for n in range(40)], 39)
    L = guess_ode(f, 3, 4)
    expected = parse_operator("x*(1-11*x-x^2)*D^2 + (1-22*x-3*x^2)*D - (x+3)")
    assert L.normalized() == expected.normalized()
    assert is_mum(L)


def test_guess_gives_up_on_non_dfinite_prefix():
    # 2^(n^2) grows too fast for any small operator
    f = UniSeries([2 ** (n * n) for n in range(40)], 39)
    assert guess_ode(f, 2, 3) is None


def test_guess_rejects_mod_p():
    with pytest.raises(PreconditionError):
        guess_ode(UniSeries([1] * 10, 9, 5), 1, 1)


def test_heun_series_examples():
    s = heun_series(HeunSpec(4, Fr(1, 2), Fr(1, 2), Fr(1, 2), 1, Fr(1, 2), 16), 5)
    assert list(s.c) == [1, 2, 12, 104, 1078, 12348]
    s = heun_series(HeunSpec(-3, 0, Fr(1, 2), 1, 1, Fr(1, 2), 12), 6)
    assert list(s.c) == [1, 0, 6, 24, 252, 2016, 19320]


def test_heun_series_solves_heun_operator():
    spec = HeunSpec(4, Fr(1, 2), Fr(1, 2), Fr(1, 2), 1, Fr(1, 2), 16)
    L = heun_operator(spec)
    assert L.apply(heun_series(spec, 20)).truncate(15).is_zero()


def test_mum_detection():
    assert is_mum(parse_operator("theta^2"))
    assert not is_mum(parse_operator("theta^2 - 1"))
    assert mum_exponent(catalog.operator("calB2")) == 1
    assert not is_mum(catalog.operator("calB2"))


def test_h44_holomorphic_solution():
    L = catalog.operator("H44")
    y0 = series_from_op(L, 10)
    assert list(y0.c) == [binom(2 * n, n) ** 4 for n in range(11)]
    assert frobenius_solutions(L, 10).y0 == y0


def test_frobenius_basis_is_annihilated():
    L = catalog.operator("B2")
    basis = frobenius_solutions(L, 12)
    for sol in basis.solutions():
        assert L.apply_log(sol).truncate(10).is_zero()


def test_frobenius_rejects_non_mum():
    with pytest.raises(PreconditionError):
        frobenius_solutions(parse_operator("theta^2 - 1 - x"), 5)


def test_adjoint_involution():
    for name in ("B2", "B1", "calB2", "H23"):
        L = catalog.operator(name)
        assert adjoint(adjoint(L)) == L


def test_multiplication_associative():
    A, B, C = parse_operator("x*D + 1"), parse_operator("D^2 - x"), parse_operator("(1+x)*theta")
    assert op_mul(op_mul(A, B), C) == op_mul(A, op_mul(B, C))


def test_theta_commutation():
    # theta x - x theta = x
    assert op_mul(theta_op(), x_op()) - op_mul(x_op(), theta_op()) == x_op()


def test_hypergeometric_operator_annihilates_series():
    spec = HypergeomCoeffSpec((Fr(1, 3), Fr(2, 3)), (1,), 27)
    L = hypergeom_operator(spec)
    f = UniSeries(hypergeom_coeffs(spec, 20), 20)
    assert L.apply(f).truncate(17).is_zero()


def test_h23_guessed_from_series():
    spec = HypergeomCoeffSpec((Fr(1, 4), Fr(1, 4), Fr(1, 3), Fr(1, 3)), (1, 1, 1), 1728)
    L = guess_ode(UniSeries(hypergeom_coeffs(spec, 60), 60), 4, 6)
    assert L.same_up_to_left_factor(hypergeom_operator(spec))


def test_exterior_square_orders():
    assert exterior_square_order4(catalog.operator("H44"), 60, 12).order == 5
    assert exterior_square_order4(catalog.operator("H23"), 60, 12).order == 6


def test_zero_operator_rejected():
    with pytest.raises(ValueError):
        DiffOp([[0], [0]])


def test_operator_json_roundtrip():
    L = catalog.operator("B1")
    assert DiffOp.from_json(L.to_json()) == L
