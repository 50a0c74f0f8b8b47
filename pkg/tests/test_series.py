from fractions import Fraction as Fr

import pytest

from diagmod.arith import MultiPoly, binom
from diagmod.series import MultiSeries, PreconditionError, PullbackSpec, UniSeries, compose, diag_extract


def x_series(N, p=None):
    return UniSeries.monomial(1, N, p)


def test_inverse_of_one_minus_x():
    f = UniSeries([1, -1], 8)
    assert f.inv().c == (1,) * 9
    assert (f * f.inv()) == UniSeries.one(8)


def test_sqrt_of_one_minus_four_x():
    s = UniSeries([1, -4], 3).sqrt()
    assert list(s.c) == [1, -2, -2, -4]


def test_exp_log_roundtrip():
    f = UniSeries([1, 1], 10)
    g = f.log().exp()
    assert g.agrees(f, 9)


def test_inverse_needs_unit():
    with pytest.raises(PreconditionError):
        UniSeries([0, 1], 4).inv()


def test_power_inadmissible_constant():
    with pytest.raises(PreconditionError):
        UniSeries([2, 1], 4).power(Fr(1, 2))


def test_hadamard_square_central_binomials():
    f = UniSeries([1, -4], 5).power(Fr(-1, 2))
    assert [int(c) for c in f.hadamard(f).c] == [1, 4, 36, 400, 4900, 63504]


def test_reversion_of_h44_nome():
    f = UniSeries([0, 1, 64, 7072], 3)
    assert list(f.reversion().c) == [0, 1, -64, 1120]


def test_reversion_mod_p_matches_rational():
    f = UniSeries([0, 1, 3, -2, 5, 7], 5)
    assert f.reversion().reduce_mod_p(11) == f.reduce_mod_p(11).reversion()


def test_reversion_precondition():
    with pytest.raises(PreconditionError):
        UniSeries([0, 2, 1], 3).reversion()


def test_pullback_coefficient():
    # 4F3([1/2]^4; 256 x / (1 + c x)) has x^2 coefficient 16 (81 - c)
    N = 4
    F = UniSeries([binom(2 * n, n) ** 4 for n in range(N + 1)], N)
    for c in (-3, 0, 7, 81):
        pb = PullbackSpec.rational(1, 1, [1], [1, c], N)
        assert compose(F, pb)[2] == 16 * (81 - c)


def test_pullback_spec_validation():
    with pytest.raises(PreconditionError):
        PullbackSpec(1, 0, UniSeries.one(4))
    with pytest.raises(PreconditionError):
        PullbackSpec(1, 1, UniSeries([2], 4))


def test_compose_needs_zero_constant():
    with pytest.raises(PreconditionError):
        UniSeries([1, 1], 3).compose(UniSeries([1, 1], 3))


def test_shift_and_valuation():
    f = UniSeries([0, 0, 3, 1], 3)
    assert f.valuation() == 2
    assert list(f.shift(-2).c) == [3, 1]
    with pytest.raises(PreconditionError):
        f.shift(-3)


def test_mod_p_series():
    f = UniSeries([1, 2, 3], 2).reduce_mod_p(5)
    assert f.p == 5 and (f * f.inv()) == UniSeries.one(2, 5)
    with pytest.raises(PreconditionError):
        UniSeries([Fr(1, 5)], 0).reduce_mod_p(5)


def test_json_roundtrip():
    f = UniSeries([1, Fr(-3, 7), 0, 5], 3)
    assert UniSeries.from_json(f.to_json()) == f


def test_diag_extract_central_binomials():
    v = ("z1", "z2")
    Q = MultiPoly(v, {(0, 0): 1, (1, 0): -1, (0, 1): -1})
    F = MultiSeries.from_poly(Q, [6, 6]).inv()
    assert [int(c) for c in diag_extract(F, 6).c] == [binom(2 * n, n) for n in range(7)]


def test_multiseries_sqrt_squares_back():
    v = ("a", "b")
    Q = MultiPoly(v, {(0, 0): 1, (1, 0): 2, (1, 1): -3})
    F = MultiSeries.from_poly(Q, [4, 4])
    S = F.sqrt()
    assert not (S * S - F).terms
