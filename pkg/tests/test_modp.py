import random

import pytest

from diagmod import catalog
from diagmod.arith import MultiPoly
from diagmod.diagonal import diagonal
from diagmod.expr import parse_poly
from diagmod.ising import chi_normalized_mod, chi_tilde
from diagmod.modp import (AlgRelation, find_relation, reduce_mod_p, root_mod_p, verify_functional_equation_mod2,
                          verify_operator_mod_p, verify_relation)
from diagmod.series import PreconditionError, UniSeries


def zagier4():
    return next(R for tag, R, _ in catalog.diagonal_corpus() if tag == "zagier-4")


def test_diagonal_mod_7_head():
    d = diagonal(zagier4(), 9, 7)
    assert list(d.c) == [1, 4, 1, 1, 0, 0, 0, 4, 2, 4]


def test_diagonal_mod_7_matches_integer_diagonal():
    assert diagonal(zagier4(), 12, 7) == diagonal(zagier4(), 12).reduce_mod_p(7)


def test_sixth_root_relation():
    R = catalog.relation("sixth-root")
    assert verify_relation(R, diagonal(zagier4(), 30, 7))
    assert not verify_relation(R, diagonal(zagier4(), 30, 7) + UniSeries.monomial(20, 30, 7))


def test_mod2_lacunary_root():
    R = catalog.relation("chi3-mod2")
    root = root_mod_p(R, 140, [0] * 9 + [1])
    F = UniSeries(root.c[9:], 131, 2)
    assert [k for k, c in enumerate(F.c) if c] == [0, 8, 24, 56, 120]
    assert verify_functional_equation_mod2(F)


def test_functional_equation_negative_control():
    R = catalog.relation("chi3-mod2")
    F = UniSeries(root_mod_p(R, 300, [0] * 9 + [1]).c[9:], 291, 2)
    broken = UniSeries([c if k != 200 else 1 - c for k, c in enumerate(F.c)], 291, 2)
    assert not verify_functional_equation_mod2(broken)


def test_mod2_relation_holds_for_chi3():
    chi = chi_tilde(3, 30)
    h = UniSeries([c / 8 for c in chi.c], 30).reduce_mod_p(2)
    assert verify_relation(catalog.relation("chi3-mod2"), h)


def test_find_relation_recovers_mod2_relation():
    root = root_mod_p(catalog.relation("chi3-mod2"), 120, [0] * 9 + [1])
    rel = find_relation(root, 10, 2)
    assert rel is not None and verify_relation(rel, root)
    assert rel.normalized().poly == catalog.relation("chi3-mod2").normalized().poly


def test_find_relation_random_series_is_none():
    rng = random.Random(5)
    f = UniSeries([rng.randrange(5) for _ in range(80)], 79, 5)
    assert find_relation(f, 3, 3) is None


def test_find_relation_needs_enough_terms():
    with pytest.raises(PreconditionError):
        find_relation(UniSeries([1, 2, 3], 2, 5), 3, 3)


def test_operator_mod_p():
    L, p = catalog.modp_operator("chi3-mod5")
    h = UniSeries([int(c) % 5 for c in chi_normalized_mod(3, 40, 5).c], 40, 5)
    assert verify_operator_mod_p(L, h, p, 36)
    assert not verify_operator_mod_p(L, h + UniSeries.monomial(15, 40, 5), p, 36)


def test_relation_validation():
    with pytest.raises(ValueError):
        AlgRelation(parse_poly("y - x", ("x", "y")))
    with pytest.raises(ValueError):
        AlgRelation(MultiPoly(("x", "y"), {}, 3))
    with pytest.raises(ValueError):
        reduce_mod_p(UniSeries([1], 0), 9)


def test_relation_json_roundtrip():
    R = catalog.relation("chi3-mod3")
    assert AlgRelation.from_json(R.to_json()).poly == R.poly
