from dataclasses import replace
from fractions import Fraction as Fr

import pytest

from diagmod.expr import ParseError, parse_poly
from diagmod.identities import (CurvePoly, ModularPolynomial, PullbackIdentity, Side, algebraic_A, eval_series,
                                hypergeometric, load_catalog, verify_catalog, verify_curve_entry,
                                verify_modular_curve, verify_modular_polynomial_11, verify_pullback_identity)
from diagmod.series import PreconditionError, UniSeries

CATALOG = load_catalog()
IDENTITIES = {i.tag: i for i in CATALOG["identities"]}
CURVES = {c.tag: c for c in CATALOG["curves"]}


def test_eval_series_basic():
    f = eval_series("(1-4*x)^(-1/2)", 5)
    assert [int(c) for c in f.c[:6]] == [1, 2, 6, 20, 70, 252]
    assert list(eval_series("x/(x+x^2)", 4).c[:5]) == [1, -1, 1, -1, 1]


def test_eval_series_division_shifts_valuation():
    f = eval_series("x^2/(x - x^2)", 6)
    assert list(f.c[:7]) == [0, 1, 1, 1, 1, 1, 1]


def test_eval_series_conjugate_sqrt():
    s = eval_series("1 + sqrt(1 - 4*x)", 4)
    t = eval_series("1 + sqrt(1 - 4*x)", 4, sqrt_sign=-1)
    assert s.c[0] == 2 and t.c[0] == 0
    assert (s + t).agrees(UniSeries([2], 4), 4)


def test_eval_series_inadmissible_power():
    with pytest.raises(PreconditionError, match="inadmissible|exact"):
        eval_series("(2 + x)^(1/2)", 4)
    with pytest.raises(ParseError):
        eval_series("(1 + x)^y", 4)
    with pytest.raises(ParseError):
        eval_series("1 + * x", 4)


def test_hypergeometric_2f1():
    f = hypergeometric([Fr(1, 2), Fr(1, 2)], [1], 4)
    assert list(f.c) == [1, Fr(1, 4), Fr(9, 64), Fr(25, 256), Fr(1225, 16384)]


@pytest.mark.parametrize("tag", sorted(IDENTITIES))
def test_identity_holds(tag):
    assert verify_pullback_identity(IDENTITIES[tag], 20)


@pytest.mark.parametrize("tag", sorted(CURVES))
def test_curve_holds(tag):
    assert verify_curve_entry(CURVES[tag], 20)


def test_perturbed_prefactor_fails():
    ident = IDENTITIES["franel-two-pullbacks"]
    first = ident.sides[0]
    bad = replace(first, prefactor=f"(1 + x^7)*{first.prefactor}")
    assert not verify_pullback_identity(replace(ident, sides=(bad,) + ident.sides[1:]), 12)


def test_wrong_target_fails():
    ident = IDENTITIES["franel-two-pullbacks"]
    target = list(ident.target)
    target[4] += 1
    assert not verify_pullback_identity(replace(ident, target=tuple(target)), 12)


def test_perturbed_curve_fails():
    curve = CURVES["franel-curve"]
    names = curve.poly.vars
    bad = CurvePoly(curve.tag, curve.poly + parse_poly(f"{names[0]}^2*{names[1]}^2", names), curve.pairs)
    assert not verify_curve_entry(bad, 12)


def test_curve_needs_vanishing_series():
    C = parse_poly("u - v", ("u", "v"))
    one = UniSeries([1, 1], 4)
    with pytest.raises(PreconditionError):
        verify_modular_curve(one, one, C, 4)


def test_curve_validation():
    with pytest.raises(ValueError):
        CurvePoly("zero", parse_poly("0", ("u", "v")), ())


def test_hyp_side_pullback_must_vanish():
    side = Side("hyp", upper=(Fr(1, 2),), lower=(1,), pullback="1 + x")
    with pytest.raises(PreconditionError):
        side.series(5)


def test_p11_roots():
    mp = ModularPolynomial()
    H1, H2 = mp.roots(20)
    assert H1.valuation() == 1 and H2.valuation() == 11
    assert mp.evaluate(H1).is_zero() and mp.evaluate(H2).is_zero()
    assert algebraic_A(20).c[0] == 1


def test_p11_identity():
    assert verify_modular_polynomial_11(17)


def test_catalog_results_at_20():
    results = verify_catalog(20)
    assert results and all(r.ok for r in results), [r for r in results if not r.ok]
    assert {"franel-two-pullbacks", "franel-curve", "apery-level5", "P11"} <= {r.tag for r in results}


def test_catalog_tag_filter():
    results = verify_catalog(12, ["level2-doubling"])
    assert [r.tag for r in results] == ["level2-doubling"]


def test_identity_from_json():
    raw = {"tag": "t", "sides": [{"kind": "expr", "text": "(1-x)^(-1)"},
                                 {"kind": "hyp", "upper": ["1"], "lower": [], "pullback": "x"}],
           "target": [1, 1, 1]}
    assert verify_pullback_identity(PullbackIdentity.from_json(raw), 10)
