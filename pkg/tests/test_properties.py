"""Property-based checks of the algebraic laws the package relies on."""

from fractions import Fraction as Fr

from hypothesis import given, settings
from hypothesis import strategies as st

from diagmod.arith import MultiPoly
from diagmod.cli import Node, parse, to_text
from diagmod.dfinite import DiffOp, adjoint, op_mul
from diagmod.diagonal import RationalFunctionRep, diagonal
from diagmod.linalg import nullspace_qq, nullspace_qq_small
from diagmod.series import MultiSeries, UniSeries

ORDER = 8
settings.register_profile("pkg", deadline=None, max_examples=60)
settings.load_profile("pkg")

small = st.integers(-6, 6)
rats = st.builds(Fr, st.integers(-9, 9), st.integers(1, 5))


def series_with_const(c):
    return st.lists(rats, min_size=ORDER, max_size=ORDER).map(lambda t: UniSeries([c] + t, ORDER))


any_series = st.lists(rats, min_size=ORDER + 1, max_size=ORDER + 1).map(lambda t: UniSeries(t, ORDER))
unit_series = series_with_const(Fr(1))
tangent_series = st.lists(rats, min_size=ORDER - 1, max_size=ORDER - 1).map(
    lambda t: UniSeries([0, 1] + t, ORDER))


@given(unit_series)
def test_sqrt_squares_back(f):
    s = f.sqrt()
    assert s * s == f


@given(unit_series)
def test_inverse(f):
    assert f * f.inv() == UniSeries.one(ORDER)


@given(unit_series)
def test_exp_of_log(f):
    assert f.log().exp().agrees(f, ORDER - 1)


@given(unit_series, st.sampled_from([Fr(1, 3), Fr(-1, 2), Fr(3, 4)]))
def test_rational_power_multiplies(f, a):
    assert (f.power(a) * f.power(1 - a)).agrees(f)


@given(tangent_series)
def test_reversion_is_involution(f):
    g = f.reversion()
    assert g.reversion() == f
    assert f.compose(g) == UniSeries.monomial(1, ORDER)


@given(any_series, any_series, any_series)
def test_mul_associative_and_distributive(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h


@given(st.lists(small, min_size=ORDER + 1, max_size=ORDER + 1),
       st.lists(small, min_size=ORDER + 1, max_size=ORDER + 1))
def test_hadamard_of_integer_series_is_integer(a, b):
    f, g = UniSeries(a, ORDER), UniSeries(b, ORDER)
    h = f.hadamard(g)
    assert h.is_integral() and h == g.hadamard(f)


@given(any_series, st.sampled_from([3, 5, 7, 11]))
def test_reduction_mod_p_is_a_ring_map(f, p):
    g = UniSeries([Fr(k + 1, 1) for k in range(ORDER + 1)], ORDER)
    fr = [c for c in f.c if c.denominator % p == 0]
    if fr:
        return
    assert (f * g).reduce_mod_p(p) == f.reduce_mod_p(p) * g.reduce_mod_p(p)


@given(st.lists(small, min_size=6, max_size=6), st.lists(small, min_size=6, max_size=6))
def test_diagonal_of_separated_product_is_hadamard(a, b):
    names = ("u", "v")
    P = MultiPoly(names, {(0, 0): 1, (1, 0): a[0], (2, 0): a[1]})
    Q = MultiPoly(names, {(0, 0): 1, (0, 1): b[0], (0, 2): b[1]})
    R = RationalFunctionRep.from_factors(MultiPoly.const(names, 1), [P, Q])
    f = UniSeries.from_rational([1], [1, a[0], a[1]], 6)
    g = UniSeries.from_rational([1], [1, b[0], b[1]], 6)
    assert diagonal(R, 6) == f.hadamard(g)


@st.composite
def unit_polys(draw):
    names = ("a", "b", "c")
    terms = {(0, 0, 0): draw(st.sampled_from([1, -1]))}
    for _ in range(draw(st.integers(1, 4))):
        e = tuple(draw(st.integers(0, 2)) for _ in names)
        if any(e):
            terms[e] = draw(small)
    return MultiPoly(names, terms)


@given(unit_polys())
def test_diagonal_integral_when_denominator_is_unit(Q):
    d = diagonal(RationalFunctionRep(MultiPoly.const(Q.vars, 1), Q), 5)
    assert d.is_integral()
    F = MultiSeries.from_poly(Q, [5, 5, 5]).inv()
    assert d == F.diag_extract(5)


polys = st.lists(small, min_size=1, max_size=3)
operators = st.lists(polys, min_size=1, max_size=3).filter(lambda a: any(any(p) for p in a)).map(DiffOp)


@given(operators)
def test_adjoint_is_involution(L):
    assert adjoint(adjoint(L)) == L


@given(operators, operators, operators)
@settings(max_examples=30)
def test_operator_product_associative(A, B, C):
    assert op_mul(op_mul(A, B), C) == op_mul(A, op_mul(B, C))


@given(operators, operators, unit_series)
@settings(max_examples=30)
def test_operator_product_acts_as_composition(A, B, f):
    lhs = op_mul(A, B).apply(f)
    rhs = A.apply(B.apply(f))
    n = min(lhs.order, rhs.order)
    assert lhs.agrees(rhs, n)


@given(st.lists(st.lists(rats, min_size=4, max_size=4), min_size=1, max_size=4))
def test_rational_kernel_matches_reference(A):
    assert nullspace_qq(A) == nullspace_qq_small(A)


leaf = st.one_of(st.sampled_from(["x", "y", "z1"]), st.integers(0, 30).map(str),
                 st.tuples(st.integers(1, 9), st.integers(2, 9)).map(lambda t: f"{t[0]}/{t[1]}"))


def combine(children):
    ops = st.sampled_from(["+", "-", "*"])
    return st.one_of(
        st.tuples(children, ops, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(1, 4)).map(lambda t: f"({t[0]})^{t[1]}"),
        children.map(lambda c: f"sqrt({c})"),
    )


@given(st.recursive(leaf, combine, max_leaves=8))
def test_cli_parse_roundtrip(text):
    t = parse(text)
    assert isinstance(t, Node)
    assert parse(to_text(t)) == t
