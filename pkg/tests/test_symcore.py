from fractions import Fraction

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import gauss, rational_coeff, small_fraction
from superint.errors import DenominatorZero, LogObstruction, UnsupportedOrder
from superint.symcore import (GaussRat, MPoly, RationalExpr, antiderivative, build_Q, normalize,
                              parse_rational)
from superint.symcore.factoring import factor_real
from superint.symcore.rational import format_rational
from superint.symcore.variables import HBAR_VAR, VarId, from_name, p, param, q

Q1, Q2, HB, B = sp.symbols("q1 q2 hbar b")


def to_sympy(r: RationalExpr):
    return sp.sympify(format_rational(r).replace("^", "**"))


def X(i=1):
    return RationalExpr.var(q(i))


# -- GaussRat ---------------------------------------------------------------

def test_gauss_canonical_lowest_terms():
    z = GaussRat(Fraction(4, -6), Fraction(10, 5))
    assert (z.re, z.im) == (mpq(-2, 3), mpq(2))
    assert z.re.denominator > 0


def test_gauss_imaginary_unit_squares_to_minus_one():
    i = GaussRat(0, 1)
    assert i * i == GaussRat(-1)


@given(gauss(), gauss(), gauss())
@settings(max_examples=100)
def test_gauss_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(gauss().filter(lambda z: z != GaussRat(0)))
@settings(max_examples=100)
def test_gauss_inverse(z):
    assert z * z.inverse() == GaussRat(1)
    assert z.conjugate().conjugate() == z


# -- variables and polynomials ----------------------------------------------

def test_variable_order_is_total_and_deterministic():
    vs = [param("b2"), HBAR_VAR, p(2), q(2), p(1), q(1), param("a")]
    assert sorted(vs) == [q(1), q(2), p(1), p(2), HBAR_VAR, param("a"), param("b2")]
    assert from_name("q2") == q(2) and from_name("hbar") == HBAR_VAR
    assert isinstance(from_name("beta"), VarId)


def test_mpoly_zero_has_no_terms():
    x = MPoly.var(q(1))
    assert (x - x).is_zero()
    assert not (x - x).terms


def test_mpoly_degree_and_leading_term_deterministic():
    f = parse_rational("3*q1^2*q2 + q2^4 - 7").num
    g = parse_rational("-7 + q2^4 + 3*q2*q1^2").num
    assert f == g
    assert f.degree() == 4 and f.degree(q(1)) == 2
    assert f.leading_term() == g.leading_term()
    assert str(f) == str(g)


# -- RationalExpr -----------------------------------------------------------

def test_normalize_cancels_common_factor():
    r = parse_rational("(2*q1^2 - 2*b)/(q1^2 - b)")
    assert r == RationalExpr.const(2)
    assert normalize(r) == r
    assert r.den == ()


def test_denominator_zero_raises():
    with pytest.raises(DenominatorZero):
        X() / RationalExpr.zero()
    with pytest.raises(DenominatorZero):
        parse_rational("q1/(q2 - q2)")


def test_denominator_factors_squarefree_and_coprime():
    r = parse_rational("1/((q1^2 - 1)^2*(q1 + 1)*q2^3)")
    factors = [f for f, _ in r.den]
    assert len(factors) == len(set(map(str, factors)))
    mults = {str(f): m for f, m in r.den}
    assert mults == {"q1 - 1": 2, "q1 + 1": 3, "q2": 3}


@given(rational_coeff(max_deg=2), rational_coeff(max_deg=2), rational_coeff(max_deg=2, hbar=False))
@settings(max_examples=100)
def test_field_operations_match_sympy(a, b, c):
    if c.is_zero():
        return
    lhs = (a * b + c) / c - a / (c * c)
    expected = sp.cancel(sp.together((to_sympy(a) * to_sympy(b) + to_sympy(c)) / to_sympy(c)
                                     - to_sympy(a) / to_sympy(c) ** 2))
    assert sp.simplify(to_sympy(lhs) - expected) == 0


@given(rational_coeff(max_deg=2), rational_coeff(max_deg=2, hbar=False))
@settings(max_examples=100)
def test_equal_values_have_identical_representations(a, c):
    if c.is_zero():
        return
    r1 = (a * c) / c
    r2 = a + c / c - RationalExpr.one()
    assert r1 == a and r2 == a
    assert format_rational(r1) == format_rational(a)
    assert hash(r1) == hash(a)


@given(rational_coeff(max_deg=3, hbar=False), st.integers(1, 2))
@settings(max_examples=100)
def test_gcd_of_numerator_and_denominator_is_trivial(a, k):
    r = a / (X(1) - RationalExpr.const(1)) ** k
    for f, _ in r.den:
        assert not f.divides(r.num) or r.num.is_zero()


def test_parse_format_round_trip_examples():
    for text in ["2*b2*q2^2/q1^2", "1/2*hbar^2 - 3*I*q1*q2", "(q1^3 + 2*b)/(q1^3 - b)^2", "-q1^4/3"]:
        r = parse_rational(text)
        assert parse_rational(format_rational(r)) == r
        assert sp.simplify(to_sympy(r) - sp.sympify(text.replace("^", "**"))) == 0


@given(rational_coeff(max_deg=3), rational_coeff(max_deg=2, hbar=False))
@settings(max_examples=100)
def test_printer_round_trip(a, c):
    r = a if c.is_zero() else a / c
    assert parse_rational(format_rational(r)) == r


def test_factor_real_splits_into_irreducibles():
    f = parse_rational("q1^4 - 1").num
    parts = sorted(str(g) for g, _ in factor_real(f)[1])
    assert parts == ["q1 + 1", "q1 - 1", "q1^2 + 1"]


# -- antiderivatives -------------------------------------------------------------

def test_antiderivative_examples():
    assert antiderivative(parse_rational("b*q1^2 + c/q1^2"), q(1)) == parse_rational("b*q1^3/3 - c/q1")
    assert antiderivative(RationalExpr.zero(), q(1)).is_zero()
    # derivative of a squared denominator integrates back without logs
    r = parse_rational("2*q1/(q1^2 + 1)^2")
    assert antiderivative(r, q(1)) == parse_rational("-1/(q1^2 + 1)")


def test_log_obstruction_reports_residue():
    with pytest.raises(LogObstruction) as info:
        antiderivative(parse_rational("3/q1 + q1"), q(1))
    (factor, res), = info.value.residues
    assert str(factor) == "q1" and res == RationalExpr.const(3)
    with pytest.raises(LogObstruction):
        antiderivative(parse_rational("1/(q1^2 + 1)"), q(1))


@st.composite
def log_free(draw):
    """Derivative of a random rational function of q1: integrable without logs."""
    num = draw(rational_coeff(d=1, max_deg=3, hbar=False, imaginary=False))
    roots = draw(st.lists(small_fraction, min_size=0, max_size=2))
    den = RationalExpr.one()
    for r in roots:
        den = den * (X(1) - RationalExpr.const(r)) ** draw(st.integers(1, 2))
    return (num / den).diff(q(1))


@given(log_free())
@settings(max_examples=100)
def test_antiderivative_differentiates_back(r):
    F = antiderivative(r, q(1))
    assert F.diff(q(1)) == r


@given(log_free(), small_fraction)
@settings(max_examples=100)
def test_antiderivative_detects_added_simple_pole(r, c):
    pole = RationalExpr.one() / (X(1) - RationalExpr.const(c))
    with pytest.raises(LogObstruction):
        antiderivative(r + pole, q(1))


def test_build_Q_examples_and_cap():
    V = parse_rational("b*q1^2 + c/q1^2")
    assert build_Q(V, 1, 1) == parse_rational("b*q1^3/3 - c/q1")
    assert build_Q(V, 1, 2).diff(q(1)) == V * V
    Q3 = build_Q(V, 1, 3)
    dV = V.diff(q(1))
    assert Q3.diff(q(1)) == V ** 3 + RationalExpr.var(HBAR_VAR, 2) * dV * dV * mpq(1, 4)
    with pytest.raises(UnsupportedOrder):
        build_Q(V, 1, 6)
    with pytest.raises(LogObstruction):
        build_Q(parse_rational("1/q1"), 1, 1)
