import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import phase_poly, poly_potential, separable_op
from superint.corpus import parse_phase
from superint.errors import NotSeparable, UnsupportedOrder
from superint.opalg import (DiffOp, L_op, a0_op, apply, build_a, build_aij, build_W, commutator, compose_ops,
                            invert_ad_L, power_commutator_check, printed_a12, printed_a21, verify_a)
from superint.opalg.ladder import W_series, ad_L_rhs, defining_rhs_aij, power_commutator_sides
from superint.phase import PhaseExpr
from superint.symcore import RationalExpr, parse_rational
from superint.symcore.variables import HBAR_VAR

D = 2


def P(text):
    return parse_phase(text, D)


def term(axis, coeff, k_p=0, l_q=0):
    return DiffOp.axis_term(D, axis, P(coeff) if isinstance(coeff, str) else coeff, k_p, l_q)


SW_V = [parse_rational("b1*q1^2 + b2/q1^2"), parse_rational("b1*q2^2 + b3/q2^2")]
SW_X = P("anti(m12, m12) + 1/2*hbar^2 + 2*b2*q2^2/q1^2 + 2*b3*q1^2/q2^2")
HALF_HBAR_OVER_I = P("-I*hbar/2")


# -- apply and products -----------------------------------------------------

def test_apply_examples():
    assert apply(L_op(D), P("m12")).is_zero()
    assert apply(a0_op(D), P("q1*p1")) == HALF_HBAR_OVER_I


def test_commutator_L_a0():
    expected = term(1, HALF_HBAR_OVER_I, 0, 2) + term(2, HALF_HBAR_OVER_I, 0, 2)
    assert commutator(L_op(D), a0_op(D)) == -expected


@given(st.lists(phase_poly(max_q=3, max_p=3, max_terms=3), min_size=20, max_size=20))
@settings(max_examples=5)
def test_commutator_L_with_second_p_derivative(tests):
    lhs = commutator(L_op(D), term(1, "1", 2, 0))
    rhs = term(1, "-2", 1, 1)
    assert lhs == rhs
    L = L_op(D)
    d2 = term(1, "1", 2, 0)
    for f in tests:
        direct = apply(L, apply(d2, f)) - apply(d2, apply(L, f))
        assert apply(lhs, f) == direct


@given(separable_op())
@settings(max_examples=100)
def test_self_commutator_vanishes(A):
    assert commutator(A, A).is_zero()


@given(separable_op(), separable_op(), phase_poly(max_q=3, max_p=3))
@settings(max_examples=100)
def test_composition_agrees_with_successive_application(A, B, f):
    assert apply(compose_ops(A, B), f) == apply(A, apply(B, f))


@given(separable_op(), separable_op())
@settings(max_examples=100)
def test_separable_ops_closed_under_commutator(A, B):
    assert A.is_separable() and B.is_separable()
    assert commutator(A, B).is_separable()


# -- nilpotency and inversion -----------------------------------------------------

def test_nilpotency_of_ad_L():
    L = L_op(D)
    for axis in (1, 2):
        for k in range(5):
            for ell in range(5 - k):
                op = term(axis, "1", k, ell)
                for _ in range(k + 1):
                    prev, op = op, commutator(L, op)
                assert op.is_zero(), (axis, k, ell)
                # the bound is sharp: ad_L^k is not yet zero
                assert not prev.is_zero()


def test_invert_ad_L_examples():
    G = invert_ad_L(term(1, "2*q1", 1, 0))
    assert G == term(1, "q1^2/p1", 1, 0) + term(1, "q1^3/(3*p1^2)", 0, 1)
    G0 = invert_ad_L(term(1, "q1^4 - 5", 0, 1))
    assert G0 == term(1, "(q1^5/5 - 5*q1)/p1", 0, 1)
    with pytest.raises(NotSeparable):
        invert_ad_L(term(1, "q2", 1, 0))


@given(separable_op(max_order=3, max_terms=4))
@settings(max_examples=100)
def test_invert_ad_L_round_trip(F):
    assert commutator(L_op(D), invert_ad_L(F)) == F


def test_invert_ad_L_reproduces_a_j_on_sw():
    for j in (1, 2):
        assert invert_ad_L(ad_L_rhs(j, SW_V)) == build_a(j, SW_V)


# -- a_j ------------------------------------------------------------------------

def test_a0_independent_of_potential():
    assert build_a(0, SW_V) == a0_op(D) == build_a(0, [RationalExpr.zero()] * 2)


def test_a1_for_sw_is_the_four_term_operator():
    expected = (term(1, "(b1*q1^4 - 3*b2)/(3*q1*p1^2)", 0, 1) + term(1, "(b1*q1^4 + b2)/(q1^2*p1)", 1, 0)
                + term(2, "(b1*q2^4 - 3*b3)/(3*q2*p2^2)", 0, 1) + term(2, "(b1*q2^4 + b3)/(q2^2*p2)", 1, 0))
    assert build_a(1, SW_V) == expected


def test_a2_vanishes_without_potential():
    assert build_a(2, [RationalExpr.zero()] * 2).is_zero()


def test_verify_a_examples_and_negative_control():
    V = [parse_rational("b*q1^2"), RationalExpr.zero()]
    assert verify_a(1, V)
    assert verify_a(0, V)
    a1 = build_a(1, V)
    key = next(iter(a1.terms))
    corrupted = DiffOp(D, {**a1.terms, key: -a1.terms[key]})
    assert not verify_a(1, V, corrupted)


@given(poly_potential(1, 5, 1), poly_potential(2, 5, 1))
@settings(max_examples=10)
def test_verify_a_random_polynomial_potentials(v1, v2):
    for j in range(4):
        assert verify_a(j, [v1, v2])


# -- a_{i,j} ----------------------------------------------------------------------

def test_printed_a21_a12_solve_their_defining_relations():
    L = L_op(D)
    for V in (SW_V, [parse_rational("b*q1^2"), parse_rational("c*q2^4 + q2")]):
        assert commutator(L, printed_a21(V)) == defining_rhs_aij(2, 1, V)
        assert commutator(L, printed_a12(V)) == defining_rhs_aij(1, 2, V)
        assert commutator(L, build_aij(2, 1, V, printed=False)) == defining_rhs_aij(2, 1, V)


def test_a21_drift_coefficient_for_quadratic_potential():
    V = [parse_rational("b*q1^2"), RationalExpr.zero()]
    a21 = printed_a21(V)
    key = (1, 0, 0, 0)
    # (3 V int V - 3 int V^2) / (2 p1^4) with V = b q1^2
    assert a21.terms[key] == P("(3*b*q1^2*b*q1^3/3 - 3*b^2*q1^5/5)/(2*p1^4)")


def test_a12_vanishes_at_hbar_zero():
    op = printed_a12(SW_V)
    classical = DiffOp(D, {k: c.subs({HBAR_VAR: 0}) for k, c in op.terms.items()})
    assert classical.is_zero()


def test_a11_relation():
    # [L, a_{1,1}] equals the s^1 coefficient of 1/2 [A, [L, A]]
    V = [parse_rational("b*q1^3 + q1"), parse_rational("c*q2^2")]
    a0, a1 = build_a(0, V), build_a(1, V)
    L = L_op(D)
    rhs = (commutator(a0, commutator(L, a1)) + commutator(a1, commutator(L, a0))).scale(mpq(1, 2))
    assert defining_rhs_aij(1, 1, V) == rhs
    assert commutator(L, build_aij(1, 1, V)) == rhs


# -- power identity --------------------------------------------------------------------

def test_power_identity_small_cases():
    tests = [P("q1^3*p1^2 + p2"), P("q1*q2*p1^3")]
    assert power_commutator_check(term(1, "q1^2 + 1", 1, 1), 1, tests)
    a1 = build_a(1, [parse_rational("q1^2"), RationalExpr.zero()])
    assert power_commutator_check(a1, 2, tests)


@given(separable_op(d=1, max_order=2, max_terms=2), st.integers(1, 3),
       st.lists(phase_poly(d=1, max_q=3, max_p=4, max_terms=2), min_size=2, max_size=2))
@settings(max_examples=20)
def test_power_identity_random_single_axis(A, k, tests):
    assert power_commutator_check(A, k, tests)


def test_power_identity_detects_wrong_weights():
    A = term(1, "q1^2/p1", 1, 0)
    lhs, rhs = power_commutator_sides(A, 3)
    assert lhs == rhs
    assert lhs != rhs + commutator(L_op(D), compose_ops(A, A))


# -- consolidated chain and W_k ----------------------------------------------------------

def test_consolidated_chain_for_sw():
    n = SW_X.degree()
    parts = [SW_X.part_of_degree(n - k) for k in range(n + 2)]
    L = L_op(D)
    LA = [commutator(L, build_a(i, SW_V)) for i in range(n + 2)]
    for k in range(n + 2):
        rhs = PhaseExpr.zero(D)
        for i in range(k):
            rhs = rhs + apply(LA[i], parts[k - 1 - i])
        assert apply(L, parts[k]) == rhs, k


def test_W1_on_m12_squared_gives_fractional_terms():
    W1 = build_W(1, SW_V)
    Z0 = P("m12^2")
    expected = P("-1/2*hbar^2 + 2*b1*m12^4/(3*p1^2*p2^2)"
                 " + 2*(q1^2*p2^2 - q2^2*p1^2)*(b3/(q2^2*p2^2) - b2/(q1^2*p1^2))")
    assert apply(W1, Z0) == expected


def test_W2_routes_agree_on_test_functions():
    V = [parse_rational("b*q1^2 + c/q1^2"), parse_rational("q2^4 - 2*q2")]
    closed = build_W(2, V, "closed")
    series = build_W(2, V, "series")
    assert closed == series
    fs = [P(t) for t in ["m12^2", "p1^4", "p1^2*p2^2", "m12*p1*p2", "p1^3*m12", "q1*p1^2",
                         "q2^2*p2^3", "m12^3*p1", "p1*p2", "hbar*q1*q2*p1*p2^2",
                         "p2^4 + q1*p1", "m12^4", "q1^3*p2", "p1^5", "I*q2*p1*p2^2",
                         "m12^2*p1^2", "q1*q2", "p2^2", "q1^2*p1^3*p2", "m12*p2^3"]]
    for f in fs:
        assert apply(closed, f) == apply(series, f)


def test_W_k_vanish_without_potential_and_hbar():
    V = [RationalExpr.zero()] * 2
    for k in (1, 2, 3):
        W = build_W(k, V)
        classical = DiffOp(D, {key: c.subs({HBAR_VAR: 0}) for key, c in W.terms.items()})
        assert classical.is_zero(), k
    assert build_W(0, SW_V) == DiffOp.identity(D)
    with pytest.raises(UnsupportedOrder):
        build_W(4, SW_V)


def test_W_series_level_one_matches_closed_form():
    V = [parse_rational("b*q1^3"), parse_rational("q2^2")]
    assert W_series(V, 1)[1] == build_W(1, V, "closed")


def test_W2_with_inverted_aij_differs_by_kernel_of_ad_L():
    V = [parse_rational("b*q1^2 + c/q1^2"), parse_rational("q2^4 - 2*q2")]
    other = W_series(V, 2, aij_override={})[2]
    diff = other - build_W(2, V)
    assert not diff.is_zero()
    assert commutator(L_op(D), diff).is_zero()
