import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import phase_poly, poly_potential
from superint.corpus import load_corpus, parse_phase
from superint.errors import NonPolynomialMomenta
from superint.phase import (PhaseExpr, bracket, compose, determining_check, hamiltonian, poisson, star,
                            sym_product)
from superint.symcore import RationalExpr, parse_rational
from superint.symcore.variables import HBAR_VAR

q1, q2, p1, p2 = sp.symbols("q1 q2 p1 p2")


def P(text, d=2):
    return parse_phase(text, d)


def to_sympy(f: PhaseExpr):
    return sp.sympify(str(f).replace("^", "**")) if f else sp.Integer(0)


def classical(f: PhaseExpr) -> PhaseExpr:
    return f.subs({HBAR_VAR: 0})


SW_V = [parse_rational("b1*q1^2 + b2/q1^2"), parse_rational("b1*q2^2 + b3/q2^2")]
SW_X = P("anti(m12, m12) + 1/2*hbar^2 + 2*b2*q2^2/q1^2 + 2*b3*q1^2/q2^2")


# -- examples -----------------------------------------------------------------

def test_bracket_examples():
    assert bracket(P("q1*p1"), P("p1^2/2")) == P("p1^2")
    assert bracket(P("p1"), P("b*q1^3")) == P("-3*b*q1^2")
    assert bracket(SW_X, hamiltonian(SW_V, 2)).is_zero()


def test_bracket_rejects_laurent_input():
    with pytest.raises(NonPolynomialMomenta):
        bracket(P("1/p1"), P("p1"))
    with pytest.raises(NonPolynomialMomenta):
        star(P("q1/p2"))


def test_poisson_examples():
    assert poisson(P("q1"), P("p1")) == P("1")
    assert poisson(P("m12"), P("p1^2 + p2^2")).is_zero()


def test_star_examples():
    assert star(P("p1")) == P("p1")
    assert star(P("q1*p1")) == P("q1*p1 - I*hbar")


def test_compose_and_sym_product_examples():
    assert compose(P("p1"), P("q1")) == P("q1*p1 - I*hbar")
    assert sym_product(P("p1"), P("p2")) == P("p1*p2")
    m2 = sym_product(P("m12"), P("m12"))
    assert star(m2) == m2
    # the plain symbol product m12^2 is not the symbol of a Hermitian operator
    m12 = P("m12")
    assert star(m12 * m12) != m12 * m12


def test_model_1_integral_from_symmetrised_product():
    V = [parse_rational("b*q1^2"), parse_rational("b*q2^2")]
    H1 = P("p1^2/2 + b*q1^2")
    H2 = P("p2^2/2 + b*q2^2")
    X = sym_product(H1 - H2, P("m12"))
    assert X.degree() == 3
    assert bracket(X, hamiltonian(V, 2)).is_zero()
    assert star(X) == X


def test_homogeneous_parts_examples():
    f = P("q1^2*p2^2 - 2*q1*q2*p1*p2 + q2^2*p1^2 + c")
    parts = f.homogeneous_parts()
    assert [g.degree() for g in parts] == [2, 0]
    assert parts[1] == P("c")
    assert PhaseExpr.zero(2).homogeneous_parts() == []
    X0, X1, X2 = SW_X.homogeneous_parts()
    assert X0 == P("q2^2*p1^2 + q1^2*p2^2 - 2*q1*q2*p1*p2")
    assert X1 == P("I*hbar*(q1*p1 + q2*p2)")
    assert X2 == P("1/2*hbar^2 + 2*b2*q2^2/q1^2 + 2*b3*q1^2/q2^2")


def test_determining_check_examples():
    res = determining_check(SW_X, SW_V)
    assert all(r.is_zero() for r in res)
    H = hamiltonian(SW_V, 2)
    assert all(r.is_zero() for r in determining_check(H, SW_V))
    # k = 1 slice by hand: sum p_i dX1/dq_i + (hbar/2I) sum d^2 X0/dq_i^2
    X0, X1, _ = SW_X.homogeneous_parts()
    lhs = PhaseExpr.zero(2)
    for i in (1, 2):
        lhs = lhs + PhaseExpr.momentum(i, 2) * X1.diff_q(i) + X0.diff_q(i, 2).scale(P("-I*hbar/2").terms[(0, 0)])
    assert lhs.is_zero()
    assert res[1] == lhs


def test_determining_check_matches_bracket_on_corpus():
    for m in load_corpus():
        for s in range(m.sample_count()):
            ctx = m.context({}, s)
            V = ctx.potentials()
            H = ctx.hamiltonian()
            for c in m.integrals:
                X = ctx.lookup(c.id)
                assert all(r.is_zero() for r in determining_check(X, V)), (m.name, c.id)
                bad = X + P("q1*p2^2")
                assert not bracket(bad, H).is_zero()
                assert not all(r.is_zero() for r in determining_check(bad, V))


def test_star_fixes_corpus_integrals():
    for m in load_corpus():
        ctx = m.context({}, 0)
        for c in m.integrals:
            X = ctx.lookup(c.id)
            assert star(X) == X, (m.name, c.id)


# -- properties -----------------------------------------------------------------

@given(phase_poly(), phase_poly())
@settings(max_examples=100)
def test_bracket_antisymmetry(f, g):
    assert bracket(f, g) == -bracket(g, f)


@st.composite
def separable_H(draw):
    V = [draw(poly_potential(1, 4)), draw(poly_potential(2, 4))]
    return hamiltonian(V, 2)


@given(phase_poly(max_p=3), separable_H())
@settings(max_examples=200)
def test_bracket_at_hbar_zero_is_poisson(f, H):
    assert classical(bracket(f, H)) == poisson(classical(f), classical(H))


@given(phase_poly(hbar=False, max_p=3), phase_poly(hbar=False, max_p=3))
@settings(max_examples=100)
def test_poisson_matches_sympy_expansion(f, g):
    F, G = to_sympy(f), to_sympy(g)
    expected = sum(sp.diff(F, x) * sp.diff(G, y) - sp.diff(F, y) * sp.diff(G, x)
                   for x, y in ((q1, p1), (q2, p2)))
    assert sp.expand(to_sympy(poisson(f, g)) - expected) == 0


@given(phase_poly(), phase_poly())
@settings(max_examples=100)
def test_mccoy_identity(f, g):
    ihbar = PhaseExpr.from_rational(parse_rational("I*hbar"), 2)
    assert compose(f, g) - compose(g, f) == ihbar * bracket(f, g)


@given(phase_poly(max_p=3))
@settings(max_examples=100)
def test_star_involution(f):
    assert star(star(f)) == f


@given(phase_poly(), phase_poly())
@settings(max_examples=100)
def test_star_anti_homomorphism(f, g):
    assert star(compose(f, g)) == compose(star(g), star(f))


@given(phase_poly(max_terms=3), phase_poly(max_terms=3), phase_poly(max_terms=3))
@settings(max_examples=50)
def test_compose_associative(f, g, h):
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@given(phase_poly(max_p=3, max_terms=6))
@settings(max_examples=100)
def test_homogeneous_parts_recompose(f):
    parts = f.homogeneous_parts()
    total = PhaseExpr.zero(2)
    for g in parts:
        total = total + g
    assert total == f
    degs = [g.degree() for g in parts]
    assert degs == sorted(set(degs), reverse=True)


@given(phase_poly(), phase_poly())
@settings(max_examples=100)
def test_sym_product_is_hermitian_for_hermitian_factors(f, g):
    a = (f + star(f)).scale(RationalExpr.const(1) / 2)
    b = (g + star(g)).scale(RationalExpr.const(1) / 2)
    s = sym_product(a, b)
    assert star(s) == s


@given(phase_poly(max_p=3, max_terms=6))
@settings(max_examples=100)
def test_printer_round_trip(f):
    assert P(str(f)) == f
