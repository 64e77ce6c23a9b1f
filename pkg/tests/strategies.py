"""Hypothesis strategies and small builders shared by the test modules."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from superint.opalg import DiffOp
from superint.phase import PhaseExpr
from superint.symcore import GaussRat, RationalExpr
from superint.symcore.variables import HBAR_VAR, q

small_fraction = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
nonzero_fraction = small_fraction.filter(lambda f: f != 0)


@st.composite
def gauss(draw, imaginary=True):
    re = draw(small_fraction)
    im = draw(small_fraction) if imaginary else 0
    return GaussRat(re, im)


def monomial_q(exps) -> RationalExpr:
    r = RationalExpr.one()
    for i, e in enumerate(exps, start=1):
        if e:
            r = r * RationalExpr.var(q(i), e)
    return r


@st.composite
def rational_coeff(draw, d=2, max_deg=2, imaginary=True, hbar=True, max_terms=3):
    """Polynomial in q_1..q_d (and optionally hbar) with Gaussian-rational coefficients."""
    n = draw(st.integers(1, max_terms))
    r = RationalExpr.zero()
    for _ in range(n):
        exps = draw(st.lists(st.integers(0, max_deg), min_size=d, max_size=d))
        c = RationalExpr.const(draw(gauss(imaginary)))
        if hbar and draw(st.booleans()):
            c = c * RationalExpr.var(HBAR_VAR, draw(st.integers(1, 2)))
        r = r + c * monomial_q(exps)
    return r


@st.composite
def phase_poly(draw, d=2, max_q=2, max_p=2, max_terms=4, imaginary=True, hbar=True):
    """Random momentum-polynomial symbol."""
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.lists(st.integers(0, max_p), min_size=d, max_size=d)))
        c = draw(rational_coeff(d, max_q, imaginary, hbar, max_terms=2))
        terms[e] = terms[e] + c if e in terms else c
    return PhaseExpr(d, terms)


@st.composite
def separable_op(draw, d=2, max_order=2, max_terms=3):
    """Additively separable DiffOp with polynomial single-axis coefficients."""
    op = DiffOp.zero(d)
    for _ in range(draw(st.integers(1, max_terms))):
        axis = draw(st.integers(1, d))
        k = draw(st.integers(0, max_order))
        ell = draw(st.integers(0, max_order - k))
        c = RationalExpr.zero()
        for _ in range(draw(st.integers(1, 2))):
            e = [0] * d
            e[axis - 1] = draw(st.integers(0, 3))
            c = c + RationalExpr.const(draw(gauss(False))) * monomial_q(e)
        pe = [0] * d
        pe[axis - 1] = draw(st.integers(0, 2))
        op = op + DiffOp.axis_term(d, axis, PhaseExpr(d, {tuple(pe): c}), k, ell)
    return op


@st.composite
def poly_potential(draw, axis, max_deg=4, min_deg=0):
    """Random polynomial potential summand in ``q_axis``."""
    deg = draw(st.integers(min_deg, max_deg))
    x = RationalExpr.var(q(axis))
    r = RationalExpr.zero()
    for e in range(deg + 1):
        r = r + RationalExpr.const(draw(small_fraction)) * x ** e
    return r
