"""Irreducible factorization of real polynomials, delegated to sympy.

Only denominators are ever factored, and only when a new polynomial enters a
denominator (parsing, antiderivatives, exact-field divisions).  All other
arithmetic stays in the native kernel.
"""

from __future__ import annotations

from functools import lru_cache

import sympy
from gmpy2 import mpq

from .mpoly import MPoly
from .variables import VarId


def _symbols(gens):
    return [sympy.Symbol(f"x{i}") for i in range(len(gens))]


def to_sympy_poly(poly: MPoly):
    """Return ``(sympy.Poly, gens)`` for a real polynomial."""
    poly = poly.stripped()
    if not poly.is_real():
        raise ValueError("only real polynomials are factored")
    syms = _symbols(poly.gens)
    data = {e[:-1]: sympy.Rational(int(c.numerator), int(c.denominator))
            for e, c in poly.terms.items()}
    if not syms:
        return sympy.Poly(data.get((), 0), sympy.Symbol("x0"), domain="QQ"), poly.gens
    return sympy.Poly.from_dict(data, *syms, domain="QQ"), poly.gens


def from_sympy_poly(sp, gens) -> MPoly:
    """Inverse of :func:`to_sympy_poly` for the same generator tuple."""
    terms = {}
    width = len(gens)
    for mono, c in sp.terms():
        c = sympy.Rational(c)
        e = tuple(mono)[:width] + (0,) * (width - len(mono)) + (0,)
        terms[e] = mpq(int(c.p), int(c.q))
    return MPoly(tuple(gens), terms, False).stripped()


@lru_cache(maxsize=4096)
def _factor_cached(key):
    gens, items = key
    poly = MPoly(gens, dict(items), False)
    if poly.is_constant():
        return poly.constant_value().re, ()
    sp, g = to_sympy_poly(poly)
    content, facs = sp.factor_list()
    content = sympy.Rational(content)
    c = mpq(int(content.p), int(content.q))
    out = []
    for f, m in facs:
        fp = from_sympy_poly(f, g)
        lc, monic = fp.primitive_monic()
        c *= lc.re ** m
        out.append((monic, m))
    out.sort(key=lambda fm: factor_sort_key(fm[0]))
    return c, tuple(out)


def factor_sort_key(f: MPoly):
    """Deterministic order for denominator factors: degree, then text."""
    key = f.canonical_key()
    return (f.degree(), tuple(str(g) for g in key[0]), str(f))


def factor_real(poly: MPoly):
    """Factor a nonzero real polynomial over Q.

    Returns
    -------
    content : mpq
        Rational constant.
    factors : tuple of (MPoly, int)
        Irreducible, leading-coefficient-one factors with multiplicities, so
        that ``poly = content * prod(f**m)``.
    """
    if poly.is_zero():
        raise ZeroDivisionError("cannot factor the zero polynomial")
    return _factor_cached(poly.canonical_key())


@lru_cache(maxsize=4096)
def _splits_cached(key) -> bool:
    gens, items = key
    poly = MPoly(gens, dict(items), False)
    sp, _ = to_sympy_poly(poly)
    _, facs = sympy.factor_list(sp.as_expr(), *sp.gens, extension=sympy.I)
    return len(facs) > 1 or any(m > 1 for _, m in facs)


def splits_over_gaussian(f: MPoly) -> bool:
    """True when an irreducible real factor ``f`` factors over Q(i).

    Such a factor can divide a product of two complex polynomials without
    dividing either of them.  Linear factors never split.
    """
    if f.degree() < 2:
        return False
    return _splits_cached(f.canonical_key())


def vars_of(poly: MPoly) -> tuple[VarId, ...]:
    return poly.used_vars()
