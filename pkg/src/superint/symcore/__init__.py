"""Exact arithmetic kernel: Gaussian rationals, polynomials, rational functions."""

from .gauss import GaussRat
from .grammar import parse_rational
from .integrate import antiderivative, build_Q
from .mpoly import MPoly
from .rational import RationalExpr
from .variables import HBAR_VAR, VarId, from_name, p, param, q


def normalize(r: RationalExpr) -> RationalExpr:
    """Re-derive the canonical form of ``r`` from its numerator and denominator."""
    return RationalExpr.from_fraction(r.num, r.denominator())


def diff(r: RationalExpr, v: VarId) -> RationalExpr:
    return r.diff(v)


__all__ = [
    "GaussRat", "MPoly", "RationalExpr", "VarId", "HBAR_VAR",
    "q", "p", "param", "from_name", "normalize", "diff",
    "antiderivative", "build_Q", "parse_rational",
]
