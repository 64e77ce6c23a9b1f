"""Differential operators on phase-space symbols.

A :class:`DiffOp` is a finite sum ``sum c_a(q, p) d^a`` with the derivatives
written to the right.  The multi-index ``a`` has ``2d`` entries: the orders in
``q_1..q_d`` followed by the orders in ``p_1..p_d``.
"""

from __future__ import annotations

from itertools import product as iproduct
from math import comb

from gmpy2 import mpq

from ..errors import NotSeparable
from ..phase import HBAR_OVER_I, PhaseExpr
from ..symcore.rational import RationalExpr
from ..symcore.variables import Q


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _below(a):
    return iproduct(*(range(x + 1) for x in a))


class DiffOp:
    """Finite linear differential operator with PhaseExpr coefficients.

    Parameters
    ----------
    d : int
        Number of degrees of freedom.
    terms : dict
        Multi-index (length ``2d``) to nonzero PhaseExpr coefficient.
    """

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms=None):
        self.d = d
        self.terms = {} if terms is None else {k: v for k, v in terms.items() if not v.is_zero()}

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, d):
        return cls(d)

    @classmethod
    def identity(cls, d):
        return cls(d, {(0,) * (2 * d): PhaseExpr.const(1, d)})

    @classmethod
    def monomial(cls, d, coeff, qa=None, pa=None):
        """``coeff * d^qa/dq d^pa/dp``; ``coeff`` may be a number, RationalExpr or PhaseExpr."""
        qa = tuple(qa) if qa else (0,) * d
        pa = tuple(pa) if pa else (0,) * d
        if not isinstance(coeff, PhaseExpr):
            coeff = PhaseExpr.from_rational(RationalExpr.coerce(coeff), d)
        return cls(d, {qa + pa: coeff})

    @classmethod
    def axis_term(cls, d, axis, coeff, k_p=0, l_q=0):
        """Single-axis term ``coeff * d^(k+l)/dp_axis^k dq_axis^l``."""
        qa = [0] * d
        pa = [0] * d
        qa[axis - 1] = l_q
        pa[axis - 1] = k_p
        return cls.monomial(d, coeff, qa, pa)

    # -- arithmetic ------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                s = out[k] + c
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = c
        return DiffOp(self.d, out)

    def __neg__(self):
        return DiffOp(self.d, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Left-multiply every coefficient by a number, RationalExpr or PhaseExpr."""
        if isinstance(c, PhaseExpr):
            return DiffOp(self.d, {k: c * v for k, v in self.terms.items()})
        return DiffOp(self.d, {k: v.scale(c) for k, v in self.terms.items()})

    def __matmul__(self, other):
        return compose_ops(self, other)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return compose_ops(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        out = DiffOp.identity(self.d)
        for _ in range(n):
            out = compose_ops(out, self)
        return out

    def __call__(self, f: PhaseExpr) -> PhaseExpr:
        return apply(self, f)

    def max_order(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def map_coeffs(self, fn):
        return DiffOp(self.d, {k: fn(v) for k, v in self.terms.items()})

    def subs(self, values):
        return self.map_coeffs(lambda c: c.subs(values))

    def axes(self):
        """Per-term axis; raises NotSeparable for multi-axis terms."""
        out = []
        for k, c in self.terms.items():
            out.append(term_axis(self.d, k, c))
        return out

    def is_separable(self) -> bool:
        try:
            self.axes()
        except NotSeparable:
            return False
        return True

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            dd = []
            for i, x in enumerate(k):
                if x:
                    name = f"q{i + 1}" if i < self.d else f"p{i - self.d + 1}"
                    dd.append(f"d{name}" + (f"^{x}" if x > 1 else ""))
            parts.append(f"({self.terms[k]})" + ("*" + "*".join(dd) if dd else ""))
        return " + ".join(parts)

    __repr__ = __str__


def term_axis(d, key, coeff: PhaseExpr) -> int:
    """Axis touched by one term (1-based)."""
    touched = set()
    for i, x in enumerate(key):
        if x:
            touched.add(i % d + 1)
    for e in coeff.terms:
        for i, x in enumerate(e):
            if x:
                touched.add(i + 1)
    for c in coeff.terms.values():
        for v in c.used_vars():
            if v.kind == Q:
                touched.add(v.index)
    if len(touched) > 1:
        raise NotSeparable(f"term touches axes {sorted(touched)}")
    return touched.pop() if touched else 1


def apply(op: DiffOp, f: PhaseExpr) -> PhaseExpr:
    """``sum_terms coeff * d^a f``."""
    d = op.d
    cache = {}
    acc = PhaseExpr.zero(d)
    for k, c in op.terms.items():
        if k not in cache:
            cache[k] = f.diff_multi(k[:d], k[d:])
        g = cache[k]
        if g:
            acc = acc + c * g
    return acc


def compose_ops(A: DiffOp, B: DiffOp) -> DiffOp:
    """Operator product ``A B`` by the generalized Leibniz rule."""
    d = A.d
    acc = {}
    dcache = {}
    for ka, ca in A.terms.items():
        for kb, cb in B.terms.items():
            for g in _below(ka):
                w = 1
                for x, y in zip(ka, g):
                    w *= comb(x, y)
                key = (kb, g)
                if key not in dcache:
                    dcache[key] = cb.diff_multi(g[:d], g[d:]) if any(g) else cb
                db = dcache[key]
                if not db:
                    continue
                coeff = ca * db
                if w != 1:
                    coeff = coeff.scale(w)
                nk = _add(_sub(ka, g), kb)
                acc.setdefault(nk, []).append(coeff)
    out = {}
    for k, lst in acc.items():
        s = lst[0]
        for x in lst[1:]:
            s = s + x
        out[k] = s
    return DiffOp(d, out)


def commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    return compose_ops(A, B) - compose_ops(B, A)


def L_op(d: int) -> DiffOp:
    """``L = sum_i p_i d/dq_i``."""
    op = DiffOp.zero(d)
    for i in range(1, d + 1):
        op = op + DiffOp.axis_term(d, i, PhaseExpr.momentum(i, d), 0, 1)
    return op


def a0_op(d: int) -> DiffOp:
    """``a_0 = (hbar/2I) sum_i d^2/dq_i dp_i``."""
    c = HBAR_OVER_I.scale(mpq(1, 2))
    op = DiffOp.zero(d)
    for i in range(1, d + 1):
        op = op + DiffOp.axis_term(d, i, c, 1, 1)
    return op
