"""Phase-space symbols: Laurent polynomials in the momenta.

A :class:`PhaseExpr` maps momentum exponent vectors (possibly negative) to
:class:`RationalExpr` coefficients in positions, ``hbar`` and parameters.
Operator products use the standard ordering (momenta to the right).
"""

from __future__ import annotations

from itertools import product as iproduct
from math import factorial

from gmpy2 import mpq

from .errors import DenominatorZero, NonPolynomialMomenta
from .symcore.gauss import GaussRat
from .symcore.mpoly import format_poly
from .symcore.rational import RationalExpr, format_rational, rsum
from .symcore.variables import HBAR_VAR, VarId, p, q

_I = RationalExpr.imag_unit()
_HBAR = RationalExpr.var(HBAR_VAR)
# hbar / sqrt(-1) = -I*hbar
HBAR_OVER_I = -(_I * _HBAR)


def _hbar_over_i_pow(k: int) -> RationalExpr:
    return HBAR_OVER_I ** k


def _mfact(alpha) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


class PhaseExpr:
    """Finite Laurent polynomial in ``p_1..p_d`` with rational coefficients.

    Parameters
    ----------
    d : int
        Number of degrees of freedom.
    terms : dict
        Momentum exponent tuple to nonzero RationalExpr.
    """

    __slots__ = ("d", "terms", "_hash")

    def __init__(self, d: int, terms=None):
        self.d = d
        self.terms = {} if terms is None else {k: v for k, v in terms.items() if not v.is_zero()}
        self._hash = None

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, d: int):
        return cls(d, {})

    @classmethod
    def from_rational(cls, r, d: int):
        r = RationalExpr.coerce(r)
        return cls(d, {(0,) * d: r})

    @classmethod
    def const(cls, c, d: int):
        return cls.from_rational(RationalExpr.const(c), d)

    @classmethod
    def momentum(cls, i: int, d: int, power: int = 1):
        e = [0] * d
        e[i - 1] = power
        return cls(d, {tuple(e): RationalExpr.one()})

    @classmethod
    def position(cls, i: int, d: int):
        return cls.from_rational(RationalExpr.var(q(i)), d)

    @classmethod
    def angular(cls, i: int, j: int, d: int):
        """``m_ij = q_i p_j - q_j p_i``."""
        return (cls.position(i, d) * cls.momentum(j, d)
                - cls.position(j, d) * cls.momentum(i, d))

    def _coerce(self, other):
        if isinstance(other, PhaseExpr):
            if other.d != self.d:
                raise ValueError("dimension mismatch")
            return other
        return PhaseExpr.from_rational(other, self.d)

    # -- inspection ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_polynomial(self) -> bool:
        return all(min(e) >= 0 for e in self.terms) if self.terms else True

    def require_polynomial(self, what="operation"):
        if not self.is_polynomial():
            raise NonPolynomialMomenta(f"{what} needs a symbol polynomial in the momenta")

    def degree(self) -> int:
        """Highest total momentum degree (-1 for zero)."""
        return max((sum(e) for e in self.terms), default=-1)

    def min_exponent(self, axis: int) -> int:
        return min((e[axis - 1] for e in self.terms), default=0)

    def max_exponents(self):
        if not self.terms:
            return (0,) * self.d
        return tuple(max(e[i] for e in self.terms) for i in range(self.d))

    def coefficient(self, exps) -> RationalExpr:
        return self.terms.get(tuple(exps), RationalExpr.zero())

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, PhaseExpr):
            try:
                other = PhaseExpr.from_rational(other, self.d)
            except TypeError:
                return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.d, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return PhaseExpr(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return PhaseExpr(self.d, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        """Multiply by a number or a RationalExpr."""
        if isinstance(c, RationalExpr):
            if c.is_zero():
                return PhaseExpr.zero(self.d)
            return PhaseExpr(self.d, {e: x * c for e, x in self.terms.items()})
        c = GaussRat.coerce(c)
        if not c:
            return PhaseExpr.zero(self.d)
        return PhaseExpr(self.d, {e: x.scale(c) for e, x in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PhaseExpr):
            if isinstance(other, RationalExpr):
                return self.scale(other)
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        acc = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                acc.setdefault(e, []).append(ca * cb)
        return PhaseExpr(self.d, {e: rsum(v) for e, v in acc.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, PhaseExpr):
            if len(other.terms) != 1:
                raise DenominatorZero("can only divide by a single momentum monomial times a rational function")
            (e, c), = other.terms.items()
            inv = PhaseExpr(self.d, {tuple(-x for x in e): c.inverse()})
            return self * inv
        return self.scale(RationalExpr.coerce(other).inverse())

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise DenominatorZero("negative power of a multi-term symbol")
            return PhaseExpr.const(1, self.d) / (self ** (-n))
        result = PhaseExpr.const(1, self.d)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugate(self):
        return PhaseExpr(self.d, {e: c.conjugate() for e, c in self.terms.items()})

    def map_coeffs(self, fn):
        return PhaseExpr(self.d, {e: fn(c) for e, c in self.terms.items()})

    # -- calculus --------------------------------------------------------
    def diff_q(self, i: int, order: int = 1):
        v = q(i)
        return PhaseExpr(self.d, {e: c.diff(v, order) for e, c in self.terms.items()})

    def diff_p(self, i: int, order: int = 1):
        if order == 0:
            return self
        out = {}
        k = i - 1
        for e, c in self.terms.items():
            a = e[k]
            f = 1
            for j in range(order):
                f *= a - j
            if f:
                ne = e[:k] + (a - order,) + e[k + 1:]
                out[ne] = c.scale(f)
        return PhaseExpr(self.d, out)

    def diff_multi(self, qa=None, pa=None):
        """Apply ``d^qa/dq^qa d^pa/dp^pa`` (multi-indices, may be None)."""
        r = self
        if pa:
            for i, k in enumerate(pa):
                if k:
                    r = r.diff_p(i + 1, k)
        if qa:
            for i, k in enumerate(qa):
                if k:
                    r = r.diff_q(i + 1, k)
        return r

    # -- substitution -----------------------------------------------------
    def subs(self, values: dict):
        """Substitute numbers for non-momentum generators in all coefficients."""
        return PhaseExpr(self.d, {e: c.subs(values) for e, c in self.terms.items()})

    def evaluate(self, values: dict) -> GaussRat:
        """Evaluate at a full point; momenta are looked up as ``p(i)``."""
        total = GaussRat(0)
        pv = [GaussRat.coerce(values[p(i + 1)]) for i in range(self.d)]
        for e, c in self.terms.items():
            t = c.evaluate(values)
            for x, k in zip(pv, e):
                if k:
                    if not x and k < 0:
                        raise DenominatorZero("momentum is zero at a reciprocal power")
                    t = t * x ** k
            total = total + t
        return total

    def at_momentum_zero(self, i: int):
        """Set ``p_i = 0`` (requires no negative powers of ``p_i``)."""
        k = i - 1
        if any(e[k] < 0 for e in self.terms):
            raise NonPolynomialMomenta(f"p{i} appears with a negative power")
        return PhaseExpr(self.d, {e: c for e, c in self.terms.items() if e[k] == 0})

    def homogeneous_parts(self):
        """Components by total momentum degree, descending."""
        return [part for _, part in self.graded()]

    def graded(self):
        """List of ``(degree, part)`` in descending degree, nonzero parts only."""
        by = {}
        for e, c in self.terms.items():
            by.setdefault(sum(e), {})[e] = c
        return [(deg, PhaseExpr(self.d, by[deg])) for deg in sorted(by, reverse=True)]

    def part_of_degree(self, deg: int):
        return PhaseExpr(self.d, {e: c for e, c in self.terms.items() if sum(e) == deg})

    # -- printing ----------------------------------------------------------
    def __str__(self):
        return format_phase(self)

    def __repr__(self):
        return f"PhaseExpr({format_phase(self)})"


def _mom_str(e, sign):
    parts = []
    for i, k in enumerate(e):
        if k * sign > 0:
            k = abs(k)
            parts.append(f"p{i + 1}" if k == 1 else f"p{i + 1}^{k}")
    return parts


def _term_sort_key(e):
    return (sum(e), e)


def format_phase(f: PhaseExpr) -> str:
    """Canonical text, one term per momentum monomial, descending grlex."""
    if not f.terms:
        return "0"
    pieces = []
    for e in sorted(f.terms, key=_term_sort_key, reverse=True):
        c = f.terms[e]
        up = _mom_str(e, 1)
        down = _mom_str(e, -1)
        neg = False
        if not c.den and len(c.num.terms) <= 2 and len(list(c.num.coefficients())) == 1:
            cs = format_poly(c.num)
            if " " in cs:
                cs = f"({cs})"
            elif cs.startswith("-"):
                neg, cs = True, cs[1:]
        else:
            cs = f"({format_rational(c)})"
        if cs == "1" and up:
            body = "*".join(up)
        else:
            body = "*".join([cs] + up)
        if down:
            body += "/" + "/".join(down)
        pieces.append(("-" if neg else "+", body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for s, b in pieces[1:]:
        out += f" {s} {b}"
    return out


# ---------------------------------------------------------------------------
# brackets and products

def _multi_indices(bounds):
    return iproduct(*(range(b + 1) for b in bounds))


class _DerivCache:
    """Memoized mixed partials of one symbol."""

    def __init__(self, f: PhaseExpr):
        self.f = f
        self.qd = {}
        self.pd = {}

    def dq(self, alpha):
        if alpha not in self.qd:
            if not any(alpha):
                self.qd[alpha] = self.f
            else:
                i = next(k for k, a in enumerate(alpha) if a)
                prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
                self.qd[alpha] = self.dq(prev).diff_q(i + 1)
        return self.qd[alpha]

    def dp(self, alpha):
        if alpha not in self.pd:
            if not any(alpha):
                self.pd[alpha] = self.f
            else:
                i = next(k for k, a in enumerate(alpha) if a)
                prev = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:]
                self.pd[alpha] = self.dp(prev).diff_p(i + 1)
        return self.pd[alpha]


def _check_pair(f, g, what):
    if f.d != g.d:
        raise ValueError("dimension mismatch")
    f.require_polynomial(what)
    g.require_polynomial(what)


def bracket(f: PhaseExpr, g: PhaseExpr) -> PhaseExpr:
    """Deformed bracket ``(f, g)``; reduces to the Poisson bracket at hbar = 0.

    ``sum_{|i|>=1} (1/i!) (hbar/I)^(|i|-1) [d_q^i f d_p^i g - d_p^i f d_q^i g]``
    """
    _check_pair(f, g, "bracket")
    d = f.d
    cf, cg = _DerivCache(f), _DerivCache(g)
    mf, mg = f.max_exponents(), g.max_exponents()
    bound = tuple(max(a, b) for a, b in zip(mf, mg))
    acc = PhaseExpr.zero(d)
    for alpha in _multi_indices(bound):
        n = sum(alpha)
        if n == 0:
            continue
        part = PhaseExpr.zero(d)
        if all(a <= b for a, b in zip(alpha, mg)):
            gp = cg.dp(alpha)
            if gp:
                fq = cf.dq(alpha)
                if fq:
                    part = part + fq * gp
        if all(a <= b for a, b in zip(alpha, mf)):
            fp = cf.dp(alpha)
            if fp:
                gq = cg.dq(alpha)
                if gq:
                    part = part - fp * gq
        if part:
            acc = acc + part.scale(_hbar_over_i_pow(n - 1).scale(mpq(1, _mfact(alpha))))
    return acc


def poisson(f: PhaseExpr, g: PhaseExpr) -> PhaseExpr:
    """Classical Poisson bracket ``sum_i f_q g_p - f_p g_q``."""
    _check_pair(f, g, "poisson")
    acc = PhaseExpr.zero(f.d)
    for i in range(1, f.d + 1):
        acc = acc + f.diff_q(i) * g.diff_p(i) - f.diff_p(i) * g.diff_q(i)
    return acc


def compose(f: PhaseExpr, g: PhaseExpr) -> PhaseExpr:
    """Standard-ordered symbol product ``sum_a (1/a!)(hbar/I)^|a| d_p^a f d_q^a g``."""
    _check_pair(f, g, "compose")
    cf, cg = _DerivCache(f), _DerivCache(g)
    acc = PhaseExpr.zero(f.d)
    for alpha in _multi_indices(f.max_exponents()):
        fp = cf.dp(alpha)
        if not fp:
            continue
        gq = cg.dq(alpha)
        if not gq:
            continue
        n = sum(alpha)
        term = fp * gq
        if n:
            term = term.scale(_hbar_over_i_pow(n).scale(mpq(1, _mfact(alpha))))
        acc = acc + term
    return acc


def sym_product(f: PhaseExpr, g: PhaseExpr) -> PhaseExpr:
    """Symmetrised product ``{f, g} = (f o g + g o f) / 2``."""
    return (compose(f, g) + compose(g, f)).scale(mpq(1, 2))


def apply_a0(f: PhaseExpr) -> PhaseExpr:
    """``a_0 f`` with ``a_0 = (hbar / 2I) sum_i d^2/dq_i dp_i``."""
    acc = PhaseExpr.zero(f.d)
    for i in range(1, f.d + 1):
        acc = acc + f.diff_p(i).diff_q(i)
    return acc.scale(HBAR_OVER_I.scale(mpq(1, 2)))


def star(f: PhaseExpr) -> PhaseExpr:
    """Hermitean conjugate symbol ``exp(2 a_0) conj(f)``."""
    f.require_polynomial("star")
    term = f.conjugate()
    total = term
    k = 1
    while True:
        term = apply_a0(term).scale(mpq(2, k))
        if not term:
            break
        total = total + term
        k += 1
    return total


def hamiltonian(V, d: int) -> PhaseExpr:
    """``H = sum_i p_i^2 / 2 + V_i``."""
    H = PhaseExpr.zero(d)
    for i in range(1, d + 1):
        H = H + PhaseExpr.momentum(i, d, 2).scale(mpq(1, 2)) + PhaseExpr.from_rational(V[i - 1], d)
    return H


def determining_check(X: PhaseExpr, V) -> list:
    """Residuals of the homogeneous determining equations.

    With ``X = sum_k X_k`` (``X_k`` of momentum degree ``n - k``) the ``k``-th
    residual is::

        sum_i p_i dX_k/dq_i + (hbar/2I) d^2 X_{k-1}/dq_i^2
              - sum_{j=1}^{k-1} (1/j!) (hbar/I)^(j-1) V_i^(j) d^j X_{k-1-j}/dp_i^j

    for ``k = 0 .. n+1``.  All residuals vanish exactly when ``(X, H) = 0``.
    """
    X.require_polynomial("determining_check")
    d = X.d
    n = X.degree()
    if n < 0:
        return []
    parts = {k: X.part_of_degree(n - k) for k in range(n + 1)}

    def Xk(k):
        return parts.get(k, PhaseExpr.zero(d))

    dV = {}
    for i in range(d):
        v = q(i + 1)
        dV[i] = [V[i]]
        for j in range(1, n + 2):
            dV[i].append(dV[i][-1].diff(v))
    half_hbar_i = HBAR_OVER_I.scale(mpq(1, 2))
    out = []
    for k in range(n + 2):
        lhs = PhaseExpr.zero(d)
        for i in range(1, d + 1):
            lhs = lhs + PhaseExpr.momentum(i, d) * Xk(k).diff_q(i)
            lhs = lhs + Xk(k - 1).diff_q(i, 2).scale(half_hbar_i)
        rhs = PhaseExpr.zero(d)
        for i in range(1, d + 1):
            for j in range(1, k):
                src = Xk(k - 1 - j)
                if not src:
                    continue
                c = dV[i - 1][j].scale(mpq(1, factorial(j))) * _hbar_over_i_pow(j - 1)
                rhs = rhs + src.diff_p(i, j).scale(c)
        out.append(lhs - rhs)
    return out
