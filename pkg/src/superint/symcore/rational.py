"""Rational functions with a factored, real denominator.

A ``RationalExpr`` is ``num / prod(f**m)`` where every ``f`` is a real
polynomial, irreducible over Q, with leading coefficient one.  Keeping the
denominator factored means cancellation never needs a general multivariate
gcd: each factor is tried against the numerator by exact division.  Complex
divisors are made real by multiplying through by their conjugate.
"""

from __future__ import annotations

from functools import lru_cache

from gmpy2 import mpq

from ..errors import DenominatorZero, EvaluationAtPole
from .factoring import factor_real, factor_sort_key, splits_over_gaussian
from .gauss import GaussRat
from .mpoly import MPoly, format_poly
from .variables import VarId


@lru_cache(maxsize=8192)
def _fpow(f: MPoly, k: int) -> MPoly:
    return f ** k


def _fkey(f: MPoly):
    return f.canonical_key()


def _reduce(num: MPoly, den: dict, skip=()):
    """Cancel denominator factors dividing ``num``; mutates ``den``."""
    if num.is_zero():
        den.clear()
        return num
    for key in list(den):
        if key in skip:
            continue
        f, m = den[key]
        while m:
            q = num.exact_div(f)
            if q is None:
                break
            num = q
            m -= 1
        if m:
            den[key] = (f, m)
        else:
            del den[key]
    return num


def _sorted_den(den: dict):
    items = sorted(den.values(), key=lambda fm: factor_sort_key(fm[0]))
    return tuple(items)


class RationalExpr:
    """Canonical quotient of a Gaussian polynomial by a real factored one.

    Parameters
    ----------
    num : MPoly
        Numerator, carrying all constant content and sign.
    den : tuple of (MPoly, int)
        Distinct monic irreducible real factors with positive multiplicity.

    Construct with :meth:`from_poly`, :meth:`from_fraction` or arithmetic.
    The raw constructor trusts its arguments.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: MPoly, den=()):
        self.num = num
        self.den = tuple(den)
        self._hash = None

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(MPoly.zero())

    @classmethod
    def one(cls):
        return cls(MPoly.const(1))

    @classmethod
    def const(cls, c):
        return cls(MPoly.const(c))

    @classmethod
    def var(cls, v: VarId, power: int = 1):
        if power >= 0:
            return cls(MPoly.var(v, power))
        return cls(MPoly.const(1), ((MPoly.var(v), -power),))

    @classmethod
    def imag_unit(cls):
        return cls(MPoly.imag_unit())

    @classmethod
    def from_poly(cls, p: MPoly):
        return cls(p)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, RationalExpr):
            return x
        if isinstance(x, MPoly):
            return cls(x)
        return cls(MPoly.const(x))

    @classmethod
    def from_fraction(cls, num: MPoly, den: MPoly):
        """Build and normalize ``num / den`` for arbitrary polynomials."""
        return cls._from_parts(num, [(den, 1)])

    @classmethod
    def _from_parts(cls, num: MPoly, pieces):
        """``num / prod(p**m)`` for arbitrary (possibly complex) polynomials ``p``."""
        merged = {}
        for p, m in pieces:
            if p.is_zero():
                raise DenominatorZero("denominator is the zero polynomial")
            if not p.is_real():
                conj = p.conjugate()
                num = num * conj ** m
                p = (p * conj)
            content, facs = factor_real(p)
            num = num.scale(GaussRat(1 / content ** m))
            for f, k in facs:
                key = _fkey(f)
                if key in merged:
                    merged[key] = (merged[key][0], merged[key][1] + k * m)
                else:
                    merged[key] = (f, k * m)
        num = _reduce(num, merged)
        return cls(num, _sorted_den(merged))

    # -- inspection ------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.den

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_value(self) -> GaussRat:
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return self.num.constant_value()

    def is_real(self) -> bool:
        return self.num.is_real()

    def denominator(self) -> MPoly:
        out = MPoly.const(1)
        for f, m in self.den:
            out = out * _fpow(f, m)
        return out

    def used_vars(self) -> tuple:
        vs = set(self.num.used_vars())
        for f, _ in self.den:
            vs.update(f.used_vars())
        return tuple(sorted(vs))

    def free_of(self, v: VarId) -> bool:
        return self.num.free_of(v) and all(f.free_of(v) for f, _ in self.den)

    def _canon(self):
        return (self.num.canonical_key(), tuple((_fkey(f), m) for f, m in self.den))

    def __eq__(self, other):
        if not isinstance(other, RationalExpr):
            try:
                other = RationalExpr.coerce(other)
            except TypeError:
                return NotImplemented
        return self._canon() == other._canon()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._canon())
        return self._hash

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = RationalExpr.coerce(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if not self.den and not other.den:
            return RationalExpr(self.num + other.num)
        a = {_fkey(f): (f, m) for f, m in self.den}
        b = {_fkey(f): (f, m) for f, m in other.den}
        if a.keys() == b.keys() and all(a[k][1] == b[k][1] for k in a):
            den = dict(a)
            num = self.num + other.num
        else:
            den = dict(a)
            for k, (f, m) in b.items():
                if k not in den or den[k][1] < m:
                    den[k] = (f, m)
            na, nb = self.num, other.num
            for k, (f, m) in den.items():
                ma = a[k][1] if k in a else 0
                mb = b[k][1] if k in b else 0
                if m > ma:
                    na = na * _fpow(f, m - ma)
                if m > mb:
                    nb = nb * _fpow(f, m - mb)
            num = na + nb
        num = _reduce(num, den)
        return RationalExpr(num, _sorted_den(den))

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalExpr.coerce(other))

    def __rsub__(self, other):
        return RationalExpr.coerce(other) - self

    def scale(self, c):
        c = GaussRat.coerce(c)
        if not c:
            return RationalExpr.zero()
        return RationalExpr(self.num.scale(c), self.den)

    def __mul__(self, other):
        if not isinstance(other, RationalExpr):
            if isinstance(other, MPoly):
                other = RationalExpr(other)
            else:
                try:
                    return self.scale(other)
                except TypeError:
                    return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RationalExpr.zero()
        if not self.den and not other.den:
            return RationalExpr(self.num * other.num)
        an, bn = self.num, other.num
        den = {}
        for f, m in self.den:
            k = 0
            while k < m:
                q = bn.exact_div(f)
                if q is None:
                    break
                bn = q
                k += 1
            if m - k:
                den[_fkey(f)] = (f, m - k)
        for f, m in other.den:
            k = 0
            while k < m:
                q = an.exact_div(f)
                if q is None:
                    break
                an = q
                k += 1
            if m - k:
                key = _fkey(f)
                if key in den:
                    den[key] = (f, den[key][1] + m - k)
                else:
                    den[key] = (f, m - k)
        num = an * bn
        if den and not (an.is_real() and bn.is_real()):
            # a factor irreducible over Q may split over Q(i) and divide the product only
            num = _reduce(num, den, skip=[k for k, (f, _) in den.items() if not splits_over_gaussian(f)])
        return RationalExpr(num, _sorted_den(den))

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise DenominatorZero("division by zero")
        num = self.denominator()
        n = self.num
        if n.is_constant():
            c = n.constant_value()
            return RationalExpr(num.scale(c.inverse()))
        return RationalExpr._from_parts(num, [(n, 1)])

    def __truediv__(self, other):
        other = RationalExpr.coerce(other)
        if other.num.is_zero():
            raise DenominatorZero("division by zero")
        if not other.den and other.num.is_constant():
            return self.scale(other.num.constant_value().inverse())
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalExpr.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return RationalExpr.one()
        return RationalExpr(self.num ** n, tuple((f, m * n) for f, m in self.den))

    def conjugate(self):
        return RationalExpr(self.num.conjugate(), self.den)

    def real_part(self):
        return RationalExpr._from_parts(self.num.real_part(), [(self.denominator(), 1)]) \
            if self.den else RationalExpr(self.num.real_part())

    # -- calculus --------------------------------------------------------
    def diff(self, v: VarId, order: int = 1):
        r = self
        for _ in range(order):
            r = r._diff1(v)
        return r

    def _diff1(self, v: VarId):
        dn = self.num.diff(v)
        moving = [(f, m) for f, m in self.den if not f.free_of(v)]
        if not moving:
            if dn.is_zero():
                return RationalExpr.zero()
            den = {_fkey(f): (f, m) for f, m in self.den}
            dn = _reduce(dn, den)
            return RationalExpr(dn, _sorted_den(den))
        P = MPoly.const(1)
        for f, _ in moving:
            P = P * f
        total = dn * P
        for f, m in moving:
            cof = P.exact_div(f)
            total = total - (self.num * f.diff(v) * cof).scale(m)
        den = {}
        for f, m in self.den:
            den[_fkey(f)] = (f, m + (0 if f.free_of(v) else 1))
        total = _reduce(total, den, skip={_fkey(f) for f, _ in moving})
        return RationalExpr(total, _sorted_den(den))

    # -- substitution ----------------------------------------------------
    def subs(self, values: dict):
        """Substitute exact numbers or polynomials for generators."""
        if not any(v in values for v in self.used_vars()):
            return self
        num = self.num.subs(values)
        pieces = []
        for f, m in self.den:
            fs = f.subs(values)
            if fs.is_zero():
                raise EvaluationAtPole(f"factor {f} vanishes")
            pieces.append((fs, m))
        return RationalExpr._from_parts(num, pieces)

    def evaluate(self, values: dict) -> GaussRat:
        d = GaussRat(1)
        for f, m in self.den:
            fv = f.evaluate(values)
            if not fv:
                raise EvaluationAtPole(f"factor {f} vanishes")
            d = d * fv ** m
        return self.num.evaluate(values) / d

    # -- printing ----------------------------------------------------------
    def __str__(self):
        return format_rational(self)

    def __repr__(self):
        return f"RationalExpr({format_rational(self)})"


def _atomic_factor(f: MPoly) -> bool:
    return len(f.terms) == 1 and len(f.used_vars()) == 1


def format_factor(f: MPoly, m: int) -> str:
    body = format_poly(f)
    if not _atomic_factor(f):
        body = f"({body})"
    return body if m == 1 else f"{body}^{m}"


def format_rational(r: RationalExpr) -> str:
    """Canonical text such as ``(2*q1^2 - b)/(q1^3*(q1^2 - b)^2)``."""
    ns = format_poly(r.num)
    if not r.den:
        return ns
    ds = "*".join(format_factor(f, m) for f, m in r.den)
    if len(r.den) > 1:
        ds = f"({ds})"
    return f"({ns})/{ds}"


def rsum(items) -> RationalExpr:
    """Sum of RationalExprs grouping equal denominators first."""
    groups = {}
    for r in items:
        if r.is_zero():
            continue
        key = tuple((_fkey(f), m) for f, m in r.den)
        if key in groups:
            g = groups[key]
            groups[key] = (g[0] + r.num, g[1])
        else:
            groups[key] = (r.num, r.den)
    total = RationalExpr.zero()
    for num, den in groups.values():
        if num.is_zero():
            continue
        d = {_fkey(f): (f, m) for f, m in den}
        num = _reduce(num, d)
        total = total + RationalExpr(num, _sorted_den(d))
    return total


ZERO = RationalExpr.zero()
ONE = RationalExpr.one()
HALF = RationalExpr.const(mpq(1, 2))
