"""Sparse multivariate polynomials over the Gaussian rationals.

Storage is a dict from exponent tuples to ``mpq`` coefficients.  An exponent
tuple has one slot per generator (in ``VarId`` order) plus a trailing slot for
the power of ``I``, which is 0 or 1.  Products reduce ``I**2`` to ``-1`` on the
fly, so a Gaussian coefficient ``a + b*I`` occupies two entries.  This keeps
the inner loops on plain ``mpq`` arithmetic.
"""

from __future__ import annotations

import heapq
from functools import reduce
from operator import add

from gmpy2 import mpq

from .gauss import GaussRat, to_mpq
from .variables import VarId

_ZERO = mpq(0)
_ONE = mpq(1)


def _merge_gens(g1, g2):
    if g1 == g2:
        return g1
    return tuple(sorted(set(g1) | set(g2)))


def _embed(terms, gens, new_gens):
    """Re-express ``terms`` over a larger generator tuple."""
    if gens == new_gens:
        return terms
    pos = [new_gens.index(g) for g in gens]
    width = len(new_gens) + 1
    out = {}
    for e, c in terms.items():
        ne = [0] * width
        for i, k in enumerate(pos):
            ne[k] = e[i]
        ne[-1] = e[-1]
        out[tuple(ne)] = c
    return out


def _grlex_key(e):
    # the I slot is part of the coefficient, not the monomial
    m = e[:-1]
    return (sum(m), m, -e[-1])


class MPoly:
    """Immutable multivariate polynomial with Gaussian-rational coefficients.

    Parameters
    ----------
    gens : tuple of VarId
        Sorted generators.  Unused generators are allowed; equality and
        hashing ignore them.
    terms : dict
        Exponent tuple (length ``len(gens) + 1``) to nonzero ``mpq``.
    """

    __slots__ = ("gens", "terms", "_key")

    def __init__(self, gens=(), terms=None, _check=True):
        self.gens = tuple(gens)
        if terms is None:
            terms = {}
        elif _check:
            terms = {tuple(e): to_mpq(c) for e, c in terms.items() if c}
        self.terms = terms
        self._key = None

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls) -> "MPoly":
        return cls((), {}, False)

    @classmethod
    def const(cls, c) -> "MPoly":
        c = GaussRat.coerce(c)
        t = {}
        if c.re:
            t[(0,)] = c.re
        if c.im:
            t[(1,)] = c.im
        return cls((), t, False)

    @classmethod
    def var(cls, v: VarId, power: int = 1) -> "MPoly":
        return cls((v,), {(power, 0): _ONE}, False)

    @classmethod
    def imag_unit(cls) -> "MPoly":
        return cls((), {(1,): _ONE}, False)

    @classmethod
    def coerce(cls, x) -> "MPoly":
        if isinstance(x, MPoly):
            return x
        return cls.const(x)

    # -- inspection ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_real(self) -> bool:
        return all(e[-1] == 0 for e in self.terms)

    def used_vars(self) -> tuple:
        used = [False] * len(self.gens)
        for e in self.terms:
            for i, x in enumerate(e[:-1]):
                if x:
                    used[i] = True
        return tuple(g for g, u in zip(self.gens, used) if u)

    def free_of(self, v: VarId) -> bool:
        if v not in self.gens:
            return True
        i = self.gens.index(v)
        return all(e[i] == 0 for e in self.terms)

    def is_constant(self) -> bool:
        return all(not any(e[:-1]) for e in self.terms)

    def constant_value(self) -> GaussRat:
        """Coefficient of the constant monomial."""
        re = im = _ZERO
        for e, c in self.terms.items():
            if not any(e[:-1]):
                if e[-1]:
                    im = c
                else:
                    re = c
        return GaussRat(re, im)

    def degree(self, v: VarId | None = None) -> int:
        """Total degree, or the degree in ``v``.  The zero polynomial has -1."""
        if not self.terms:
            return -1
        if v is None:
            return max(sum(e[:-1]) for e in self.terms)
        if v not in self.gens:
            return 0
        i = self.gens.index(v)
        return max(e[i] for e in self.terms)

    def stripped(self) -> "MPoly":
        """Same polynomial over only the generators it uses."""
        used = self.used_vars()
        if used == self.gens:
            return self
        keep = [self.gens.index(g) for g in used]
        terms = {tuple(e[i] for i in keep) + (e[-1],): c for e, c in self.terms.items()}
        return MPoly(used, terms, False)

    def canonical_key(self):
        if self._key is None:
            s = self.stripped()
            self._key = (s.gens, tuple(sorted(s.terms.items())))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            try:
                other = MPoly.coerce(other)
            except TypeError:
                return NotImplemented
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def coefficients(self):
        """Yield ``(monomial dict, GaussRat)`` pairs in descending grlex order."""
        grouped = {}
        for e, c in self.terms.items():
            m = e[:-1]
            re, im = grouped.get(m, (_ZERO, _ZERO))
            grouped[m] = (re, c) if e[-1] else (c, im)
        for m in sorted(grouped, key=lambda m: (sum(m), m), reverse=True):
            mono = {g: x for g, x in zip(self.gens, m) if x}
            yield mono, GaussRat(*grouped[m])

    def leading_term(self):
        """Return ``(monomial dict, GaussRat)`` of the grlex-largest monomial."""
        for item in self.coefficients():
            return item
        raise ValueError("zero polynomial has no leading term")

    # -- arithmetic ------------------------------------------------------
    def _aligned(self, other):
        g = _merge_gens(self.gens, other.gens)
        return g, _embed(self.terms, self.gens, g), _embed(other.terms, other.gens, g)

    def __add__(self, other):
        other = MPoly.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        g, a, b = self._aligned(other)
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for e, c in b.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MPoly(g, out, False)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.gens, {e: -c for e, c in self.terms.items()}, False)

    def __sub__(self, other):
        return self + (-MPoly.coerce(other))

    def __rsub__(self, other):
        return MPoly.coerce(other) - self

    def scale(self, c) -> "MPoly":
        """Multiply by a scalar (int, rational or GaussRat)."""
        c = GaussRat.coerce(c)
        if not c:
            return MPoly.zero()
        if c.im == 0:
            r = c.re
            if r == 1:
                return self
            return MPoly(self.gens, {e: x * r for e, x in self.terms.items()}, False)
        return self * MPoly.const(c)

    def __mul__(self, other):
        if not isinstance(other, MPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if not self.terms or not other.terms:
            return MPoly.zero()
        g, a, b = self._aligned(other)
        if len(a) == 1:
            (ea, ca), = a.items()
            if not any(ea) and ca == 1:
                return MPoly(g, b, False)
        out = {}
        get = out.get
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(map(add, ea, eb))
                c = ca * cb
                if e[-1] > 1:
                    e = e[:-1] + (0,)
                    c = -c
                v = get(e)
                out[e] = c if v is None else v + c
        return MPoly(g, {e: c for e, c in out.items() if c}, False)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugate(self) -> "MPoly":
        """Complex conjugate (all generators are real)."""
        return MPoly(self.gens, {e: (-c if e[-1] else c) for e, c in self.terms.items()}, False)

    def real_part(self) -> "MPoly":
        return MPoly(self.gens, {e: c for e, c in self.terms.items() if not e[-1]}, False)

    def imag_part(self) -> "MPoly":
        return MPoly(self.gens, {e[:-1] + (0,): c for e, c in self.terms.items() if e[-1]}, False)

    # -- calculus --------------------------------------------------------
    def diff(self, v: VarId, order: int = 1) -> "MPoly":
        if order == 0:
            return self
        if v not in self.gens:
            return MPoly.zero()
        i = self.gens.index(v)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k < order:
                continue
            f = 1
            for j in range(order):
                f *= k - j
            ne = e[:i] + (k - order,) + e[i + 1:]
            out[ne] = c * f
        return MPoly(self.gens, out, False)

    def integrate(self, v: VarId) -> "MPoly":
        """Polynomial antiderivative in ``v`` with zero constant term."""
        g = _merge_gens(self.gens, (v,))
        terms = _embed(self.terms, self.gens, g)
        i = g.index(v)
        out = {}
        for e, c in terms.items():
            k = e[i] + 1
            out[e[:i] + (k,) + e[i + 1:]] = c / k
        return MPoly(g, out, False)

    # -- substitution and evaluation --------------------------------------
    def subs(self, values: dict) -> "MPoly":
        """Substitute exact numbers (or MPoly) for some generators."""
        hit = [g for g in self.gens if g in values]
        if not hit:
            return self
        num_vals = {}
        poly_vals = {}
        for g in hit:
            val = values[g]
            if isinstance(val, MPoly):
                poly_vals[g] = val
            else:
                num_vals[g] = GaussRat.coerce(val)
        keep = [i for i, g in enumerate(self.gens) if g not in values]
        new_gens = tuple(self.gens[i] for i in keep)
        idx = {g: self.gens.index(g) for g in hit}
        powcache = {}

        def pw(g, k):
            key = (g, k)
            if key not in powcache:
                powcache[key] = num_vals[g] ** k
            return powcache[key]

        result = {}
        poly_terms = []
        for e, c in self.terms.items():
            coeff = GaussRat(0, c) if e[-1] else GaussRat(c)
            for g, val in num_vals.items():
                k = e[idx[g]]
                if k:
                    coeff = coeff * pw(g, k)
            if not coeff:
                continue
            base = tuple(e[i] for i in keep)
            if poly_vals:
                poly_terms.append((base, coeff, {g: e[idx[g]] for g in poly_vals}))
                continue
            for im, part in ((0, coeff.re), (1, coeff.im)):
                if part:
                    ne = base + (im,)
                    v = result.get(ne, _ZERO) + part
                    if v:
                        result[ne] = v
                    else:
                        result.pop(ne, None)
        out = MPoly(new_gens, result, False)
        for base, coeff, pows in poly_terms:
            term = MPoly(new_gens, {base + (0,): _ONE}, False).scale(coeff)
            for g, k in pows.items():
                if k:
                    term = term * poly_vals[g] ** k
            out = out + term
        return out

    def evaluate(self, values: dict) -> GaussRat:
        """Evaluate at a point that assigns every used generator."""
        r = self.subs({g: values[g] for g in self.gens if g in values})
        if not r.is_constant():
            missing = ", ".join(str(v) for v in r.used_vars())
            raise KeyError(f"no value for {missing}")
        return r.constant_value()

    # -- division ----------------------------------------------------------
    def exact_div(self, other: "MPoly"):
        """Return ``self / other`` if ``other`` (real) divides exactly, else None."""
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return MPoly.zero()
        if not other.is_real():
            raise ValueError("exact_div expects a real divisor")
        g, a, b = self._aligned(other)
        # cheap degree screen
        nv = len(g)
        for i in range(nv):
            if max(e[i] for e in b) > max(e[i] for e in a):
                return None
        re = {e: c for e, c in a.items() if not e[-1]}
        im = {e[:-1] + (0,): c for e, c in a.items() if e[-1]}
        out = {}
        for part, flag in ((re, 0), (im, 1)):
            if not part:
                continue
            qt = _exact_div_real(part, b)
            if qt is None:
                return None
            for e, c in qt.items():
                out[e[:-1] + (flag,)] = c
        return MPoly(g, out, False)

    def divides(self, other: "MPoly") -> bool:
        return other.exact_div(self) is not None

    def primitive_monic(self):
        """Return ``(c, f)`` with ``self = c*f`` and leading coefficient of f equal to 1."""
        if not self.terms:
            raise ZeroDivisionError("zero polynomial")
        _, lc = self.leading_term()
        return lc, self.scale(lc.inverse())

    # -- printing ----------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MPoly({format_poly(self)})"


def _exact_div_real(a: dict, b: dict):
    """Multivariate exact division of real term dicts, or None."""
    lb = max(b, key=_grlex_key)
    cb = b[lb]
    rest = [(e, c) for e, c in b.items() if e != lb]
    rem = dict(a)
    heap = [(-sum(e[:-1]), tuple(-x for x in e[:-1]), e) for e in rem]
    heapq.heapify(heap)
    quot = {}
    while heap:
        _, _, lt = heapq.heappop(heap)
        c = rem.pop(lt, None)
        if c is None:
            continue
        d = tuple(x - y for x, y in zip(lt, lb))
        if min(d) < 0:
            return None
        f = c / cb
        quot[d] = f
        for eb, c2 in rest:
            e = tuple(map(add, d, eb))
            v = rem.get(e)
            if v is None:
                rem[e] = -f * c2
                heapq.heappush(heap, (-sum(e[:-1]), tuple(-x for x in e[:-1]), e))
            else:
                v = v - f * c2
                if v:
                    rem[e] = v
                else:
                    del rem[e]
    return quot


def _fmt_rat(c) -> str:
    return str(c)


def format_monomial(mono: dict) -> str:
    parts = []
    for g in sorted(mono):
        k = mono[g]
        parts.append(g.name if k == 1 else f"{g.name}^{k}")
    return "*".join(parts)


def format_poly(poly: MPoly) -> str:
    """Canonical text: grlex-descending terms, ``I`` after the rational factor."""
    pieces = []
    for mono, c in poly.coefficients():
        ms = format_monomial(mono)
        for part, imag in ((c.re, False), (c.im, True)):
            if not part:
                continue
            sign = "-" if part < 0 else "+"
            a = abs(part)
            factors = []
            if a != 1 or (not ms and not imag):
                factors.append(_fmt_rat(a))
            if imag:
                factors.append("I")
            if ms:
                factors.append(ms)
            pieces.append((sign, "*".join(factors)))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def poly_sum(polys) -> MPoly:
    return reduce(add, polys, MPoly.zero())
