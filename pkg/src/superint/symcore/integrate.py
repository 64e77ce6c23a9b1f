"""Rational antiderivatives by Hermite reduction.

The integrand is viewed as a univariate rational function in the integration
variable whose coefficients live in the field of rational functions of every
other symbol.  Hermite reduction splits off the rational part; a nonzero
remainder over a squarefree denominator means a logarithm is needed, which is
reported as :class:`LogObstruction` rather than integrated.
"""

from __future__ import annotations

from gmpy2 import mpq

from ..errors import LogObstruction, UnsupportedOrder
from .mpoly import MPoly
from .rational import ONE, ZERO, RationalExpr
from .variables import HBAR_VAR, VarId
from .variables import q as qvar


class UPoly:
    """Dense univariate polynomial in ``var`` over RationalExpr coefficients.

    ``coeffs[k]`` multiplies ``var**k``; trailing zeros are trimmed.
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, var: VarId, coeffs):
        c = list(coeffs)
        while c and c[-1].is_zero():
            c.pop()
        self.var = var
        self.coeffs = c

    @classmethod
    def from_mpoly(cls, poly, var: VarId):
        """Split a polynomial into coefficients of powers of ``var``."""
        if var not in poly.gens:
            return cls(var, [RationalExpr(poly)])
        i = poly.gens.index(var)
        buckets = {}
        for e, c in poly.terms.items():
            k = e[i]
            buckets.setdefault(k, {})[e[:i] + (0,) + e[i + 1:]] = c
        top = max(buckets)
        return cls(var, [RationalExpr(MPoly(poly.gens, buckets.get(k, {}), False)) for k in range(top + 1)])

    def deg(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> RationalExpr:
        return self.coeffs[-1]

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [ZERO] * (n - len(self.coeffs))
        b = other.coeffs + [ZERO] * (n - len(other.coeffs))
        return UPoly(self.var, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return UPoly(self.var, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: RationalExpr):
        if c.is_zero():
            return UPoly(self.var, [])
        return UPoly(self.var, [x * c for x in self.coeffs])

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return UPoly(self.var, [])
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return UPoly(self.var, out)

    def __pow__(self, n: int):
        r = UPoly(self.var, [ONE])
        for _ in range(n):
            r = r * self
        return r

    def divmod(self, other):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.deg()
        inv = other.lc().inverse()
        quot = [ZERO] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if c.is_zero():
                continue
            f = c * inv
            quot[k - dq] = f
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - f * b
        return UPoly(self.var, quot), UPoly(self.var, rem[:dq] if dq > 0 else [])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def diff(self):
        return UPoly(self.var, [c.scale(k) for k, c in enumerate(self.coeffs)][1:])

    def to_rational(self) -> RationalExpr:
        out = ZERO
        v = RationalExpr.var(self.var)
        for c in reversed(self.coeffs):
            out = out * v + c
        return out

    def integrate_poly(self) -> RationalExpr:
        """Antiderivative with zero constant term."""
        out = ZERO
        v = RationalExpr.var(self.var)
        for k in range(len(self.coeffs), 0, -1):
            out = (out + self.coeffs[k - 1].scale(mpq(1, k))) * v
        return out


def ext_gcd_inverse(a: UPoly, m: UPoly) -> UPoly:
    """Return ``s`` with ``s*a = 1 (mod m)``, assuming gcd(a, m) = 1."""
    var = a.var
    r0, r1 = m, a % m
    s0, s1 = UPoly(var, []), UPoly(var, [ONE])
    while not r1.is_zero():
        qt, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - qt * s1
    if r0.deg() != 0:
        raise ArithmeticError("polynomials are not coprime")
    return (s0.scale(r0.lc().inverse())) % m


def antiderivative(r: RationalExpr, v: VarId) -> RationalExpr:
    """Rational antiderivative of ``r`` in ``v`` (zero-constant convention).

    Raises
    ------
    LogObstruction
        If a logarithmic term would be required.
    """
    if r.is_zero():
        return ZERO
    moving = [(f, m) for f, m in r.den if not f.free_of(v)]
    fixed = RationalExpr(MPoly.const(1), [(f, m) for f, m in r.den if f.free_of(v)])
    num = UPoly.from_mpoly(r.num, v).scale(fixed)
    if not moving:
        return num.integrate_poly()

    D = UPoly(v, [ONE])
    blocks = []
    for f, m in moving:
        fu = UPoly.from_mpoly(f, v)
        blk = fu ** m
        blocks.append((fu, m, blk))
        D = D * blk
    P, R = num.divmod(D)

    rational = ZERO
    obstruction = []
    for fu, m, blk in blocks:
        E = D.divmod(blk)[0]
        Ri = (R * ext_gcd_inverse(E % blk, blk)) % blk
        if Ri.is_zero():
            continue
        df = fu.diff()
        # s*f + t*f' = 1
        t = ext_gcd_inverse(df % fu, fu)
        s = (UPoly(v, [ONE]) - t * df).divmod(fu)[0]
        cur, k = Ri, m
        f_rat = fu.to_rational()
        while k > 1:
            Qt, T = (cur * t).divmod(fu)
            rational = rational - T.to_rational().scale(mpq(1, k - 1)) / f_rat ** (k - 1)
            cur = cur * s + Qt * df + T.diff().scale(RationalExpr.const(mpq(1, k - 1)))
            k -= 1
            extra, cur = cur.divmod(fu ** k)
            P = P + extra
        if not cur.is_zero():
            obstruction.append((f_rat, _residue_value(cur, fu)))
    if obstruction:
        raise LogObstruction(obstruction)
    return P.integrate_poly() + rational


def _residue_value(cur: UPoly, fu: UPoly):
    """Residue at the root of a linear factor, else the leftover numerator."""
    if fu.deg() == 1:
        a, b = fu.coeffs[1], fu.coeffs[0]
        root = -b / a
        val = ZERO
        for c in reversed(cur.coeffs):
            val = val * root + c
        return val / a
    return cur.to_rational()


def build_Q(V: RationalExpr, axis: int, j: int) -> RationalExpr:
    """Auxiliary antiderivative ``Q_j`` of a one-axis potential.

    ``Q_1 = int V``, ``Q_2 = int V^2``, and for ``j = 3, 4, 5`` the
    hbar-corrected integrands of :func:`q_integrand`.
    """
    v = qvar(axis)
    if not 1 <= j <= 5:
        raise UnsupportedOrder(f"Q_{j} is only defined for 1 <= j <= 5")
    return antiderivative(q_integrand(V, v, j), v)


def q_integrand(V: RationalExpr, v: VarId, j: int) -> RationalExpr:
    h2 = RationalExpr.var(HBAR_VAR, 2)
    if j == 1:
        return V
    if j == 2:
        return V * V
    d1 = V.diff(v)
    if j == 3:
        return V ** 3 + h2 * d1 * d1 * mpq(1, 4)
    d2 = d1.diff(v)
    if j == 4:
        return V ** 4 + h2 * V * d1 * d1 + h2 * h2 * d2 * d2 * mpq(1, 20)
    d3 = d2.diff(v)
    return (V ** 5 + h2 * V * V * d1 * d1 * mpq(5, 2) + h2 * h2 * V * d2 * d2 * mpq(1, 4)
            + h2 ** 3 * d3 * d3 * mpq(1, 112))
