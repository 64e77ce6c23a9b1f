"""The Z_k ansatz in two dimensions and its xi-polynomial form.

``Z_k = sum_{i+j+m = n+2k} alpha_{i,j,m} p1^(i-2k) p2^(j-2k) m12^m``.  The
alpha table is regrouped into one polynomial per axis::

    xi_{k,i,1}(q1) = sum_j alpha_{i,j,n+2k-i-j} q1^(n+2k-i-j)
    xi_{k,j,2}(q2) = sum_i alpha_{i,j,n+2k-i-j} (-1)^i q2^(n+2k-i-j)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from ..errors import InconsistentAnsatz
from ..opalg.diffop import L_op, apply
from ..phase import PhaseExpr
from ..symcore.integrate import UPoly
from ..symcore.rational import ONE, ZERO, RationalExpr
from ..symcore.variables import q


@dataclass
class ZAnsatz:
    """One integration constant ``Z_k`` for an order-``n`` integral (d = 2).

    Attributes
    ----------
    alpha : dict
        ``(i, j, m) -> RationalExpr`` free of positions and momenta.
    xi1, xi2 : dict
        ``i -> xi_{k,i,1}(q1)`` and ``j -> xi_{k,j,2}(q2)``.
    """

    n: int
    k: int
    alpha: dict
    xi1: dict = field(default_factory=dict)
    xi2: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.xi1 and not self.xi2:
            self.xi1, self.xi2 = xi_tables(self.n, self.k, self.alpha)

    def z(self) -> PhaseExpr:
        return zk_from_alpha(self.n, self.k, self.alpha)

    def xi(self, i: int, axis: int) -> RationalExpr:
        table = self.xi1 if axis == 1 else self.xi2
        return table.get(i, ZERO)


def _m12_powers(top):
    m = PhaseExpr.angular(1, 2, 2)
    out = [PhaseExpr.const(1, 2)]
    for _ in range(top):
        out.append(out[-1] * m)
    return out


def zk_from_alpha(n: int, k: int, alpha: dict) -> PhaseExpr:
    """Expand the momentum-monomial ansatz for ``Z_k``."""
    total = n + 2 * k
    mp = _m12_powers(total)
    Z = PhaseExpr.zero(2)
    for (i, j, m), c in alpha.items():
        if i + j + m != total:
            raise InconsistentAnsatz(f"alpha index {(i, j, m)} does not sum to {total}")
        c = RationalExpr.coerce(c)
        if c.is_zero():
            continue
        mono = PhaseExpr(2, {(i - 2 * k, j - 2 * k): c})
        Z = Z + mono * mp[m]
    return Z


def xi_tables(n: int, k: int, alpha: dict):
    x1 = RationalExpr.var(q(1))
    x2 = RationalExpr.var(q(2))
    xi1, xi2 = {}, {}
    for (i, j, m), c in alpha.items():
        c = RationalExpr.coerce(c)
        if c.is_zero():
            continue
        xi1[i] = xi1.get(i, ZERO) + c * x1 ** m
        xi2[j] = xi2.get(j, ZERO) + (c if i % 2 == 0 else -c) * x2 ** m
    for t in (xi1, xi2):
        for key in [key for key, v in t.items() if v.is_zero()]:
            del t[key]
    return xi1, xi2


def z_from_xi(n: int, k: int, xi1: dict) -> PhaseExpr:
    """Rebuild ``Z_k`` from the axis-1 xi polynomials alone.

    ``Z_k = sum_{i,j} (-q2)^j / j! xi_{k,i,1}^{(j)}(q1) p1^(i+j-2k) p2^(n-i-j)``.
    """
    v1 = q(1)
    mq2 = -RationalExpr.var(q(2))
    Z = PhaseExpr.zero(2)
    for i, xi in xi1.items():
        deriv = xi
        j = 0
        while not deriv.is_zero():
            c = (deriv * mq2 ** j).scale(mpq(1, factorial(j)))
            Z = Z + PhaseExpr(2, {(i + j - 2 * k, n - i - j): c})
            deriv = deriv.diff(v1)
            j += 1
    return Z


def _poly_coeffs(r: RationalExpr, v):
    """``{power: coefficient}`` of ``r`` viewed as a polynomial in ``v``."""
    if any(not f.free_of(v) for f, _ in r.den):
        raise InconsistentAnsatz("xi coefficient is not polynomial in the position")
    den = RationalExpr(r.num.const(1), r.den) if r.den else ONE
    up = UPoly.from_mpoly(r.num, v)
    return {e: c * den for e, c in enumerate(up.coeffs) if not c.is_zero()}


def xi_from_z(Z: PhaseExpr, n: int, k: int = 0) -> ZAnsatz:
    """Recover the alpha/xi tables of a kernel element ``Z_k``.

    The alpha table is read from ``Z_k`` at ``q2 = 0`` and the full ``Z_k`` is
    rebuilt from it for comparison.

    Raises
    ------
    InconsistentAnsatz
        If ``L Z != 0`` or ``Z`` is not of the ansatz form.
    """
    if Z.d != 2:
        raise InconsistentAnsatz("the xi representation is two-dimensional")
    if apply(L_op(2), Z):
        raise InconsistentAnsatz("Z is not annihilated by L")
    total = n + 2 * k
    at0 = Z.subs({q(2): 0})
    alpha = {}
    for (e1, e2), c in at0.terms.items():
        i = e1 + 2 * k
        if i < 0 or e2 != n - i or i > total:
            raise InconsistentAnsatz(f"momentum monomial p1^{e1} p2^{e2} outside the ansatz")
        for m, a in _poly_coeffs(c, q(1)).items():
            j = total - i - m
            if j < 0:
                raise InconsistentAnsatz("position degree too high for the ansatz")
            alpha[(i, j, m)] = a
    za = ZAnsatz(n, k, alpha)
    if za.z() != Z:
        raise InconsistentAnsatz("Z does not match its reconstruction from alpha")
    return za


def parse_ansatz(text: str, n: int, params=None) -> list:
    """Read a Z-ansatz table into ``[ZAnsatz_0, ZAnsatz_1, ...]``.

    Lines are ``alpha i j m = <value>``; a line ``Z k`` starts the table of
    ``Z_k`` (default ``k = 0``).  Values may use the model parameters and
    ``hbar``.  ``#`` starts a comment.  Missing levels are empty.
    """
    from ..symcore.grammar import parse_rational

    tables = {}
    k = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "Z" and len(head) == 2 and head[1].isdigit():
            k = int(head[1])
            tables.setdefault(k, {})
            continue
        lhs, sep, rhs = line.partition("=")
        idx = lhs.split()
        if not sep or len(idx) != 4 or idx[0] != "alpha" or not all(t.isdigit() for t in idx[1:]):
            raise InconsistentAnsatz(f"line {lineno}: expected 'alpha i j m = value' or 'Z k'")
        i, j, m = (int(t) for t in idx[1:])
        if i + j + m != n + 2 * k:
            raise InconsistentAnsatz(f"line {lineno}: i + j + m must equal {n + 2 * k} for Z_{k}")
        tables.setdefault(k, {})[(i, j, m)] = parse_rational(rhs.strip(), params)
    top = max(tables, default=0)
    return [ZAnsatz(n, k, tables.get(k, {})) for k in range(top + 1)]


def format_ansatz(zs) -> str:
    """Inverse of :func:`parse_ansatz` in canonical order."""
    from ..symcore.rational import format_rational

    out = []
    for za in zs:
        out.append(f"Z {za.k}")
        for key in sorted(za.alpha):
            c = RationalExpr.coerce(za.alpha[key])
            if not c.is_zero():
                out.append("alpha {} {} {} = {}".format(*key, format_rational(c)))
    return "\n".join(out) + "\n"
