"""Compatibility equations S_{k,i,axis}, counting formulas and screening.

The S-equations are the residue conditions with lower-level xi terms
eliminated, written per axis through the auxiliary antiderivatives
``Q_1 = int V``, ``Q_2 = int V^2`` and ``Q_3 = int (V^3 + hbar^2 V'^2 / 4)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from gmpy2 import mpq

from ..errors import LogObstruction, UnsupportedOrder
from ..phase import PhaseExpr
from ..symcore.integrate import build_Q
from ..symcore.rational import ZERO, RationalExpr
from ..symcore.variables import HBAR_VAR, q

H2 = RationalExpr.var(HBAR_VAR, 2)
H4 = H2 * H2


class _Axis:
    """Potential data for one axis with memoised derivatives and Q_j."""

    def __init__(self, V, axis):
        self.x = q(axis)
        self.axis = axis
        self.V = RationalExpr.coerce(V)
        self._d = [self.V]
        self._Q = {}

    def dV(self, m):
        while len(self._d) <= m:
            self._d.append(self._d[-1].diff(self.x))
        return self._d[m]

    def Q(self, j):
        if j not in self._Q:
            self._Q[j] = build_Q(self.V, self.axis, j)
        return self._Q[j]


def compat_S(k: int, i: int, axis: int, V, xi, solve: bool = False) -> RationalExpr:
    """Left-hand side of ``S_{k,i,axis}`` (zero when satisfied).

    Parameters
    ----------
    k, i : int
        Level ``1 <= k <= 3`` and index ``0 <= i <= 2k-1``.
    V : RationalExpr
        The potential summand of this axis.
    xi : callable or dict
        ``xi(level, index)`` or ``{(level, index): RationalExpr}`` giving the
        xi polynomials of this axis.
    solve : bool
        Return the value of ``xi_{k,i}`` that satisfies the equation instead.
    """
    if not (1 <= k <= 3 and 0 <= i <= 2 * k - 1):
        raise UnsupportedOrder(f"S_{k}{i} is not available")
    ax = _Axis(V, axis)
    get = xi if callable(xi) else (lambda a, b: xi.get((a, b), ZERO))
    x = ax.x

    def D(f, m=1):
        return f.diff(x, m) if m else f

    def X(level, idx, m=0):
        return D(get(level, idx), m)

    body = _S_body(k, i, ax, X, D)
    top = get(k, i)
    if solve:
        return -body
    return body + top


def _S_body(k, i, ax, X, D):
    V, V1, V2, V3 = ax.dV(0), ax.dV(1), ax.dV(2), ax.dV(3)
    Q1 = ax.Q(1)
    h = mpq
    if k == 1:
        if i == 0:
            return X(0, 0, 1) * Q1
        return D(X(0, 1) * Q1)
    Q2 = ax.Q(2)
    if k == 2:
        A = Q2.scale(h(3, 2)) - V * Q1
        if i == 0:
            return (X(0, 0, 1) * A - (X(0, 0, 2) * Q1 * Q1).scale(h(1, 2))
                    - (H2 * X(0, 0, 3) * Q1).scale(h(1, 4)))
        if i == 1:
            return D(X(0, 1) * A - (X(0, 1, 1) * Q1 * Q1).scale(h(1, 2))
                     - (H2 * X(0, 1, 2) * Q1).scale(h(1, 4)))
        B = Q2.scale(h(3, 2)) - (H2 * V1).scale(h(1, 4))
        C = Q1 * Q1 - H2 * V
        if i == 2:
            return (X(0, 2, 1) * B + (X(0, 2, 2) * C).scale(h(1, 2))
                    + (X(1, 2, 1) - (H2 * X(0, 2, 3)).scale(h(1, 4))) * Q1)
        return D(X(0, 3) * B + (X(0, 3, 1) * C).scale(h(1, 2))
                 + (X(1, 3) - (H2 * X(0, 3, 2)).scale(h(1, 4))) * Q1)
    Q3 = ax.Q(3)
    if i in (0, 1):
        # S_30 / S_31 share one bracket; S_31 is the derivative form
        s = 1 if i == 0 else 0
        E1 = (Q3.scale(h(5, 2)) - (V * Q2).scale(h(3, 2)) - (V * V * Q1).scale(h(1, 2))
              + (V1 * Q1 * Q1).scale(h(1, 2)) + H2 * ((V2 * Q1).scale(h(1, 4)) - (V * V1).scale(h(1, 2))))
        E2 = V * Q1 * Q1 - (Q1 * Q2).scale(h(3, 2)) + H2 * ((V1 * Q1).scale(h(3, 4)) - (V * V).scale(h(1, 2)))
        E3 = (Q1 * Q1 * Q1).scale(h(1, 6)) + H2 * (V * Q1 - Q2.scale(h(5, 4)))
        body = (X(0, i, s) * E1 + X(0, i, s + 1) * E2 + X(0, i, s + 2) * E3
                + (H2 * X(0, i, s + 3) * Q1 * Q1).scale(h(1, 4))
                + (H4 * X(0, i, s + 4) * Q1).scale(h(1, 16)))
        return body if i == 0 else D(body)
    if i in (2, 3):
        s = 1 if i == 2 else 0
        F1 = (Q3.scale(h(5, 2)) - (V * V * Q1).scale(h(3, 2))
              + H2 * ((V2 * Q1).scale(h(1, 4)) - (V * V1).scale(h(1, 2))))
        F2 = V * Q1 * Q1 + H2 * ((V * V).scale(h(1, 2)) - (V1 * Q1).scale(h(3, 4)))
        F3 = ((Q1 * Q1 * Q1).scale(h(1, 3)) + H2 * (Q2.scale(h(5, 4)) - (V * Q1).scale(h(3, 4)))
              - (H4 * V1).scale(h(1, 16)))
        G = Q2.scale(h(3, 2)) - V * Q1
        body = (X(0, i, s) * F1 - X(0, i, s + 1) * F2 - X(0, i, s + 2) * F3
                + (H4 * X(0, i, s + 3) * V).scale(h(1, 8))
                + (H4 * X(0, i, s + 4) * Q1).scale(h(1, 16))
                + X(1, i, s) * G - (X(1, i, s + 1) * Q1 * Q1).scale(h(1, 2))
                - (H2 * X(1, i, s + 2) * Q1).scale(h(1, 4)))
        return body if i == 2 else D(body)
    s = 1 if i == 4 else 0
    K1 = Q3.scale(h(5, 2)) - (H2 * V * V1).scale(h(5, 4)) + (H4 * V3).scale(h(1, 16))
    K2 = ((Q1 * Q2).scale(h(3, 2)) - H2 * ((V * V).scale(h(3, 2)) + (V1 * Q1).scale(h(1, 4)))
          + (H4 * V2).scale(h(1, 4)))
    K3 = ((Q1 * Q1 * Q1).scale(h(1, 6)) - H2 * (Q2.scale(h(5, 4)) + (V * Q1).scale(h(1, 2)))
          + (H4 * V1).scale(h(3, 8)))
    K4 = Q1 * Q1 - H2 * V
    body = (X(0, i, s) * K1 + X(0, i, s + 1) * K2 + X(0, i, s + 2) * K3
            - (H2 * X(0, i, s + 3) * K4).scale(h(1, 4))
            + X(1, i, s) * (Q2.scale(h(3, 2)) - (H2 * V1).scale(h(1, 4)))
            + (X(1, i, s + 1) * K4).scale(h(1, 2))
            + ((H4 * X(0, i, s + 4)).scale(h(1, 16)) - (H2 * X(1, i, s + 2)).scale(h(1, 4))
               + X(2, i, s)) * Q1)
    return body if i == 4 else D(body)


def compat_report(V, xi, levels=(1, 2, 3), axes=(1, 2)):
    """All available S residuals as ``{(k, i, axis): RationalExpr}``.

    ``V`` is the list of potential summands, ``xi(k, i, axis)`` supplies the
    xi polynomials.
    """
    out = {}
    for k in levels:
        for axis in axes:
            for i in range(2 * k):
                out[(k, i, axis)] = compat_S(k, i, axis, V[axis - 1], lambda a, b, ax=axis: xi(a, b, ax))
    return out


@dataclass
class RouteRow:
    level: int
    axis: int
    s_zero: bool
    residues_zero: bool
    comparable: bool

    @property
    def agree(self) -> bool:
        return not self.comparable or self.s_zero == self.residues_zero


def compare_routes(Z: list, V, n: int, levels=None) -> list:
    """Compare the S residuals with the residues of the assembled ``Y_k``.

    For every level and axis the two routes must agree on whether all
    equations hold.  The S forms have the lower-level equations eliminated,
    so levels above the first failing one are marked not comparable.

    Parameters
    ----------
    Z : list of PhaseExpr
        Integration constants ``Z_0, Z_1, ...`` of an order-``n`` ansatz.
    V : sequence
        Potential summands ``V_1, V_2``.
    """
    from .ansatz import xi_from_z
    from .integral import assemble_Y, residues

    V = [RationalExpr.coerce(v) for v in V]
    top = min(3, _ceil_half(n))
    levels = range(1, top + 1) if levels is None else levels
    tables = [xi_from_z(z, n, k) for k, z in enumerate(Z)]

    def xi(level, idx, axis):
        return tables[level].xi(idx, axis) if level < len(tables) else ZERO

    rows = []
    failed = False
    for k in levels:
        R = residues(assemble_Y(k, list(Z) + [None] * (k + 1 - len(Z)), V), k)
        level_failed = False
        for axis in (1, 2):
            s_zero = all(compat_S(k, i, axis, V[axis - 1], lambda a, b, ax=axis: xi(a, b, ax)).is_zero()
                         for i in range(2 * k))
            r_zero = not any(R[(k, i, axis)] for i in range(2 * k))
            rows.append(RouteRow(k, axis, s_zero, r_zero, not failed))
            level_failed |= not (s_zero and r_zero)
        failed |= level_failed
    return rows


def compat_direct_linear(n: int, xi, V) -> RationalExpr:
    """Combined first-level equation in ``(n+1)``-fold derivative form.

    ``xi(k, i, axis)`` supplies ``xi_{0,0,axis}`` and ``xi_{0,1,axis}``.
    """
    x1, x2 = q(1), q(2)
    Q11 = build_Q(RationalExpr.coerce(V[0]), 1, 1)
    Q21 = build_Q(RationalExpr.coerce(V[1]), 2, 1)
    q1 = RationalExpr.var(x1)
    q2 = RationalExpr.var(x2)
    m = n + 1
    t1 = (xi(0, 1, 1) * Q11).diff(x1, m)
    t2 = (xi(0, 0, 1).diff(x1) * Q11).diff(x1, m)
    t3 = (xi(0, 1, 2) * Q21).diff(x2, m)
    t4 = (xi(0, 0, 2).diff(x2) * Q21).diff(x2, m)
    return t1 - q2 * t2 + t3 + q1 * t4


def leading_order_admissible(Z0: PhaseExpr):
    """Per axis ``(dZ0/dq_i at p_i = 0 != 0, dZ0/dp_i at p_i = 0 != 0)``.

    An axis with both flags false carries only trivial linear compatibility
    equations.
    """
    out = []
    for i in range(1, Z0.d + 1):
        a = bool(Z0.diff_q(i).at_momentum_zero(i))
        b = bool(Z0.diff_p(i).at_momentum_zero(i))
        out.append((a, b))
    return tuple(out)


def linearly_trivial(Z0: PhaseExpr) -> bool:
    return not any(a or b for a, b in leading_order_admissible(Z0))


# ---------------------------------------------------------------------------
# counting


def _ceil_half(n):
    return (n + 1) // 2


def count_N_sum(n: int, d: int) -> int:
    """Number of compatibility equations from the defining double sum."""
    return d * sum(comb(n + 2 * (d - 1) * k - i + d - 1, d - 2)
                   for k in range(1, _ceil_half(n) + 1) for i in range(1, 2 * k + 1))


def count_N(n: int, d: int) -> int:
    """Closed-form count of compatibility equations for ``d`` in 2, 3, 4."""
    if n < 1:
        raise ValueError("n must be positive")
    even = n % 2 == 0
    if d == 2:
        return n * (n + 2) // 2 if even else (n + 1) * (n + 3) // 2
    if d == 3:
        return 3 * n * (n + 2) * (4 * n + 5) // 8 if even else 3 * (n + 1) * (n + 3) * (4 * n + 7) // 8
    if d == 4:
        if even:
            return n * (n + 2) * (45 * n * n + 122 * n + 62) // 12
        return (n + 1) * (n + 3) * (15 * n * n + 60 * n + 53) // 4
    raise UnsupportedOrder("count_N is tabulated for d = 2, 3, 4")


def count_Pi(n: int, d: int) -> int:
    """Number of alpha parameters after removing dependent monomials."""
    ks = range(_ceil_half(n) + 1)
    if d == 2:
        return sum(comb(n + 2 * k + 2, 2) for k in ks)
    if d == 3:
        return sum(2 * comb(n + 4 * k + 4, 4) - comb(n + 4 * k + 3, 3) for k in ks)
    if d == 4:
        return sum(2 * comb(n + 6 * k + 7, 7) - comb(n + 6 * k + 5, 5) for k in ks)
    raise UnsupportedOrder("count_Pi is tabulated for d = 2, 3, 4")


def count_residue_equations(n: int, d: int = 2) -> int:
    """Enumerate the ``(k, i, j)`` residue labels directly."""
    return sum(1 for k in range(1, _ceil_half(n) + 1) for _ in range(2 * k) for _ in range(d))


# ---------------------------------------------------------------------------
# screening of candidate potentials


@dataclass
class ScreenReport:
    """Outcome of :func:`screen_standard`.

    ``q_rational[j]`` is true when ``Q_j`` has no logarithmic part.
    """

    polynomial_degree: int
    max_pole_order: int
    double_pole_count: int
    simple_pole: bool
    q_rational: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return not self.failures


def screen_standard(V, n: int = 4, axis: int = 1) -> ScreenReport:
    """Check the necessary conditions on a standard potential summand.

    Conditions: polynomial part of degree at most 2, no pole of order other
    than 2, at most ``n - 1`` double poles, and ``Q_1, Q_2, Q_3`` free of
    logarithms.
    """
    V = RationalExpr.coerce(V)
    x = q(axis)
    max_order = 0
    doubles = 0
    for f, m in V.den:
        if f.free_of(x):
            continue
        max_order = max(max_order, m)
        if m == 2:
            doubles += f.degree(x)
    # polynomial part: numerator degree minus denominator degree in x
    num_deg = V.num.degree(x)
    den_deg = sum(f.degree(x) * m for f, m in V.den)
    poly_deg = num_deg - den_deg
    q_ok = {}
    for j in (1, 2, 3):
        try:
            build_Q(V, axis, j)
            q_ok[j] = True
        except LogObstruction:
            q_ok[j] = False
    simple = not q_ok[1]
    fails = []
    if poly_deg > 2:
        fails.append(f"growth of degree {poly_deg} exceeds 2")
    if simple:
        fails.append("simple pole (int V needs a logarithm)")
    if max_order > 2:
        fails.append(f"pole of order {max_order}")
    if doubles > max(n - 1, 0):
        fails.append(f"{doubles} double poles exceed n - 1 = {n - 1}")
    for j, ok in q_ok.items():
        if not ok and not (j == 1 and simple):
            fails.append(f"Q_{j} is not rational")
    return ScreenReport(poly_deg, max_order, doubles, simple, q_ok, fails)


def translation_defect(V, alpha, j: int, axis: int = 1) -> RationalExpr:
    """``Q_j(V + alpha) - sum_m C(j, m) alpha^m Q_{j-m}(V)`` with ``Q_0 = q``.

    Zero up to a constant of integration.
    """
    V = RationalExpr.coerce(V)
    a = RationalExpr.coerce(alpha)
    out = build_Q(V + a, axis, j)
    for m in range(j + 1):
        Qm = RationalExpr.var(q(axis)) if j - m == 0 else build_Q(V, axis, j - m)
        out = out - (a ** m * Qm).scale(comb(j, m))
    return out
