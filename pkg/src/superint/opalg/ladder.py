"""The a-operators, ad_L inversion and the correction operators W_k.

Notation: ``L = sum p_i d/dq_i``; ``a_0 = (hbar/2I) sum d^2/dq_i dp_i``;
``a_j`` (j >= 1) solves ``[L, a_j] = (1/j!) (hbar/I)^(j-1) sum V_i^(j) d^j/dp_i^j``.
With ``A = sum a_i s^i`` the operators ``A_j`` solve
``[L, A_j] = j/(j+1)! (ad A)^j [L, A]`` and ``a_{i,j}`` is the ``s^i``
coefficient of ``A_j``.  ``B = sum b_{i,j} s^i t^j`` solves
``[L, B] = t B [L, A]`` with ``B(t=0) = 1``; the W_k follow from the b's.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from ..errors import NotSeparable, UnsupportedOrder
from ..phase import HBAR_OVER_I, PhaseExpr
from ..symcore.integrate import antiderivative
from ..symcore.rational import RationalExpr
from ..symcore.variables import HBAR_VAR, q
from .diffop import DiffOp, L_op, a0_op, commutator, compose_ops, term_axis

# ---------------------------------------------------------------------------
# inversion of ad_L


def _integrate_phase(c: PhaseExpr, axis: int) -> PhaseExpr:
    v = q(axis)
    return PhaseExpr(c.d, {e: antiderivative(r, v) for e, r in c.terms.items()})


def invert_ad_L(F: DiffOp) -> DiffOp:
    """Solve ``[L, G] = F`` for an additively separable ``F``.

    Each term ``f * d^(k+l)/dp_i^k dq_i^l`` contributes
    ``sum_{m=0}^{k} k!/(k-m)! (m+1-fold int f) / p_i^(m+1) d^(k+l)/dp_i^(k-m) dq_i^(l+m)``.

    Raises
    ------
    NotSeparable
        If a term touches more than one axis.
    LogObstruction
        If an iterated antiderivative needs a logarithm.
    """
    d = F.d
    G = DiffOp.zero(d)
    for key, f in F.terms.items():
        axis = term_axis(d, key, f)
        l_q = key[axis - 1]
        k_p = key[d + axis - 1]
        others = [x for i, x in enumerate(key) if i not in (axis - 1, d + axis - 1)]
        if any(others):
            raise NotSeparable("term differentiates along another axis")
        integ = f
        for m in range(k_p + 1):
            integ = _integrate_phase(integ, axis)
            coeff = (integ * PhaseExpr.momentum(axis, d, -(m + 1))).scale(mpq(factorial(k_p), factorial(k_p - m)))
            G = G + DiffOp.axis_term(d, axis, coeff, k_p - m, l_q + m)
    return G


# ---------------------------------------------------------------------------
# a_j


def _V_list(V, d):
    V = [RationalExpr.coerce(v) for v in V]
    if len(V) != d:
        raise ValueError("need one potential summand per axis")
    return V


def build_a(j: int, V, d: int | None = None) -> DiffOp:
    """Closed-form ``a_j`` for potentials ``V = [V_1, ..., V_d]``."""
    d = d or len(V)
    V = _V_list(V, d)
    if j == 0:
        return a0_op(d)
    pref = HBAR_OVER_I ** (j - 1)
    op = DiffOp.zero(d)
    for i in range(1, d + 1):
        v = q(i)
        if V[i - 1].is_zero():
            continue
        iV = antiderivative(V[i - 1], v)
        op = op + DiffOp.axis_term(d, i, _pc(iV * pref, d) * PhaseExpr.momentum(i, d, -(j + 1)), 0, j)
        deriv = V[i - 1]
        for k in range(1, j + 1):
            c = _pc((deriv * pref).scale(mpq(1, factorial(k))), d) * PhaseExpr.momentum(i, d, -(j - k + 1))
            op = op + DiffOp.axis_term(d, i, c, k, j - k)
            deriv = deriv.diff(v)
    return op


def _pc(r, d):
    return PhaseExpr.from_rational(r, d)


def ad_L_rhs(j: int, V, d: int | None = None) -> DiffOp:
    """Right-hand side of the defining relation of ``a_j``.

    ``j >= 1``: ``(1/j!) (hbar/I)^(j-1) sum V_i^(j) d^j/dp_i^j``;
    ``j = 0``: ``-(hbar/2I) sum d^2/dq_i^2``.
    """
    d = d or len(V)
    V = _V_list(V, d)
    op = DiffOp.zero(d)
    if j == 0:
        c = -HBAR_OVER_I.scale(mpq(1, 2))
        for i in range(1, d + 1):
            op = op + DiffOp.axis_term(d, i, c, 0, 2)
        return op
    pref = (HBAR_OVER_I ** (j - 1)).scale(mpq(1, factorial(j)))
    for i in range(1, d + 1):
        dv = V[i - 1].diff(q(i), j)
        if not dv.is_zero():
            op = op + DiffOp.axis_term(d, i, dv * pref, j, 0)
    return op


def verify_a(j: int, V, a: DiffOp | None = None) -> bool:
    """Check ``[L, a_j]`` against its defining right-hand side exactly."""
    d = len(V)
    if a is None:
        a = build_a(j, V, d)
    return commutator(L_op(d), a) == ad_L_rhs(j, V, d)


# ---------------------------------------------------------------------------
# s-series of operators


def a_list(V, n: int, d: int | None = None):
    d = d or len(V)
    return [build_a(j, V, d) for j in range(n + 1)]


def _series_commutator(A, C, order):
    """``[A, C]`` for s-series (lists indexed by power), truncated."""
    d = A[0].d
    out = [DiffOp.zero(d) for _ in range(order + 1)]
    for i, a in enumerate(A):
        if not a:
            continue
        for j, c in enumerate(C):
            if i + j > order or not c:
                continue
            out[i + j] = out[i + j] + commutator(a, c)
    return out


def build_A_series(j: int, a: list, order: int, d: int):
    """Coefficients ``[a_{0,j}, ..., a_{order,j}]`` of ``A_j`` by inversion."""
    L = L_op(d)
    C = [commutator(L, x) for x in a[:order + 1]]
    C = C + [DiffOp.zero(d)] * (order + 1 - len(C))
    A = a[:order + 1] + [DiffOp.zero(d)] * (order + 1 - len(a))
    for _ in range(j):
        C = _series_commutator(A, C, order)
    w = mpq(j, factorial(j + 1))
    return [invert_ad_L(c.scale(w)) if c else DiffOp.zero(d) for c in C]


def build_aij(i: int, j: int, V, printed: bool = True) -> DiffOp:
    """``a_{i,j}``: printed closed forms for (2,1), (1,2), otherwise by inversion."""
    d = len(V)
    if printed and (i, j) == (2, 1):
        return printed_a21(V)
    if printed and (i, j) == (1, 2):
        return printed_a12(V)
    a = a_list(V, i, d)
    return build_A_series(j, a, i, d)[i]


def defining_rhs_aij(i: int, j: int, V) -> DiffOp:
    """``s^i`` coefficient of ``j/(j+1)! (ad A)^j [L, A]``."""
    d = len(V)
    a = a_list(V, i, d)
    L = L_op(d)
    C = [commutator(L, x) for x in a]
    for _ in range(j):
        C = _series_commutator(a, C, i)
    return C[i].scale(mpq(j, factorial(j + 1)))


def _axis_coeff(d, axis, r, p_power):
    return PhaseExpr.from_rational(r, d) * PhaseExpr.momentum(axis, d, p_power)


def printed_a21(V) -> DiffOp:
    """Closed form of ``a_{2,1}`` (printed operator)."""
    d = len(V)
    V = _V_list(V, d)
    h2 = RationalExpr.var(HBAR_VAR, 2)
    op = DiffOp.zero(d)
    for i in range(1, d + 1):
        v = q(i)
        Vi = V[i - 1]
        if Vi.is_zero():
            continue
        I1 = antiderivative(Vi, v)
        I2 = antiderivative(Vi * Vi, v)
        d1 = Vi.diff(v)
        d2 = d1.diff(v)
        T = lambda r, pp, kp, lq: DiffOp.axis_term(d, i, _axis_coeff(d, i, r, pp), kp, lq)  # noqa: E731
        op = op + T((Vi * I1 * 3 - I2 * 3).scale(mpq(1, 2)), -4, 0, 1)
        op = op + T((d1 * I1).scale(mpq(1, 2)), -3, 1, 0)
        op = op - T(h2 * I1.scale(mpq(9, 4)), -4, 0, 3)
        op = op - T(h2 * Vi.scale(mpq(3, 4)), -4, 0, 2)
        op = op - T(h2 * Vi.scale(mpq(7, 4)), -3, 1, 2)
        op = op - T(h2 * d1.scale(mpq(1, 2)), -3, 1, 1)
        op = op - T(h2 * d1.scale(mpq(5, 8)), -2, 2, 1)
        op = op - T(h2 * d2.scale(mpq(1, 8)), -2, 2, 0)
        op = op - T(h2 * d2.scale(mpq(1, 8)), -1, 3, 0)
    return op


def printed_a12(V) -> DiffOp:
    """Closed form of ``a_{1,2}`` (printed operator)."""
    d = len(V)
    V = _V_list(V, d)
    h2 = RationalExpr.var(HBAR_VAR, 2)
    op = DiffOp.zero(d)
    for i in range(1, d + 1):
        v = q(i)
        Vi = V[i - 1]
        if Vi.is_zero():
            continue
        I1 = antiderivative(Vi, v)
        d1 = Vi.diff(v)
        d2 = d1.diff(v)
        T = lambda r, pp, kp, lq: DiffOp.axis_term(d, i, _axis_coeff(d, i, h2 * r, pp), kp, lq)  # noqa: E731
        op = op + T(I1.scale(mpq(-1, 2)), -4, 0, 3)
        op = op + T(Vi.scale(mpq(1, 2)), -4, 0, 2)
        op = op + T(Vi.scale(mpq(-5, 6)), -3, 1, 2)
        op = op + T(d1.scale(mpq(1, 4)), -4, 0, 1)
        op = op + T(d1.scale(mpq(-5, 12)), -2, 2, 1)
        op = op + T(d2.scale(mpq(1, 12)), -3, 1, 0)
        op = op + T(d2.scale(mpq(-1, 12)), -2, 2, 0)
        op = op + T(d2.scale(mpq(-1, 12)), -1, 3, 0)
    return op


# ---------------------------------------------------------------------------
# (s, t) series and the B expansion


class Series2:
    """Truncated power series in ``s, t`` with DiffOp coefficients."""

    def __init__(self, d, order, terms=None):
        self.d = d
        self.order = order
        self.terms = {k: v for k, v in (terms or {}).items() if v and sum(k) <= order}

    @classmethod
    def one(cls, d, order):
        return cls(d, order, {(0, 0): DiffOp.identity(d)})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return Series2(self.d, self.order, out)

    def scale(self, c):
        return Series2(self.d, self.order, {k: v.scale(c) for k, v in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for (i1, j1), x in self.terms.items():
            for (i2, j2), y in other.terms.items():
                k = (i1 + i2, j1 + j2)
                if sum(k) > self.order:
                    continue
                prod = compose_ops(x, y)
                out[k] = out[k] + prod if k in out else prod
        return Series2(self.d, self.order, out)

    def commutator(self, other):
        out = {}
        for (i1, j1), x in self.terms.items():
            for (i2, j2), y in other.terms.items():
                k = (i1 + i2, j1 + j2)
                if sum(k) > self.order:
                    continue
                c = commutator(x, y)
                out[k] = out[k] + c if k in out else c
        return Series2(self.d, self.order, out)

    def shift_t(self, n=1):
        return Series2(self.d, self.order, {(i, j + n): v for (i, j), v in self.terms.items()})

    def get(self, i, j):
        return self.terms.get((i, j), DiffOp.zero(self.d))


def b_coefficients(V, order: int, aij_override=None):
    """All ``b_{i,j}`` with ``i + j <= order`` from the B expansion.

    Uses ``B = (1 + t A' + t^2 (A'^2/2 + A'_1)) exp(t A)`` which is exact for
    ``i + j <= 6``.

    Parameters
    ----------
    aij_override : dict, optional
        Replacement ``{(i, j): DiffOp}`` for chosen ``a_{i,j}``.
    """
    if order > 6:
        raise UnsupportedOrder("B expansion implemented for i + j <= 6 (W_k with k <= 3)")
    d = len(V)
    a = a_list(V, order, d)
    A = Series2(d, order, {(i, 0): x for i, x in enumerate(a)})
    # exp(tA)
    expo = Series2.one(d, order)
    term = Series2.one(d, order)
    for m in range(1, order + 1):
        term = (term * A).shift_t().scale(mpq(1, m))
        expo = expo + term
    # A' = sum_j t^j A_j
    Ap_terms = {}
    override = aij_override or {}
    for j in range(1, order):
        # t * A_j s^i lands on s^i t^(j+1)
        top = order - j - 1
        todo = [i for i in range(top + 1) if (i, j) not in override]
        coeffs = build_A_series(j, a, max(todo), d) if todo else []
        for i in range(top + 1):
            x = override[(i, j)] if (i, j) in override else coeffs[i]
            if x:
                Ap_terms[(i, j)] = x
    Ap = Series2(d, order, Ap_terms)
    B_prime = Series2.one(d, order) + Ap.shift_t()
    if order > 4:
        B2 = (Ap * Ap).scale(mpq(1, 2)) + A_prime_k(Ap, 1)
        B_prime = B_prime + B2.shift_t(2)
    B = B_prime * expo
    return {(i, j): B.get(i, j) for i in range(order + 1) for j in range(order + 1 - i)}


def A_prime_k(Ap: Series2, k: int) -> Series2:
    """Solve ``[L, A'_k] = k/(k+1)! (ad A')^k [L, A']`` coefficientwise."""
    d = Ap.d
    L = L_op(d)
    C = Series2(d, Ap.order, {key: commutator(L, v) for key, v in Ap.terms.items()})
    for _ in range(k):
        C = Ap.commutator(C)
    w = mpq(k, factorial(k + 1))
    return Series2(d, Ap.order, {key: invert_ad_L(v.scale(w)) for key, v in C.terms.items()})


def build_aijk(i: int, j: int, k: int, V) -> DiffOp:
    """``s^i t^j`` coefficient of ``A'_k`` (the primed analogue of ``A_k``)."""
    d = len(V)
    order = i + j
    a = a_list(V, order, d)
    terms = {}
    for jj in range(1, order + 1):
        for ii, x in enumerate(build_A_series(jj, a, order - jj, d)):
            if x:
                terms[(ii, jj)] = x
    return A_prime_k(Series2(d, order, terms), k).get(i, j)


def W_from_b(k: int, b: dict, d: int, W_lower: list | None = None) -> DiffOp:
    """The W-recursion expressed through the ``b_{i,j}`` and ``a_0``."""
    a0 = a0_op(d)
    a0p = [DiffOp.identity(d)]
    for _ in range(2 * k):
        a0p.append(compose_ops(a0p[-1], a0))
    W = W_lower if W_lower is not None else [DiffOp.identity(d)]
    total = DiffOp.zero(d)
    for j in range(k):
        inner = DiffOp.zero(d)
        for i in range(1, 2 * k - 2 * j + 1):
            x = b.get((2 * k - i - 2 * j, i))
            if x:
                inner = inner + (x if (i + 1) % 2 == 0 else -x)
        for i in range(0, 2 * k - 2 * j):
            for ell in range(2 * j + 1, 2 * k - i + 1):
                x = b.get((2 * k - i - ell, i))
                if not x:
                    continue
                c = mpq((-1) ** (i + 1) * 2 ** (ell - 2 * j - 1), factorial(ell - 2 * j))
                inner = inner + compose_ops(x, a0p[ell - 2 * j]).scale(c)
        if inner:
            total = total + compose_ops(inner, W[j])
    return total


def W_series(V, kmax: int, aij_override=None):
    """``[W_0, ..., W_kmax]`` through the B expansion route.

    ``a_{i,j}`` are fixed only up to the kernel of ad_L; by default the printed
    ``a_{2,1}`` and ``a_{1,2}`` are used so that both W routes share one choice.
    """
    if kmax > 3:
        raise UnsupportedOrder("W_k implemented for k <= 3")
    d = len(V)
    if aij_override is None:
        aij_override = {(2, 1): printed_a21(V), (1, 2): printed_a12(V)}
    b = b_coefficients(V, 2 * kmax, aij_override)
    W = [DiffOp.identity(d)]
    for k in range(1, kmax + 1):
        W.append(W_from_b(k, b, d, W))
    return W


def W2_closed(V) -> DiffOp:
    """``W_2`` from its algebraic closed form with the printed ``a_{2,1}``, ``a_{1,2}``."""
    d = len(V)
    a0, a1, a2, a3 = a_list(V, 3, d)
    c = compose_ops
    out = c(a1, a1).scale(mpq(1, 2))
    out = out + commutator(a2, a0).scale(mpq(1, 2))
    out = out - c(c(a0, a0), a1).scale(mpq(1, 3))
    out = out - c(c(a0, a1), a0).scale(mpq(1, 3))
    out = out + c(a1, c(a0, a0)).scale(mpq(1, 6))
    out = out + c(c(a0, a0), c(a0, a0)).scale(mpq(5, 24))
    out = out + a3 - printed_a21(V) + printed_a12(V)
    return out


def build_W(k: int, V, route: str = "closed") -> DiffOp:
    """Correction operator ``W_k`` with ``Y_k = sum_i W_i Z_{k-i}``.

    ``route="closed"`` uses the algebraic forms for ``k <= 2`` (and the B
    expansion for ``k = 3``); ``route="series"`` always uses the B expansion.
    """
    d = len(V)
    if k < 0 or k > 3:
        raise UnsupportedOrder("W_k implemented for 0 <= k <= 3")
    if k == 0:
        return DiffOp.identity(d)
    if route == "closed" and k == 1:
        a0, a1 = a_list(V, 1, d)
        return a1 - compose_ops(a0, a0).scale(mpq(1, 2))
    if route == "closed" and k == 2:
        return W2_closed(V)
    return W_series(V, k)[k]


@lru_cache(maxsize=64)
def _cached_W(k, key, route):
    V = [r for r in key]
    return build_W(k, V, route)


def W_cached(k: int, V, route: str = "closed") -> DiffOp:
    """Memoized :func:`build_W` keyed on the (hashable) potentials."""
    return _cached_W(k, tuple(V), route)


# ---------------------------------------------------------------------------
# Power identity: k A^(k-1) [L,A] = [L, A^k] + sum_i k!/(k-1-i)! [L, A_i] A^(k-1-i)


def power_commutator_sides(A: DiffOp, k: int):
    """Both sides of the power identity for a single separable ``A``.

    ``A_i`` (``1 <= i < k``) is obtained from
    ``[L, A_i] = i/(i+1)! (ad A)^i [L, A]`` by :func:`invert_ad_L`; the
    commutators ``[L, A_i]`` are then recomputed from the inverted operators.
    Returns ``(lhs, rhs)`` as DiffOps.
    """
    d = A.d
    L = L_op(d)
    LA = commutator(L, A)
    Ak = [DiffOp.identity(d)]
    for _ in range(k):
        Ak.append(compose_ops(Ak[-1], A))
    lhs = compose_ops(Ak[k - 1], LA).scale(k)
    rhs = commutator(L, Ak[k])
    C = LA
    for i in range(1, k):
        C = commutator(A, C)
        Ai = invert_ad_L(C.scale(mpq(i, factorial(i + 1))))
        rhs = rhs + compose_ops(commutator(L, Ai), Ak[k - 1 - i]).scale(mpq(factorial(k), factorial(k - 1 - i)))
    return lhs, rhs


def power_commutator_check(A: DiffOp, k: int, tests=None) -> bool:
    """Verify the power identity by normal form and on test functions."""
    lhs, rhs = power_commutator_sides(A, k)
    if lhs != rhs:
        return False
    for f in tests or ():
        if lhs(f) != rhs(f):
            return False
    return True


lemma4_check = power_commutator_check
