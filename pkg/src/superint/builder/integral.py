"""Assembly of Y_k from the Z_k, residue extraction and the Hermitean X."""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from ..errors import InconsistentAnsatz, NonPolynomialMomenta
from ..opalg.diffop import L_op, apply
from ..opalg.ladder import W_cached
from ..phase import PhaseExpr, apply_a0, star
from ..symcore.rational import RationalExpr


def _c(m: int):
    """Weight of ``a_0^m`` in ``(1 + exp(2 a_0)) / 2``."""
    return mpq(1) if m == 0 else mpq(2 ** (m - 1), factorial(m))


def _a0_pow(f: PhaseExpr, m: int) -> PhaseExpr:
    for _ in range(m):
        if not f:
            break
        f = apply_a0(f)
    return f


def _V(V):
    return tuple(RationalExpr.coerce(v) for v in V)


def assemble_Y(k: int, Z: list, V) -> PhaseExpr:
    """``Y_k = sum_{i=0}^{k} W_i Z_{k-i}``."""
    V = _V(V)
    Y = PhaseExpr.zero(len(V))
    for i in range(k + 1):
        if k - i >= len(Z) or not Z[k - i]:
            continue
        Y = Y + (Z[k - i] if i == 0 else apply(W_cached(i, V), Z[k - i]))
    return Y


def residues(Yk: PhaseExpr, k: int) -> dict:
    """Residues ``R_{k,i,j}`` for ``0 <= i <= 2k-1`` and every axis ``j``.

    ``R_{k,i,j}`` is the coefficient of ``p_j^(i-2k)`` in ``Y_k`` multiplied by
    ``p_l^(2k)`` for each other axis ``l``.  Returns ``{(k, i, j): PhaseExpr}``.
    """
    d = Yk.d
    out = {}
    for j in range(1, d + 1):
        for i in range(2 * k):
            acc = {}
            for e, c in Yk.terms.items():
                if e[j - 1] != i - 2 * k:
                    continue
                ne = tuple(0 if a == j - 1 else x + 2 * k for a, x in enumerate(e))
                acc[ne] = c
            out[(k, i, j)] = PhaseExpr(d, acc)
    return out


def residues_vanish(Yk: PhaseExpr, k: int) -> bool:
    return not any(residues(Yk, k).values())


def y_from_x(X: PhaseExpr) -> list:
    """Invert the even-component relations for ``Y_0, Y_1, ...``.

    ``X_{2i} = Y_i + sum_{j<i} c_{2i-2j} a_0^{2i-2j} Y_j`` with
    ``c_m = 2^(m-1)/m!``; ``X_m`` is the part of momentum degree ``n - m``.
    """
    X.require_polynomial("y_from_x")
    n = X.degree()
    Y = []
    for i in range(n // 2 + 1):
        y = X.part_of_degree(n - 2 * i)
        for j in range(i):
            y = y - _a0_pow(Y[j], 2 * i - 2 * j).scale(_c(2 * i - 2 * j))
        Y.append(y)
    return Y


def x_from_y(Y: list, n: int) -> list:
    """Components ``X_0 .. X_n`` from ``Y_0 ..`` (both parity relations)."""
    d = Y[0].d if Y else 2
    X = []
    for m in range(n + 1):
        acc = PhaseExpr.zero(d)
        for j in range(len(Y)):
            if 2 * j <= m:
                acc = acc + _a0_pow(Y[j], m - 2 * j).scale(_c(m - 2 * j))
        X.append(acc)
    return X


def assemble_X(Y: PhaseExpr, check: bool = True) -> PhaseExpr:
    """Hermitean part ``X = (Y + Y*) / 2``.

    When ``Y`` is real the component relations between ``X`` and the
    ``Y_i`` are verified as well.

    Raises
    ------
    NonPolynomialMomenta
        If ``Y`` has negative momentum powers.
    """
    if not Y.is_polynomial():
        raise NonPolynomialMomenta("Y has reciprocal momenta; residues do not vanish")
    X = (Y + star(Y)).scale(mpq(1, 2))
    if check and Y.is_real() and Y:
        n = Y.degree()
        Ys = [Y.part_of_degree(n - 2 * i) for i in range(n // 2 + 1)]
        odd = [Y.part_of_degree(n - 2 * i - 1) for i in range((n + 1) // 2)]
        if not any(odd):
            comps = x_from_y(Ys, n)
            for m, c in enumerate(comps):
                if X.part_of_degree(n - m) != c:
                    raise ArithmeticError(f"component relation fails at X_{m}")
    return X


def z_from_integral(X: PhaseExpr, V, n: int | None = None) -> list:
    """Integration constants ``Z_0 .. Z_ceil(n/2)`` of a known integral.

    ``Y_k`` is recovered from ``X`` and ``Z_k = Y_k - sum_{i>=1} W_i Z_{k-i}``
    with ``Y_k = 0`` beyond ``floor(n/2)``.

    Raises
    ------
    InconsistentAnsatz
        If some ``Z_k`` is not annihilated by ``L``.
    """
    V = _V(V)
    d = len(V)
    Y = y_from_x(X)
    n = X.degree() if n is None else n
    L = L_op(d)
    Z = []
    for k in range((n + 1) // 2 + 1):
        yk = Y[k] if k < len(Y) else PhaseExpr.zero(d)
        z = yk - (assemble_Y(k, Z + [PhaseExpr.zero(d)], V))
        if apply(L, z):
            raise InconsistentAnsatz(f"Z_{k} extracted from the integral is not in the kernel of L")
        Z.append(z)
    return Z


def build_integral(Z: list, V, n: int):
    """Run the construction for an order-``n`` ansatz.

    Returns ``(X, residue_table)`` where ``residue_table`` maps ``(k, i, j)``
    to the residues of ``Y_k``.  ``X`` is ``None`` when some residue survives.
    """
    V = _V(V)
    d = len(V)
    Y = PhaseExpr.zero(d)
    table = {}
    for k in range((n + 1) // 2 + 1):
        Yk = assemble_Y(k, Z, V)
        if k:
            table.update(residues(Yk, k))
        Y = Y + Yk
    if any(table.values()):
        return None, table
    return assemble_X(Y), table
