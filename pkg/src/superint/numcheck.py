"""Classical trajectories (hbar = 0) and conservation drift of corpus integrals.

Exact symbols are turned into small float functions by generating Python
source for each numerator and denominator factor; the integrator is a plain
fixed-step RK4 so that drift figures are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite

import numpy as np
from gmpy2 import mpq

from .errors import NonFiniteState, PoleProximity
from .phase import PhaseExpr
from .symcore.rational import RationalExpr
from .symcore.variables import HBAR_VAR, P, Q, q

# models with a nonconstant classical limit and exactly listed integrals
CLASSICAL_MODELS = ("1", "2", "2a", "2b", "2c", "2d", "3", "9", "14", "15", "16", "17")


def _column(v, d):
    if v.kind == Q:
        return v.index - 1
    if v.kind == P:
        return d + v.index - 1
    raise ValueError(f"{v} is not a phase-space variable; substitute parameters first")


def _poly_source(poly, d) -> str:
    parts = []
    for e, c in poly.terms.items():
        if e[-1]:
            raise ValueError("complex coefficient in a classical symbol")
        fac = [repr(float(c))]
        for g, k in zip(poly.gens, e):
            if k:
                col = _column(g, d)
                fac.append(f"x[{col}]" if k == 1 else f"x[{col}]**{k}")
        parts.append("*".join(fac))
    return "(" + " + ".join(parts) + ")" if parts else "0.0"


class FloatFunction:
    """Float evaluator of a real RationalExpr in the state ``(q_1..q_d, p_1..p_d)``.

    ``x`` may be a tuple of floats or a tuple of numpy arrays.  Denominator
    factors are exposed through :meth:`denominators` for pole checks.
    """

    def __init__(self, r: RationalExpr, d: int):
        self.d = d
        num = _poly_source(r.num, d)
        dens = [(_poly_source(f, d), m) for f, m in r.den]
        body = num
        for src, m in dens:
            body += f" / {src}" + (f"**{m}" if m > 1 else "")
        self._f = eval(f"lambda x: {body}")
        self._dens = [eval(f"lambda x: {src}") for src, _ in dens]

    def __call__(self, x):
        return self._f(x)

    def denominators(self, x):
        return [f(x) for f in self._dens]


def phase_float(f: PhaseExpr):
    """Float evaluator of a momentum-polynomial symbol at hbar = 0."""
    f.require_polynomial("phase_float")
    f = f.subs({HBAR_VAR: 0})
    d = f.d
    pieces = []
    for e, c in f.terms.items():
        cf = FloatFunction(c, d)
        cols = [(d + i, k) for i, k in enumerate(e) if k]
        pieces.append((cf, cols))

    def fn(x):
        acc = 0.0
        for cf, cols in pieces:
            t = cf(x)
            for col, k in cols:
                t = t * x[col] ** k
            acc = acc + t
        return acc

    return fn


def _classical(values):
    vals = {k: mpq(v) for k, v in values.items()}
    vals["hbar"] = mpq(0)
    return vals


@dataclass
class Trajectory:
    """Sampled classical trajectory with conservation figures.

    Attributes
    ----------
    t : ndarray
        Sample times, ``T/dt + 1`` of them.
    states : ndarray
        Shape ``(len(t), 2d)``, columns ``q_1..q_d, p_1..p_d``.
    H, X : ndarray, dict of ndarray
        Energy and integral values along the trajectory.
    h_drift, x_drift : float, dict
        ``max_t |F(t) - F(0)| / max(1, |F(0)|)``.
    """

    model: str
    params: dict
    q0: tuple
    p0: tuple
    dt: float
    T: float
    t: np.ndarray
    states: np.ndarray
    H: np.ndarray
    X: dict = field(default_factory=dict)
    h_drift: float = 0.0
    x_drift: dict = field(default_factory=dict)

    def report_lines(self):
        """Tab separated ``model, integral, dt, T, H-drift, X-drift`` rows."""
        return [f"{self.model}\t{i}\t{self.dt:g}\t{self.T:g}\t{self.h_drift:.3e}\t{v:.3e}"
                for i, v in self.x_drift.items()]


def drift(values: np.ndarray) -> float:
    ref = float(values[0])
    return float(np.max(np.abs(values - ref)) / max(1.0, abs(ref)))


def _force(V, d):
    """Float callables ``-dV/dq_i``."""
    total = RationalExpr.zero()
    for v in V:
        total = total + v
    return [FloatFunction(-total.diff(q(i)), d) for i in range(1, d + 1)]


def _rk4(force, x0, dt, steps, margin, d):
    n = 2 * d
    states = np.empty((steps + 1, n))
    states[0] = x0

    def rhs(x):
        for f in force:
            for den in f.denominators(x):
                if abs(den) < margin:
                    raise PoleProximity(f"denominator {den:.3g} within margin {margin:g} at {tuple(x)}")
        return tuple(x[d:]) + tuple(f(x) for f in force)

    x = tuple(float(v) for v in x0)
    h2, h6 = dt / 2, dt / 6
    for s in range(1, steps + 1):
        k1 = rhs(x)
        k2 = rhs(tuple(x[j] + h2 * k1[j] for j in range(n)))
        k3 = rhs(tuple(x[j] + h2 * k2[j] for j in range(n)))
        k4 = rhs(tuple(x[j] + dt * k3[j] for j in range(n)))
        x = tuple(x[j] + h6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]) for j in range(n))
        if not all(isfinite(v) for v in x):
            raise NonFiniteState(f"non-finite state at step {s}")
        states[s] = x
    return states


def simulate(model, params: dict, q0, p0, dt: float, T: float, integrals=None,
             margin: float = 1e-6, x_params: dict | None = None) -> Trajectory:
    """Integrate ``dq/dt = p, dp/dt = -grad V`` at hbar = 0 with fixed-step RK4.

    Parameters
    ----------
    model : Model
    params : dict
        Parameter values (rationals or floats; floats are taken exactly).
    q0, p0 : sequence of float
    dt, T : float
        Step and duration; ``T/dt`` must be (close to) an integer.
    integrals : iterable of str, optional
        Integral ids to monitor, default all.
    margin : float
        Minimum allowed ``|factor|`` for every denominator factor of the force.
    x_params : dict, optional
        Parameter values used for the integrals only (negative controls).

    Raises
    ------
    ValueError
        Bad step size or duration, or a model without classical content.
    PoleProximity, NonFiniteState
    """
    if not dt > 0 or not T > 0:
        raise ValueError("dt and T must be positive")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise ValueError("T must be an integer multiple of dt")
    d = model.d
    ctx = model.context(_classical(params))
    V = ctx.potentials()
    if all(v.is_constant() for v in V):
        raise ValueError(f"model {model.name!r} is quantum-only (constant classical potential)")
    xctx = ctx if x_params is None else model.context(_classical(x_params))
    x0 = np.array(list(q0) + list(p0), dtype=float)
    if x0.shape != (2 * d,):
        raise ValueError(f"need {d} positions and {d} momenta")
    states = _rk4(_force(V, d), x0, dt, steps, margin, d)
    cols = tuple(states[:, j] for j in range(2 * d))
    H = np.asarray(phase_float(ctx.hamiltonian())(cols), dtype=float) * np.ones(steps + 1)
    ids = [c.id for c in model.integrals] if integrals is None else list(integrals)
    Xs = {}
    for i in ids:
        Xs[i] = np.asarray(phase_float(xctx.lookup(i))(cols), dtype=float) * np.ones(steps + 1)
    for arr in [H] + list(Xs.values()):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteState("non-finite value of H or an integral")
    traj = Trajectory(model.name, dict(params), tuple(q0), tuple(p0), dt, T,
                      np.linspace(0.0, steps * dt, steps + 1), states, H, Xs)
    traj.h_drift = drift(H)
    traj.x_drift = {i: drift(a) for i, a in Xs.items()}
    return traj


def convergence_ratios(model, params, q0, p0, dts, T, integral: str) -> list:
    """Drift ratios ``drift(dt_k) / drift(dt_{k+1})`` for successive step sizes."""
    drifts = [simulate(model, params, q0, p0, dt, T, integrals=[integral]).x_drift[integral] for dt in dts]
    return [a / b for a, b in zip(drifts, drifts[1:])]
