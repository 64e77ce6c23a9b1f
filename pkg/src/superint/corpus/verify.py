"""Commutation verification of corpus integrals, exact and randomized."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field

from gmpy2 import mpq

from ..errors import DenominatorZero, EvaluationAtPole
from ..phase import PhaseExpr, bracket
from ..symcore.mpoly import MPoly
from ..symcore.rational import RationalExpr
from ..symcore.variables import HBAR_VAR, Q, p, q

# numerators and denominators of sampled rationals are bounded by this
SAMPLE_BOUND = 2 ** 16
MAX_RESAMPLE = 50


@dataclass
class VerifyOutcome:
    model: str
    integral: str
    mode: str
    passed: bool
    trials: int = 0
    seed: int | None = None
    witnesses: list = field(default_factory=list)
    detail: str = ""
    failure_bound: float | None = None

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = f" trials={self.trials} seed={self.seed}" if self.mode == "randomized" else ""
        tail = f" ({self.detail})" if self.detail else ""
        return f"{self.model}\t{self.integral}\t{self.mode}\t{status}{extra}{tail}"


def sample_rational(rng: random.Random, bound: int = SAMPLE_BOUND) -> mpq:
    """Uniform nonzero numerator in ``[-bound, bound]`` over denominator in ``[1, bound]``."""
    while True:
        n = rng.randint(-bound, bound)
        if n:
            return mpq(n, rng.randint(1, bound))


def _point(rng, d):
    vals = {}
    for i in range(1, d + 1):
        vals[q(i)] = sample_rational(rng)
        vals[p(i)] = sample_rational(rng)
    return vals


def _order_problem(X: PhaseExpr, claimed: int):
    if not X.is_polynomial():
        return "not polynomial in the momenta"
    deg = X.degree()
    if deg != claimed:
        return f"momentum degree {deg}, claimed order {claimed}"
    return ""


def _residual_degree(R: PhaseExpr) -> int:
    deg = 0
    for e, c in R.terms.items():
        deg = max(deg, sum(e) + c.num.degree())
    return deg


def verify(model, mode: str = "exact", trials: int = 5, seed: int = 0, ids=None) -> list:
    """Check ``(X, H) = 0`` for every claimed integral of ``model``.

    Parameters
    ----------
    model : Model
    mode : {"exact", "randomized"}
        Exact mode expands everything symbolically and tests the canonical
        zero.  Randomized mode draws rational values for the parameters and
        hbar, expands the bracket in the phase-space variables, and evaluates
        it at random rational points (Schwartz-Zippel); poles are resampled.
    trials : int
        Number of independent random trials per integral.
    seed : int
        Seed of the private generator; identical seeds give identical output.
    ids : iterable of str, optional
        Restrict to these integral ids.

    Returns
    -------
    list of VerifyOutcome
        One per integral and, for degenerate models, per sample of the
        arbitrary potential.
    """
    if mode not in ("exact", "randomized"):
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    wanted = None if ids is None else set(ids)
    for sample in range(model.sample_count()):
        suffix = f"@V{model.arbitrary_axes[0]}#{sample}" if model.arbitrary_axes else ""
        for claim in model.integrals:
            if wanted is not None and claim.id not in wanted:
                continue
            if mode == "exact":
                res = _verify_exact(model, claim, sample)
            else:
                res = _verify_random(model, claim, sample, trials, seed)
            res.integral = claim.id + suffix
            out.append(res)
    return out


def _verify_exact(model, claim, sample):
    ctx = model.context({}, sample)
    X = ctx.lookup(claim.id)
    problem = _order_problem(X, claim.order)
    if problem:
        return VerifyOutcome(model.name, claim.id, "exact", False, detail=problem)
    R = bracket(X, ctx.hamiltonian())
    detail = "" if R.is_zero() else f"{len(R.terms)} nonzero momentum monomials in (X, H)"
    return VerifyOutcome(model.name, claim.id, "exact", R.is_zero(), detail=detail)


def _verify_random(model, claim, sample, trials, seed):
    rng = random.Random(f"{seed}:{model.name}:{claim.id}:{sample}")
    witnesses = []
    names = list(model.params) + ["hbar"]
    bound = 0.0
    space = float(2 * SAMPLE_BOUND) * SAMPLE_BOUND
    for _ in range(trials):
        for _attempt in range(MAX_RESAMPLE):
            values = {n: sample_rational(rng) for n in names}
            try:
                ctx = model.context(values, sample)
                X = ctx.lookup(claim.id)
                problem = _order_problem(X, claim.order)
                if problem:
                    return VerifyOutcome(model.name, claim.id, "randomized", False, len(witnesses), seed,
                                         witnesses, problem)
                R = bracket(X, ctx.hamiltonian())
                pt = _point(rng, model.d)
                pt[HBAR_VAR] = values["hbar"]
                val = R.evaluate(pt)
            except (EvaluationAtPole, DenominatorZero):
                continue
            break
        else:
            return VerifyOutcome(model.name, claim.id, "randomized", False, len(witnesses), seed,
                                 witnesses, "no pole-free sample found")
        w = {k: str(v) for k, v in values.items()}
        w.update({str(k): str(v) for k, v in pt.items() if k != HBAR_VAR})
        witnesses.append(w)
        bound = max(bound, _residual_degree(R) / space)
        if val:
            return VerifyOutcome(model.name, claim.id, "randomized", False, len(witnesses), seed,
                                 witnesses, f"(X, H) = {val} at the last witness", bound)
    return VerifyOutcome(model.name, claim.id, "randomized", True, len(witnesses), seed, witnesses,
                         "", bound)


def summary_json(outcomes) -> str:
    """One JSON record per outcome, newline separated, keys sorted."""
    return "\n".join(json.dumps(asdict(o), sort_keys=True) for o in outcomes)


# -- independence --------------------------------------------------------------

def _split_q(c: RationalExpr, d: int):
    """Coefficients of ``c`` by monomial in the positions (``None`` key if not polynomial in q)."""
    if any(v.kind == Q for f, _ in c.den for v in f.used_vars()):
        return {None: c}
    qidx = [k for k, v in enumerate(c.num.gens) if v.kind == Q]
    groups = {}
    for e, coef in c.num.terms.items():
        key = [0] * d
        rest = list(e)
        for k in qidx:
            key[c.num.gens[k].index - 1] = e[k]
            rest[k] = 0
        groups.setdefault(tuple(key), {})[tuple(rest)] = coef
    dpoly = RationalExpr(MPoly.const(1), c.den)
    return {k: RationalExpr(MPoly(c.num.gens, t, False)) * dpoly for k, t in groups.items()}


def _vectorize(f: PhaseExpr):
    out = {}
    for e, c in f.terms.items():
        for k, v in _split_q(c, f.d).items():
            out[(e, k)] = v
    return out


def _rank(rows) -> int:
    """Rank of a list of sparse rows (dict key -> RationalExpr) by elimination."""
    rows = [dict(r) for r in rows if r]
    rank = 0
    while rows:
        piv_row = rows.pop()
        key = next(iter(sorted(piv_row, key=repr)))
        pv = piv_row[key]
        rank += 1
        new = []
        for r in rows:
            if key in r:
                f = r[key] / pv
                nr = dict(r)
                for k, v in piv_row.items():
                    nv = nr.get(k, RationalExpr.zero()) - f * v
                    if nv.is_zero():
                        nr.pop(k, None)
                    else:
                        nr[k] = nv
                r = nr
            if r:
                new.append(r)
        rows = new
    return rank


@dataclass
class IndependenceReport:
    model: str
    rows: list

    @property
    def all_independent(self) -> bool:
        return all(r[2] for r in self.rows)

    def lines(self):
        return [f"{self.model}\t{i}\torder {n}\t{'independent' if ok else 'dependent'}"
                for i, n, ok in self.rows]


def leading_independent(X: PhaseExpr, H_parts) -> bool:
    """Whether the top-degree part of ``X`` avoids the span of monomials in ``H_1..H_d``."""
    n = X.degree()
    lead = X.part_of_degree(n)
    d = X.d
    basis = []
    for exps in _compositions(n // 2, d) if n % 2 == 0 else []:
        m = PhaseExpr.const(1, d)
        for i, a in enumerate(exps):
            if a:
                m = m * H_parts[i].part_of_degree(2) ** a
        basis.append(_vectorize(m))
    r0 = _rank(basis)
    return _rank(basis + [_vectorize(lead)]) > r0


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def independence_check(model, values=None) -> IndependenceReport:
    """Leading-order independence of each listed integral from monomials in ``H_i``.

    ``values`` optionally fixes parameters (useful for the very large entries).
    """
    ctx = model.context(values or {}, 0)
    Hs = [ctx.lookup(f"H{i}") for i in range(1, model.d + 1)]
    rows = []
    for claim in model.integrals:
        X = ctx.lookup(claim.id)
        rows.append((claim.id, claim.order, leading_independent(X, Hs)))
    return IndependenceReport(model.name, rows)
