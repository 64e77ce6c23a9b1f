"""Command-line front end.

Exit status: 0 when every check passes, 1 when one fails or a domain error
occurs, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import corpus
from .builder.ansatz import parse_ansatz, xi_from_z
from .builder.compat import compat_S, count_N, count_Pi, screen_standard
from .builder.integral import build_integral, z_from_integral
from .errors import SuperintError
from .phase import bracket
from .symcore.grammar import parse_rational
from .symcore.rational import ZERO, format_rational
from .symcore.variables import HBAR_VAR, q

LEVELS = {"linear": 1, "quadratic": 2, "cubic": 3}


class UsageError(Exception):
    pass


def _models_from(target: str) -> list:
    """Models named by a file, a directory of ``.model`` files or a corpus name."""
    if os.path.isdir(target):
        resolve = corpus.directory_resolver(target)
        names = sorted((f[:-6] for f in os.listdir(target) if f.endswith(".model")),
                       key=corpus.model_sort_key)
        out = []
        for n in names:
            with open(os.path.join(target, n + ".model"), encoding="utf-8") as fh:
                out.extend(corpus.parse_models(fh.read(), resolver=resolve))
        return out
    if os.path.isfile(target):
        with open(target, encoding="utf-8") as fh:
            text = fh.read()
        resolve = corpus.directory_resolver(os.path.dirname(os.path.abspath(target)))
        return corpus.parse_models(text, resolver=resolve)
    if target == "corpus":
        return corpus.load_corpus()
    if target in corpus.corpus_names():
        return [corpus.load_model(target)]
    raise UsageError(f"no model file, directory or corpus entry named {target!r}")


def _one_model(target: str, name: str | None):
    models = _models_from(target)
    if name is None:
        return models[0]
    for m in models:
        if m.name == name:
            return m
    raise UsageError(f"model {name!r} not found in {target}")


def _param_values(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not of the form name=value")
        try:
            out[key.strip()] = Fraction(val.strip())
        except ValueError:
            raise UsageError(f"parameter value {val!r} is not a rational number") from None
    return out


# -- subcommands -------------------------------------------------------------

def cmd_verify(args, out) -> int:
    mode = "randomized" if args.mode in ("random", "randomized") else "exact"
    ok = True
    outcomes = []
    for m in _models_from(args.target):
        res = corpus.verify(m, mode, trials=args.trials, seed=args.seed, ids=args.integral)
        outcomes.extend(res)
        ok &= all(o.passed for o in res)
    if args.json:
        out.write(corpus.summary_json(outcomes) + "\n")
    else:
        for o in outcomes:
            out.write(o.line() + "\n")
    return 0 if ok else 1


def cmd_bracket(args, out) -> int:
    f = corpus.parse_phase(args.f, args.d)
    g = corpus.parse_phase(args.g, args.d)
    r = bracket(f, g)
    if args.hbar_zero:
        r = r.subs({HBAR_VAR: 0})
    out.write(str(r) + "\n")
    return 0


def cmd_build(args, out) -> int:
    m = _one_model(args.model, args.name)
    with open(args.z, encoding="utf-8") as fh:
        zs = parse_ansatz(fh.read(), args.order, m.params)
    V = m.potentials()
    X, table = build_integral([z.z() for z in zs], V, args.order)
    if X is None:
        for key in sorted(table):
            if table[key]:
                out.write("R_{}{}{} = {}\n".format(*key, table[key]))
        return 1
    out.write(str(X) + "\n")
    return 0


def _compat_rows(V, zs, n, level, solve):
    tables = zs

    def xi(lv, idx, axis):
        return tables[lv].xi(idx, axis) if lv < len(tables) else ZERO

    rows = []
    for axis in (1, 2):
        for i in range(2 * level):
            r = compat_S(level, i, axis, V[axis - 1], lambda a, b, ax=axis: xi(a, b, ax), solve=solve)
            rows.append(((level, i, axis), r))
    return rows


def cmd_compat(args, out) -> int:
    m = _one_model(args.model, args.name)
    level = LEVELS[args.level]
    V = m.potentials()
    jobs = []
    if args.z:
        if args.order is None:
            raise UsageError("--z needs --order")
        with open(args.z, encoding="utf-8") as fh:
            jobs.append(("ansatz", args.order, parse_ansatz(fh.read(), args.order, m.params)))
    else:
        ctx = m.context()
        for c in m.integrals:
            if args.integral and c.id not in args.integral:
                continue
            X = ctx.lookup(c.id)
            n = X.degree()
            Z = z_from_integral(X, V)
            jobs.append((c.id, n, [xi_from_z(z, n, k) for k, z in enumerate(Z)]))
    ok = True
    for label, n, zs in jobs:
        if level > (n + 1) // 2:
            out.write(f"{m.name}\t{label}\tlevel {level} not present for order {n}\n")
            continue
        for (k, i, axis), r in _compat_rows(V, zs, n, level, args.solve_xi):
            name = f"xi_{k}{i}{axis}" if args.solve_xi else f"S_{k}{i}{axis}"
            if not args.solve_xi:
                ok &= r.is_zero()
            out.write(f"{m.name}\t{label}\t{name}\t{format_rational(r)}\n")
    return 0 if ok else 1


def cmd_count(args, out) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    out.write(f"{count_N(args.n, args.d)}\n")
    if args.pi:
        out.write(f"{count_Pi(args.n, args.d)}\n")
    return 0


def cmd_screen(args, out) -> int:
    V = parse_rational(args.v)
    x = q(args.axis)
    if any(v.kind != 3 and v != x for v in V.used_vars()):
        raise UsageError(f"the potential may only depend on q{args.axis} and parameters")
    rep = screen_standard(V, args.order, args.axis)
    out.write(f"degree at infinity\t{rep.polynomial_degree}\n")
    out.write(f"max pole order\t{rep.max_pole_order}\n")
    out.write(f"double poles\t{rep.double_pole_count}\n")
    for j in sorted(rep.q_rational):
        out.write(f"Q_{j} rational\t{'yes' if rep.q_rational[j] else 'no'}\n")
    for f in rep.failures:
        out.write(f"fail\t{f}\n")
    out.write("standard\n" if rep.passes else "rejected\n")
    return 0 if rep.passes else 1


def cmd_simulate(args, out) -> int:
    from .numcheck import simulate

    m = _one_model(args.model, args.name)
    params = _param_values(args.param)
    missing = [p for p in m.params if p not in params]
    if missing:
        raise UsageError(f"missing parameter values: {', '.join(missing)}")
    if len(args.q0) != m.d or len(args.p0) != m.d:
        raise UsageError(f"--q0 and --p0 need {m.d} values each")
    traj = simulate(m, params, args.q0, args.p0, args.dt, args.T, integrals=args.integral,
                    margin=args.margin)
    out.write("model\tintegral\tdt\tT\tH-drift\tX-drift\n")
    for line in traj.report_lines():
        out.write(line + "\n")
    worst = max([traj.h_drift] + list(traj.x_drift.values()))
    return 0 if worst < args.tol else 1


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="superint", description="Exact checks for superintegrable Hamiltonians.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check (X, H) = 0 for the integrals of a model")
    v.add_argument("target", help="model file, directory of .model files, corpus name or 'corpus'")
    v.add_argument("--mode", choices=["exact", "random", "randomized"], default="exact")
    v.add_argument("--trials", type=int, default=5)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--integral", action="append", help="restrict to this integral id (repeatable)")
    v.add_argument("--json", action="store_true", help="one JSON record per outcome")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bracket", help="deformed bracket of two symbols")
    b.add_argument("-f", required=True)
    b.add_argument("-g", required=True)
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--hbar-zero", action="store_true", help="set hbar = 0 (Poisson bracket)")
    b.set_defaults(func=cmd_bracket)

    bu = sub.add_parser("build", help="assemble X from a Z ansatz")
    bu.add_argument("--model", required=True)
    bu.add_argument("--name", help="model name inside a multi-model file")
    bu.add_argument("--order", type=int, required=True)
    bu.add_argument("--z", required=True, help="ansatz table file")
    bu.set_defaults(func=cmd_build)

    c = sub.add_parser("compat", help="compatibility equations of a model's integrals")
    c.add_argument("--model", required=True)
    c.add_argument("--name")
    c.add_argument("--level", choices=sorted(LEVELS), required=True)
    c.add_argument("--solve-xi", action="store_true", help="print the xi values solving each equation")
    c.add_argument("--z", help="ansatz table file instead of the listed integrals")
    c.add_argument("--order", type=int)
    c.add_argument("--integral", action="append")
    c.set_defaults(func=cmd_compat)

    n = sub.add_parser("count", help="number of compatibility equations N(n, d)")
    n.add_argument("--n", type=int, required=True)
    n.add_argument("--d", type=int, choices=[2, 3, 4], default=2)
    n.add_argument("--pi", action="store_true", help="also print the alpha parameter count")
    n.set_defaults(func=cmd_count)

    s = sub.add_parser("screen", help="necessary conditions on a standard potential summand")
    s.add_argument("--v", required=True)
    s.add_argument("--order", type=int, default=4)
    s.add_argument("--axis", type=int, default=1)
    s.set_defaults(func=cmd_screen)

    si = sub.add_parser("simulate", help="classical RK4 drift of H and the integrals")
    si.add_argument("--model", required=True)
    si.add_argument("--name")
    si.add_argument("--dt", type=float, required=True)
    si.add_argument("--T", type=float, required=True)
    si.add_argument("--q0", type=float, nargs="+", required=True)
    si.add_argument("--p0", type=float, nargs="+", required=True)
    si.add_argument("--param", action="append", help="name=value, value rational (repeatable)")
    si.add_argument("--integral", action="append")
    si.add_argument("--margin", type=float, default=1e-6)
    si.add_argument("--tol", type=float, default=1e-6)
    si.set_defaults(func=cmd_simulate)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        return args.func(args, out)
    except (UsageError, FileNotFoundError) as e:
        err.write(f"superint {args.command}: {e}\n")
        return 2
    except (SuperintError, ValueError, ZeroDivisionError) as e:
        err.write(f"superint {args.command}: {type(e).__name__}: {e}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
