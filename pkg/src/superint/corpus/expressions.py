"""Evaluation of grammar ASTs into phase-space symbols."""

from __future__ import annotations

from ..errors import GrammarError, UndeclaredParameter
from ..phase import PhaseExpr, bracket, sym_product
from ..symcore.grammar import evaluate_ast, parse_expression_text
from ..symcore.rational import RationalExpr
from ..symcore.variables import HBAR_VAR, P, Q, from_name, param

FUNCTIONS = ("anti", "nbr")


def eval_phase(node, d: int = 2, params=None, env=None) -> PhaseExpr:
    """Evaluate an AST to a PhaseExpr.

    Parameters
    ----------
    node : tuple
        AST from :func:`parse_expression_text`.
    d : int
        Number of degrees of freedom; ``q1..qd``, ``p1..pd`` and ``mij`` with
        ``1 <= i, j <= d`` are builtins.
    params : iterable of str, optional
        Declared parameter names.  ``None`` accepts any unknown identifier.
    env : dict, optional
        Extra bindings (``let`` names, ``H1`` ...) to PhaseExpr values.
    """
    env = env or {}
    params = None if params is None else set(params)

    def leaf(kind, value, pos):
        if kind == "num":
            return PhaseExpr.const(value, d)
        if value in env:
            return env[value]
        if value == "I":
            return PhaseExpr.from_rational(RationalExpr.imag_unit(), d)
        if value == "hbar":
            return PhaseExpr.from_rational(RationalExpr.var(HBAR_VAR), d)
        if len(value) == 3 and value[0] == "m" and value[1:].isdigit():
            i, j = int(value[1]), int(value[2])
            if 1 <= i <= d and 1 <= j <= d and i != j:
                return PhaseExpr.angular(i, j, d)
            raise GrammarError(f"angular momentum {value!r} out of range", *pos)
        v = from_name(value)
        if v.kind in (Q, P):
            if not 1 <= v.index <= d:
                raise GrammarError(f"{value!r} exceeds dimension {d}", *pos)
            if v.kind == Q:
                return PhaseExpr.position(v.index, d)
            return PhaseExpr.momentum(v.index, d)
        if params is None or value in params:
            return PhaseExpr.from_rational(RationalExpr.var(param(value)), d)
        raise UndeclaredParameter(f"undeclared parameter {value!r} at line {pos[0]}, column {pos[1]}")

    def call(name, args, pos):
        if name not in FUNCTIONS:
            raise GrammarError(f"unknown function {name!r}", *pos)
        if len(args) != 2:
            raise GrammarError(f"{name} takes two arguments", *pos)
        if name == "anti":
            return sym_product(args[0], args[1])
        return bracket(args[0], args[1])

    return evaluate_ast(node, leaf, call)


def parse_phase(text: str, d: int = 2, params=None, env=None) -> PhaseExpr:
    """Parse expression text directly into a PhaseExpr."""
    return eval_phase(parse_expression_text(text), d, params, env)
