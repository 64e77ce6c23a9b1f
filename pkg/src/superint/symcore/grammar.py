"""Tokenizer and precedence parser for the expression grammar.

Grammar (binding power from tight to loose)::

    atom   := number | name | name '(' expr {',' expr} ')' | '(' expr ')'
    power  := atom ['^' ['-'] integer]
    unary  := '-' unary | power
    term   := unary {('*' | '/') unary}
    expr   := term {('+' | '-') term}

The parser produces a small tuple-based AST; evaluation into concrete
algebraic objects lives with the objects (see :func:`eval_rational` and the
phase-space evaluator in ``superint.corpus``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq

from ..errors import GrammarError, UndeclaredParameter

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<str>"[^"\n]*")
  | (?P<op>[-+*/^(),;=\[\]{}])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise GrammarError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self, k=0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text) -> bool:
        t = self.peek()
        return t.kind in ("op", "name") and t.text == text

    def expect(self, text) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("op", "name"):
            raise GrammarError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def expect_kind(self, kind) -> Token:
        t = self.next()
        if t.kind != kind:
            raise GrammarError(f"expected {kind}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def error(self, msg, tok=None):
        t = tok or self.peek()
        return GrammarError(msg, t.line, t.col)


def _number(text: str):
    if "." in text:
        whole, frac = text.split(".")
        return mpq(int(whole + frac), 10 ** len(frac))
    return mpq(int(text))


def parse_expr(ts: TokenStream):
    node = _parse_term(ts)
    while ts.at("+") or ts.at("-"):
        op = ts.next()
        rhs = _parse_term(ts)
        node = ("bin", op.text, node, rhs, (op.line, op.col))
    return node


def _parse_term(ts):
    node = _parse_unary(ts)
    while ts.at("*") or ts.at("/"):
        op = ts.next()
        rhs = _parse_unary(ts)
        node = ("bin", op.text, node, rhs, (op.line, op.col))
    return node


def _parse_unary(ts):
    if ts.at("-"):
        op = ts.next()
        return ("neg", _parse_unary(ts), (op.line, op.col))
    if ts.at("+"):
        ts.next()
        return _parse_unary(ts)
    return _parse_power(ts)


def _parse_int_exponent(ts):
    paren = False
    if ts.at("("):
        ts.next()
        paren = True
    sign = 1
    if ts.at("-"):
        ts.next()
        sign = -1
    t = ts.next()
    if t.kind != "num" or "." in t.text:
        raise GrammarError("exponent must be an integer", t.line, t.col)
    if paren:
        ts.expect(")")
    return sign * int(t.text)


def _parse_power(ts):
    node = _parse_atom(ts)
    if ts.at("^"):
        op = ts.next()
        n = _parse_int_exponent(ts)
        node = ("pow", node, n, (op.line, op.col))
        if ts.at("^"):
            raise ts.error("chained exponents are ambiguous; use parentheses")
    return node


def _parse_atom(ts):
    t = ts.next()
    if t.kind == "num":
        return ("num", _number(t.text), (t.line, t.col))
    if t.kind == "name":
        if ts.at("("):
            ts.next()
            args = [parse_expr(ts)]
            while ts.at(","):
                ts.next()
                args.append(parse_expr(ts))
            ts.expect(")")
            return ("call", t.text, args, (t.line, t.col))
        return ("name", t.text, (t.line, t.col))
    if t.kind == "op" and t.text == "(":
        node = parse_expr(ts)
        ts.expect(")")
        return node
    raise GrammarError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)


def parse_expression_text(text: str):
    """Parse a standalone expression into an AST."""
    ts = TokenStream(tokenize(text))
    node = parse_expr(ts)
    t = ts.peek()
    if t.kind != "eof":
        raise GrammarError(f"unexpected {t.text!r} after expression", t.line, t.col)
    return node


def evaluate_ast(node, leaf, call=None):
    """Generic fold over the AST.

    ``leaf(kind, value, pos)`` maps ``num`` and ``name`` nodes to objects that
    support ``+ - * / ** neg``; ``call(name, args, pos)`` handles functions.
    """
    kind = node[0]
    if kind in ("num", "name"):
        return leaf(kind, node[1], node[2])
    if kind == "neg":
        return -evaluate_ast(node[1], leaf, call)
    if kind == "pow":
        return evaluate_ast(node[1], leaf, call) ** node[2]
    if kind == "bin":
        a = evaluate_ast(node[2], leaf, call)
        b = evaluate_ast(node[3], leaf, call)
        op = node[1]
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return a / b
    if kind == "call":
        if call is None:
            line, col = node[3]
            raise GrammarError(f"function {node[1]!r} is not allowed here", line, col)
        args = [evaluate_ast(a, leaf, call) for a in node[2]]
        return call(node[1], args, node[3])
    raise ValueError(f"bad AST node {kind}")


def eval_rational(node, params=None, env=None):
    """Evaluate an AST to a RationalExpr (no momenta, no bracket functions)."""
    from .rational import RationalExpr
    from .variables import HBAR_VAR, from_name, param

    env = env or {}
    params = None if params is None else set(params)

    def leaf(kind, value, pos):
        if kind == "num":
            return RationalExpr.const(value)
        if value in env:
            return env[value]
        if value == "I":
            return RationalExpr.imag_unit()
        if value == "hbar":
            return RationalExpr.var(HBAR_VAR)
        v = from_name(value)
        if v.kind == 0:
            return RationalExpr.var(v)
        if v.kind == 1 or value.startswith("m") and value[1:].isdigit():
            raise GrammarError(f"momentum {value!r} not allowed in a position-space expression", *pos)
        if params is None or value in params:
            return RationalExpr.var(param(value))
        raise UndeclaredParameter(f"undeclared parameter {value!r} at line {pos[0]}, column {pos[1]}")

    return evaluate_ast(node, leaf)


def parse_rational(text: str, params=None):
    """Parse canonical (or hand-written) text into a RationalExpr.

    With ``params=None`` every unrecognised identifier is a parameter.
    """
    return eval_rational(parse_expression_text(text), params)


def _num_text(v) -> str:
    v = mpq(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


# binding strength used by the printer: larger binds tighter
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _node_prec(node) -> int:
    kind = node[0]
    if kind == "bin":
        return _PREC[node[1]]
    if kind == "neg":
        return _PREC["neg"]
    if kind == "pow":
        return _PREC["pow"]
    if kind == "num":
        v = mpq(node[1])
        if v.denominator != 1:
            return _PREC["/"]
        return _PREC["neg"] if v < 0 else _PREC["atom"]
    return _PREC["atom"]


def format_ast(node) -> str:
    """Print an AST with the fewest parentheses that reparse to the same tree."""
    kind = node[0]
    if kind == "num":
        return _num_text(node[1])
    if kind == "name":
        return node[1]
    if kind == "call":
        return f"{node[1]}(" + ", ".join(format_ast(a) for a in node[2]) + ")"
    if kind == "neg":
        inner = node[1]
        s = format_ast(inner)
        # -a*b reparses as (-a)*b, so only atoms and powers go bare
        if _node_prec(inner) < _PREC["pow"]:
            s = f"({s})"
        return "-" + s
    if kind == "pow":
        base = node[1]
        s = format_ast(base)
        if _node_prec(base) < _PREC["atom"]:
            s = f"({s})"
        return f"{s}^{node[2]}"
    op, a, b = node[1], node[2], node[3]
    p = _PREC[op]
    sa, sb = format_ast(a), format_ast(b)
    if _node_prec(a) < p:
        sa = f"({sa})"
    # left-associative: the right operand needs strictly tighter binding
    if _node_prec(b) <= p:
        sb = f"({sb})"
    if op in "+-":
        return f"{sa} {op} {sb}"
    return f"{sa}{op}{sb}"


def strip_positions(node):
    """AST with source positions removed, for structural comparison."""
    kind = node[0]
    if kind in ("num", "name"):
        return (kind, node[1])
    if kind == "neg":
        return (kind, strip_positions(node[1]))
    if kind == "pow":
        return (kind, strip_positions(node[1]), node[2])
    if kind == "bin":
        return (kind, node[1], strip_positions(node[2]), strip_positions(node[3]))
    if kind == "call":
        return (kind, node[1], tuple(strip_positions(a) for a in node[2]))
    raise ValueError(f"bad AST node {kind}")


def ast_names(node, out=None) -> set:
    """Identifiers referenced by an AST (function names excluded)."""
    out = set() if out is None else out
    kind = node[0]
    if kind == "name":
        out.add(node[1])
    elif kind in ("neg", "pow"):
        ast_names(node[1], out)
    elif kind == "bin":
        ast_names(node[2], out)
        ast_names(node[3], out)
    elif kind == "call":
        for a in node[2]:
            ast_names(a, out)
    return out
