"""Model files: parser, canonical printer and evaluation of claimed integrals.

A model file holds one or more blocks of the form::

    model "2" {
      d = 2;
      params = [b1, b2, b3];
      V1 = b1*q1^2 + b2/q1^2;
      V2 = b1*q2^2 + b3/q2^2;
      integral "X" order 2 {
        expr = anti(m12, m12) + 1/2*hbar^2 + 2*b2*q2^2/q1^2 + 2*b3*q1^2/q2^2;
      }
    }

Besides the basic statements a block may contain ``let name = expr;``
(auxiliary definitions), ``note "text";``, ``specializes "parent" { b = expr;
... }`` (the model is the parent with its parameters replaced; the parent's
integrals and lets become visible under their own names), and for degenerate
entries ``V2 = arbitrary;`` with one or more ``sample V2 = expr;`` lines.

Inside expressions ``H1``, ``H2`` denote the one-axis Hamiltonians
``p_i^2/2 + V_i`` and earlier integral ids and lets may be referenced by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from ..errors import GrammarError, UndeclaredParameter
from ..phase import PhaseExpr
from ..symcore.grammar import (TokenStream, ast_names, eval_rational, format_ast, parse_expr,
                               strip_positions, tokenize)
from ..symcore.rational import RationalExpr
from ..symcore.variables import HBAR_VAR, P, Q, from_name, param
from .expressions import eval_phase

ARBITRARY = "arbitrary"


@dataclass
class IntegralClaim:
    id: str
    order: int
    ast: tuple

    @property
    def text(self) -> str:
        return format_ast(self.ast)


@dataclass
class Model:
    """One corpus record.

    ``statements`` keeps lets and integrals in file order, as
    ``("let", name, ast)`` or ``("integral", IntegralClaim)``.  ``potential``
    holds one AST per axis, or the string ``"arbitrary"``.
    """

    name: str
    d: int = 2
    params: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    statements: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    parent: str | None = None
    specialization: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)
    resolver: object = field(default=None, repr=False, compare=False)

    @property
    def integrals(self):
        return [s[1] for s in self.statements if s[0] == "integral"]

    def integral(self, ident):
        for c in self.integrals:
            if c.id == ident:
                return c
        raise KeyError(ident)

    @property
    def arbitrary_axes(self):
        return [i + 1 for i, v in enumerate(self.potential) if v == ARBITRARY]

    def sample_count(self) -> int:
        if not self.arbitrary_axes:
            return 1
        return min(len(self.samples.get(a, [])) for a in self.arbitrary_axes)

    # -- evaluation ------------------------------------------------------
    def context(self, values=None, sample=0):
        """Evaluation context; ``values`` maps parameter names (and ``hbar``) to numbers."""
        return ModelContext(self, values or {}, sample)

    def potentials(self, values=None, sample=0):
        return self.context(values, sample).potentials()

    def hamiltonian(self, values=None, sample=0) -> PhaseExpr:
        ctx = self.context(values, sample)
        return ctx.lookup("H1") + ctx.lookup("H2") if self.d == 2 else ctx.hamiltonian()

    def evaluate(self, ident, values=None, sample=0) -> PhaseExpr:
        return self.context(values, sample).lookup(ident)

    def __str__(self):
        return format_model(self)


class ModelContext:
    """Lazy name environment for one model at fixed parameter values."""

    def __init__(self, model: Model, values: dict, sample: int):
        self.model = model
        self.values = dict(values)
        self.sample = sample
        self.cache = {}
        self._parent_ctx = None
        self._pot = None
        self.defs = {}
        for st in model.statements:
            if st[0] == "let":
                self.defs[st[1]] = st[2]
            else:
                self.defs[st[1].id] = st[1].ast
        self._busy = set()
        self._penv = self._param_env()
        self._all = None

    # parameters -> PhaseExpr leaves
    def _param_env(self):
        d = self.model.d
        env = {}
        for name, v in self.values.items():
            if name == "hbar":
                env["hbar"] = PhaseExpr.from_rational(RationalExpr.coerce(v), d)
            elif name in self.model.params:
                env[name] = PhaseExpr.from_rational(RationalExpr.coerce(v), d)
        return env

    def _rat_env(self):
        env = {}
        for name, v in self.values.items():
            if name == "hbar" or name in self.model.params:
                env[name] = RationalExpr.coerce(v)
        return env

    def parent_context(self):
        if self.model.parent is None:
            return None
        if self._parent_ctx is None:
            if self.model.resolver is None:
                raise GrammarError(f"model {self.model.name!r} specializes {self.model.parent!r} "
                                   "but no resolver was given")
            parent = self.model.resolver(self.model.parent)
            renv = self._rat_env()
            pvals = {pname: eval_rational(ast, self.model.params, renv)
                     for pname, ast in self.model.specialization.items()}
            if "hbar" in self.values:
                pvals["hbar"] = self.values["hbar"]
            self._parent_ctx = parent.context(pvals, self.sample)
        return self._parent_ctx

    def potentials(self):
        if self._pot is None:
            renv = self._rat_env()
            out = []
            for axis, v in enumerate(self.model.potential, start=1):
                if v == ARBITRARY:
                    v = self.model.samples[axis][self.sample]
                out.append(eval_rational(v, self.model.params, renv))
            self._pot = out
        return self._pot

    def hamiltonian(self) -> PhaseExpr:
        d = self.model.d
        H = PhaseExpr.zero(d)
        for i in range(1, d + 1):
            H = H + self.lookup(f"H{i}")
        return H

    def _axis_h(self, i):
        d = self.model.d
        V = self.potentials()[i - 1]
        return PhaseExpr.momentum(i, d, 2).scale(mpq(1, 2)) + PhaseExpr.from_rational(V, d)

    def __contains__(self, name):
        if name in self.defs or name in self.cache:
            return True
        if name in self._penv:
            return True
        if name.startswith("H") and name[1:].isdigit() and 1 <= int(name[1:]) <= self.model.d:
            return True
        pc = self.parent_context()
        return pc is not None and name in pc.defs_all()

    def defs_all(self):
        if self._all is None:
            names = set(self.defs)
            pc = self.parent_context()
            if pc is not None:
                names |= pc.defs_all()
            self._all = names
        return self._all

    def __getitem__(self, name):
        return self.lookup(name)

    def lookup(self, name) -> PhaseExpr:
        if name in self.cache:
            return self.cache[name]
        if name in self._penv:
            return self._penv[name]
        if name.startswith("H") and name[1:].isdigit() and 1 <= int(name[1:]) <= self.model.d:
            val = self._axis_h(int(name[1:]))
        elif name in self.defs:
            if name in self._busy:
                raise GrammarError(f"circular reference to {name!r}")
            self._busy.add(name)
            try:
                val = eval_phase(self.defs[name], self.model.d, self._visible_params(), self)
            finally:
                self._busy.discard(name)
        else:
            pc = self.parent_context()
            if pc is None or name not in pc.defs_all():
                raise KeyError(name)
            val = pc.lookup(name)
        self.cache[name] = val
        return val

    def _visible_params(self):
        return [p for p in self.model.params if p not in self.values]


# -- parsing ---------------------------------------------------------------

def _expect_name(ts, text):
    t = ts.next()
    if t.kind != "name" or t.text != text:
        raise GrammarError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
    return t


def _string(ts):
    t = ts.expect_kind("str")
    return t.text[1:-1]


def _int(ts):
    t = ts.expect_kind("num")
    if "." in t.text:
        raise GrammarError("expected an integer", t.line, t.col)
    return int(t.text)


def _check_names(node, model, known, pos_hint=None):
    builtin_ok = {"I", "hbar"}
    for name in sorted(ast_names(node)):
        if name in builtin_ok or name in known or name in model.params:
            continue
        if name.startswith("H") and name[1:].isdigit():
            continue
        if len(name) == 3 and name[0] == "m" and name[1:].isdigit():
            continue
        v = from_name(name)
        if v.kind in (Q, P):
            continue
        raise UndeclaredParameter(f"undeclared parameter {name!r} in model {model.name!r}")


def _parse_block(ts, resolver):
    _expect_name(ts, "model")
    m = Model(name=_string(ts), resolver=resolver)
    ts.expect("{")
    known = set()
    potential = {}
    while not ts.at("}"):
        t = ts.next()
        if t.kind != "name":
            raise GrammarError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)
        key = t.text
        if key == "d":
            ts.expect("=")
            m.d = _int(ts)
            ts.expect(";")
        elif key == "params":
            ts.expect("=")
            ts.expect("[")
            names = []
            while not ts.at("]"):
                n = ts.expect_kind("name")
                v = from_name(n.text)
                if v.kind != 3 or n.text in ("I", "hbar"):
                    raise GrammarError(f"{n.text!r} cannot be a parameter", n.line, n.col)
                names.append(n.text)
                if ts.at(","):
                    ts.next()
            ts.expect("]")
            ts.expect(";")
            m.params = names
        elif key.startswith("V") and key[1:].isdigit():
            ts.expect("=")
            axis = int(key[1:])
            if ts.at(ARBITRARY):
                ts.next()
                potential[axis] = ARBITRARY
            else:
                node = parse_expr(ts)
                _check_names(node, m, set())
                potential[axis] = node
            ts.expect(";")
        elif key == "sample":
            vt = ts.expect_kind("name")
            if not (vt.text.startswith("V") and vt.text[1:].isdigit()):
                raise GrammarError("sample needs a potential name", vt.line, vt.col)
            ts.expect("=")
            node = parse_expr(ts)
            _check_names(node, m, set())
            m.samples.setdefault(int(vt.text[1:]), []).append(node)
            ts.expect(";")
        elif key == "let":
            n = ts.expect_kind("name")
            ts.expect("=")
            node = parse_expr(ts)
            _check_names(node, m, known | _inherited(m, resolver))
            m.statements.append(("let", n.text, node))
            known.add(n.text)
            ts.expect(";")
        elif key == "note":
            m.notes.append(_string(ts))
            ts.expect(";")
        elif key == "specializes":
            m.parent = _string(ts)
            ts.expect("{")
            while not ts.at("}"):
                n = ts.expect_kind("name")
                ts.expect("=")
                node = parse_expr(ts)
                _check_names(node, m, set())
                m.specialization[n.text] = node
                ts.expect(";")
            ts.expect("}")
        elif key == "integral":
            ident = _string(ts)
            _expect_name(ts, "order")
            order = _int(ts)
            ts.expect("{")
            _expect_name(ts, "expr")
            ts.expect("=")
            node = parse_expr(ts)
            ts.expect(";")
            ts.expect("}")
            _check_names(node, m, known | _inherited(m, resolver))
            m.statements.append(("integral", IntegralClaim(ident, order, node)))
            known.add(ident)
        else:
            raise GrammarError(f"unknown statement {key!r}", t.line, t.col)
    ts.expect("}")
    if sorted(potential) != list(range(1, m.d + 1)):
        raise GrammarError(f"model {m.name!r} must define V1..V{m.d}")
    m.potential = [potential[i] for i in range(1, m.d + 1)]
    for axis in m.arbitrary_axes:
        if not m.samples.get(axis):
            raise GrammarError(f"model {m.name!r}: arbitrary V{axis} needs at least one sample")
    return m


def _inherited(m, resolver):
    if m.parent is None or resolver is None:
        return set()
    parent = resolver(m.parent)
    names = {s[1] if s[0] == "let" else s[1].id for s in parent.statements}
    return names | _inherited(parent, resolver)


def parse_models(text: str, resolver=None) -> list:
    """Parse every ``model`` block in ``text``.

    A block may specialize a model defined earlier in the same text; other
    parents go through ``resolver``.
    """
    ts = TokenStream(tokenize(text))
    out = []
    local = {}

    def resolve(name):
        if name in local:
            return local[name]
        if resolver is None:
            raise GrammarError(f"unknown parent model {name!r}")
        return resolver(name)

    while ts.peek().kind != "eof":
        m = _parse_block(ts, resolve)
        local[m.name] = m
        out.append(m)
    return out


def parse_model(text: str, resolver=None) -> Model:
    """Parse text holding exactly one model block.

    Raises
    ------
    GrammarError
        Malformed input, with line and column.
    UndeclaredParameter
        An identifier that is neither builtin, declared nor defined earlier.
    """
    models = parse_models(text, resolver)
    if len(models) != 1:
        raise GrammarError(f"expected one model, found {len(models)}")
    return models[0]


# -- printing --------------------------------------------------------------

def format_model(m: Model) -> str:
    """Canonical text; ``parse_model(format_model(m))`` reproduces ``m``."""
    lines = [f'model "{m.name}" {{', f"  d = {m.d};", "  params = [" + ", ".join(m.params) + "];"]
    for note in m.notes:
        lines.append(f'  note "{note}";')
    if m.parent is not None:
        lines.append(f'  specializes "{m.parent}" {{')
        for k, v in m.specialization.items():
            lines.append(f"    {k} = {format_ast(v)};")
        lines.append("  }")
    for axis, v in enumerate(m.potential, start=1):
        lines.append(f"  V{axis} = " + (ARBITRARY if v == ARBITRARY else format_ast(v)) + ";")
    for axis in sorted(m.samples):
        for s in m.samples[axis]:
            lines.append(f"  sample V{axis} = {format_ast(s)};")
    for st in m.statements:
        if st[0] == "let":
            lines.append(f"  let {st[1]} = {format_ast(st[2])};")
        else:
            c = st[1]
            lines.append(f'  integral "{c.id}" order {c.order} {{')
            lines.append(f"    expr = {c.text};")
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def same_model(a: Model, b: Model) -> bool:
    """Structural equality ignoring source positions."""
    def key(m):
        return (m.name, m.d, tuple(m.params),
                tuple(v if v == ARBITRARY else strip_positions(v) for v in m.potential),
                tuple((s[0], s[1], strip_positions(s[2])) if s[0] == "let"
                      else (s[0], s[1].id, s[1].order, strip_positions(s[1].ast)) for s in m.statements),
                tuple(m.notes), m.parent,
                tuple((k, strip_positions(v)) for k, v in m.specialization.items()),
                tuple((k, tuple(strip_positions(x) for x in v)) for k, v in sorted(m.samples.items())))
    return key(a) == key(b)


def specialization_residuals(model: Model) -> list:
    """``V_i(child) - V_i(parent with the specialization)`` per axis; all zero when consistent."""
    if model.parent is None:
        return []
    parent = model.resolver(model.parent)
    env = {k: eval_rational(v, model.params) for k, v in model.specialization.items()}
    out = []
    for axis in range(model.d):
        pv = parent.potential[axis]
        cv = model.potential[axis]
        if ARBITRARY in (pv, cv):
            out.append(RationalExpr.zero() if pv == cv else None)
            continue
        out.append(eval_rational(cv, model.params) - eval_rational(pv, parent.params, env))
    return out


__all__ = ["Model", "IntegralClaim", "ModelContext", "parse_model", "parse_models",
           "format_model", "same_model", "specialization_residuals", "ARBITRARY", "param", "HBAR_VAR"]
