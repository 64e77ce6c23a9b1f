import json

import pytest
from hypothesis import given, settings

from strategies import phase_poly
from superint.corpus import (corpus_names, corpus_text, directory_resolver, format_model, independence_check,
                             load_corpus, load_model, parse_model, parse_models, parse_phase, same_model,
                             specialization_residuals, summary_json, verify)
from superint.errors import GrammarError, UndeclaredParameter
from superint.phase import PhaseExpr, bracket, star, sym_product

OSC = """model "t" {
  d = 2;
  params = [b];
  V1 = b*q1^2;
  V2 = b*q2^2;
  integral "good" order 1 { expr = m12; }
  integral "bad" order 1 { expr = p1 + q1; }
}
"""


def test_corpus_is_complete_and_ordered():
    names = corpus_names()
    assert len(names) == 43
    assert names[:3] == ["1", "2", "2a"]
    assert names[-2:] == ["alpha", "beta"]
    assert sum(len(m.integrals) for m in load_corpus()) >= 60


def test_every_entry_round_trips():
    for name in corpus_names():
        m = load_model(name)
        text = format_model(m)
        again = parse_model(text, resolver=load_model)
        assert same_model(m, again), name
        assert format_model(again) == text


def test_integrals_are_hermitean_polynomials_of_claimed_order():
    for m in load_corpus():
        for s in range(m.sample_count()):
            ctx = m.context({}, s)
            for c in m.integrals:
                X = ctx.lookup(c.id)
                assert X.is_polynomial(), (m.name, c.id)
                assert X.degree() == c.order, (m.name, c.id)
                assert star(X) == X, (m.name, c.id)


def test_sw_model_parses():
    m = load_model("2")
    assert m.params == ["b1", "b2", "b3"]
    orders = [c.order for c in m.integrals]
    assert orders.count(2) == 1
    X = m.evaluate("X")
    assert X == parse_phase("anti(m12, m12) + 1/2*hbar^2 + 2*b2*q2^2/q1^2 + 2*b3*q1^2/q2^2", 2)


def test_grammar_lowering():
    m12 = parse_phase("m12")
    assert m12 == parse_phase("q1*p2 - q2*p1")
    assert parse_phase("anti(p1, q1)") == sym_product(parse_phase("p1"), parse_phase("q1"))
    # the normalised bracket of q1 with p1 is one
    assert parse_phase("nbr(q1, p1)") == PhaseExpr.const(1, 2)
    nested = parse_phase("anti(m12, anti(m12, m12))")
    assert nested.degree() == 3 and star(nested) == nested
    assert nested.part_of_degree(3) == m12 ** 3


def test_precedence():
    assert parse_phase("-q1^2") == parse_phase("-(q1^2)")
    assert parse_phase("2*q1/4*p1") == parse_phase("q1*p1/2")
    assert parse_phase("1 - q1 + p1") == parse_phase("(1 - q1) + p1")
    assert parse_phase("I^2") == PhaseExpr.const(-1, 2)


def test_parse_errors_carry_position():
    bad = 'model "t" { d = 2;\n  V1 = q1^^2; V2 = 0; }'
    with pytest.raises(GrammarError) as info:
        parse_model(bad)
    assert (info.value.line, info.value.column) == (2, 11)
    assert isinstance(info.value, SyntaxError)
    with pytest.raises(UndeclaredParameter):
        parse_model('model "t" { d = 2; params = [b]; V1 = c*q1; V2 = 0; }')
    with pytest.raises(GrammarError):
        parse_model(OSC + OSC)


def test_negative_control_integral():
    m = parse_model(OSC)
    bad = m.evaluate("bad")
    assert star(bad) == bad
    assert not bracket(bad, m.hamiltonian()).is_zero()
    res = {o.integral: o for o in verify(m, "exact")}
    assert res["good"].passed and not res["bad"].passed
    res = {o.integral: o for o in verify(m, "randomized", trials=5, seed=3)}
    assert res["good"].passed and res["good"].trials == 5
    assert not res["bad"].passed and res["bad"].witnesses


def test_verify_examples():
    for name in ("1", "2"):
        outcomes = verify(load_model(name), "exact")
        assert outcomes and all(o.passed for o in outcomes)
    (o,) = verify(load_model("2"), "exact", ids=["X"])
    assert o.line() == "2\tX\texact\tpass"


def test_randomized_is_reproducible():
    m = load_model("2")
    a = verify(m, "randomized", trials=3, seed=11)
    b = verify(m, "randomized", trials=3, seed=11)
    assert summary_json(a) == summary_json(b)
    assert all(o.passed and o.seed == 11 for o in a)


def test_summary_json_records():
    outcomes = verify(parse_model(OSC), "exact")
    records = [json.loads(line) for line in summary_json(outcomes).splitlines()]
    assert [r["integral"] for r in records] == ["good", "bad"]
    assert [r["passed"] for r in records] == [True, False]
    assert set(records[0]) >= {"model", "integral", "mode", "passed", "trials", "seed", "witnesses"}


def test_specializations_are_consistent():
    children = [m for m in load_corpus() if m.parent]
    assert len(children) == 19
    for m in children:
        res = specialization_residuals(m)
        assert all(r is not None and r.is_zero() for r in res), m.name
    assert specialization_residuals(load_model("2")) == []


def test_specialization_mismatch_detected():
    text = corpus_text("2a").replace("b3 = 0;", "b3 = 1;")
    m = parse_model(text, resolver=load_model)
    assert not all(r.is_zero() for r in specialization_residuals(m))


def test_arbitrary_axis_samples():
    for name in ("alpha", "beta"):
        m = load_model(name)
        assert m.arbitrary_axes == [2] and m.sample_count() == 3
        V = {str(m.potentials({}, s)[1]) for s in range(3)}
        assert len(V) == 3
        assert all(o.passed for o in verify(m, "exact"))


def test_independence_examples():
    assert independence_check(load_model("2")).all_independent
    assert independence_check(load_model("3")).all_independent
    m = parse_model(OSC.replace('expr = p1 + q1;', 'expr = anti(H1, H2);'))
    rows = {r[0]: r[2] for r in independence_check(m).rows}
    assert rows == {"good": True, "bad": False}


def test_parse_models_resolves_parents_in_same_text(tmp_path):
    text = OSC + """model "t1" {
  d = 2;
  params = [];
  specializes "t" { b = 1; }
  V1 = q1^2;
  V2 = q2^2;
  integral "J" order 1 { expr = m12; }
}
"""
    a, b = parse_models(text)
    assert b.parent == "t"
    assert specialization_residuals(b)[0].is_zero()
    (tmp_path / "t.model").write_text(OSC)
    (tmp_path / "t1.model").write_text(text.split(OSC, 1)[1])
    resolve = directory_resolver(str(tmp_path))
    assert resolve("t1").parent == "t"
    assert same_model(resolve("t"), a)
    # names not in the directory fall back to the bundled corpus
    assert resolve("2") is load_model("2")


@given(phase_poly(max_p=3, max_terms=5))
@settings(max_examples=100)
def test_expression_printer_round_trip(f):
    assert parse_phase(str(f)) == f
