from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import phase_poly
from superint.corpus import load_model, parse_phase
from superint.errors import PoleProximity
from superint.numcheck import convergence_ratios, drift, phase_float, simulate
from superint.symcore.variables import p, q

G3 = {"b1": Fraction(3, 7), "b2": Fraction(5, 4), "b3": Fraction(2, 3)}


def test_oscillator_energy_drift():
    traj = simulate(load_model("1"), {"b": 1}, (1, 0), (0, 1), 1e-3, 100)
    assert traj.h_drift <= 1e-8
    assert all(v <= 1e-8 for v in traj.x_drift.values())
    assert len(traj.t) == 100001 == traj.states.shape[0]


def test_oscillator_matches_closed_form_solution():
    # V = b q^2 with b = 1/2 gives unit frequency
    traj = simulate(load_model("1"), {"b": Fraction(1, 2)}, (1, 0.5), (0, -2), 1e-2, 10)
    t = traj.t
    exact = np.stack([np.cos(t), 0.5 * np.cos(t) - 2 * np.sin(t), -np.sin(t), -0.5 * np.sin(t) - 2 * np.cos(t)],
                     axis=1)
    assert np.max(np.abs(traj.states - exact)) < 1e-8


def test_sw_integral_drift():
    traj = simulate(load_model("2"), G3, (1.1, 0.8), (0.3, -0.5), 1e-3, 20, integrals=["X"])
    assert traj.x_drift["X"] <= 1e-6


def test_perturbed_integral_drifts():
    bent = dict(G3, b2=G3["b2"] + Fraction(1, 10))
    traj = simulate(load_model("2"), G3, (1.1, 0.8), (0.3, -0.5), 1e-2, 20, integrals=["X"], x_params=bent)
    assert traj.x_drift["X"] > 1e-3


def test_input_errors():
    m = load_model("1")
    with pytest.raises(ValueError):
        simulate(m, {"b": 1}, (1, 0), (0, 1), 0, 1)
    with pytest.raises(ValueError):
        simulate(m, {"b": 1}, (1, 0), (0, 1), 0.3, 1)
    with pytest.raises(ValueError):
        simulate(m, {"b": 1}, (1, 0, 0), (0, 1), 0.1, 1)
    with pytest.raises(ValueError, match="quantum-only"):
        simulate(load_model("7"), {"b1": 1, "b2": 1}, (1, 1), (0, 1), 0.1, 1)


def test_pole_proximity():
    # a particle thrown at the centrifugal barrier from the wrong side of a tiny coefficient
    with pytest.raises(PoleProximity):
        simulate(load_model("2"), G3, (1e-7, 1), (0, 0), 1e-3, 1)
    with pytest.raises(PoleProximity):
        simulate(load_model("2"), G3, (0.05, 1), (0, 0), 1e-3, 1, margin=0.1)


def test_report_lines():
    traj = simulate(load_model("2"), G3, (1.1, 0.8), (0.3, -0.5), 0.01, 1, integrals=["X", "I3a"])
    lines = traj.report_lines()
    assert len(lines) == 2
    cols = lines[0].split("\t")
    assert cols[:4] == ["2", "X", "0.01", "1"]
    assert float(cols[4]) == pytest.approx(traj.h_drift, rel=1e-3)
    assert float(cols[5]) == pytest.approx(traj.x_drift["X"], rel=1e-3)


def test_drift_definition():
    assert drift(np.array([2.0, 2.5, 1.0])) == 0.5
    assert drift(np.array([0.1, 0.4])) == pytest.approx(0.3)


def test_convergence_is_fourth_order():
    ratios = convergence_ratios(load_model("2"), G3, (1.1, 0.8), (0.3, -0.5), (0.04, 0.02, 0.01), 10, "X")
    assert all(8 <= r <= 32 for r in ratios), ratios


@given(phase_poly(max_p=3, imaginary=False, hbar=False),
       st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4))
@settings(max_examples=100)
def test_float_evaluation_matches_exact(f, pt):
    vals = {q(1): mpq(pt[0]), q(2): mpq(pt[1]), p(1): mpq(pt[2]), p(2): mpq(pt[3])}
    exact = f.evaluate(vals).re if f else 0
    got = phase_float(f)(tuple(np.array([v]) for v in pt))
    assert float(np.ravel(got)[0]) == pytest.approx(float(exact), rel=1e-9, abs=1e-9)


def test_float_evaluation_rational_symbol():
    f = parse_phase("q1^2*p2 + 3/q1^2 - 2*q2/(q1 - 1)^2")
    x = (2.0, -1.5, 0.3, 0.7)
    expected = 4 * 0.7 + 3 / 4 + 3.0
    assert float(np.ravel(phase_float(f)(tuple(np.array([v]) for v in x)))[0]) == pytest.approx(expected)
