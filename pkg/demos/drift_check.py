"""Classical drift of H and the integrals under fixed-step RK4.

Also shows the negative control (a wrong parameter in X only) and the
step-halving ratios, which sit near 16 for fourth-order convergence.
"""

from fractions import Fraction

from superint.corpus import load_model
from superint.numcheck import convergence_ratios, simulate

params = {"b1": Fraction(3, 7), "b2": Fraction(5, 4), "b3": Fraction(2, 3)}
q0, p0 = (1.1, 0.8), (0.3, -0.5)
sw = load_model("2")

traj = simulate(sw, params, q0, p0, 1e-3, 100)
print("model\tintegral\tdt\tT\tH-drift\tX-drift")
print("\n".join(traj.report_lines()))

bent = dict(params, b2=params["b2"] + Fraction(1, 10))
ctl = simulate(sw, params, q0, p0, 1e-3, 100, integrals=["X"], x_params=bent)
print(f"\nX with b2 + 1/10: drift {ctl.x_drift['X']:.3e}")

ratios = convergence_ratios(sw, params, q0, p0, (0.04, 0.02, 0.01), 10, "X")
print("step-halving ratios:", ", ".join(f"{r:.2f}" for r in ratios))
