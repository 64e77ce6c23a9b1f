"""Build the second-order integral of the Smorodinsky-Winternitz potential.

Starts from the Killing tensor Z0 = m12^2, shows the fractional terms that
appear in Y1 without an integration constant, picks Z1 so that every residue
vanishes, and assembles the Hermitean integral X.
"""

from superint.builder.integral import assemble_Y, build_integral, residues
from superint.corpus import parse_phase
from superint.opalg import build_a
from superint.phase import bracket, hamiltonian
from superint.symcore import parse_rational

V = [parse_rational("b1*q1^2 + b2/q1^2"), parse_rational("b1*q2^2 + b3/q2^2")]
Z0 = parse_phase("m12^2")


def derivative_name(key):
    # keys list q-orders first, then p-orders
    names = [f"q{i + 1}" for i in range(2)] + [f"p{i + 1}" for i in range(2)]
    return " ".join(f"d/d{v}" + (f"^{k}" if k > 1 else "") for v, k in zip(names, key) if k)


print("a1 =")
for key, coeff in sorted(build_a(1, V).terms.items()):
    print(f"  {coeff}  {derivative_name(key)}")

Y1 = assemble_Y(1, [Z0], V)
print("\nY1 with Z1 = 0:\n ", Y1)
for key, r in sorted(residues(Y1, 1).items()):
    if r:
        print(f"  R_{key[0]}{key[1]}{key[2]} = {r}")

Z1 = parse_phase("2*b2*p2^2/p1^2 + 2*b3*p1^2/p2^2 - 2*b1*m12^4/(3*p1^2*p2^2)")
X, table = build_integral([Z0, Z1], V, 2)
print("\nall residues vanish:", not any(table.values()))
print("X =", X)
print("(X, H) =", bracket(X, hamiltonian(V, 2)))
