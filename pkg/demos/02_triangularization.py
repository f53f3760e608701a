"""Recombining integrals into diagonal Sobolev energies.

F1 comes out as ``int w_x^2`` plus higher terms. The level-3 integral has
no quadratic part at all, so the strict build stops there; the lenient
build skips it and shows what remains off the diagonal.
"""

from dphierarchy.conserved import m1_expansion, triangularize
from dphierarchy.errors import DegenerateLeadingCoefficient

m1 = m1_expansion(3)
print("M1 constant:", m1.constant, " quadratic:", {i: str(v) for i, v in m1.quadratic.coeffs.items() if v})

F = triangularize(0, 3)
print("F1 quadratic:", {i: str(v) for i, v in F[0].quadratic.coeffs.items() if v})

try:
    triangularize(4, 3)
except DegenerateLeadingCoefficient as exc:
    print("strict build stops:", exc)

for k, f in triangularize(4, 3, strict=False).items():
    print(f"F{2 * k + 1} (lenient):", {i: str(v) for i, v in f.quadratic.coeffs.items() if v})
