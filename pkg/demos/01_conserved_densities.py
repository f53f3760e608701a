"""Conserved densities of the DP hierarchy, computed exactly.

Run with ``python3 demos/01_conserved_densities.py``.
"""

from dphierarchy.conserved import compute_Sn, gamma, linear_closed_form, linear_table
from dphierarchy.diffpoly import rho_seq

# The first two densities, expanded in w = (1 - d_xx) u through degree 2.
rho0, rho1 = rho_seq(1, 2)
print("rho0 =", rho0)
print("rho1 =", rho1)

# Linear coefficients c_m, from the recursion and from the closed form.
table = linear_table(8)
for m in range(9):
    print(f"c_{m} = {table[m]}   closed form agrees: {linear_closed_form(m) == table[m]}")

# The alternating sums S_n that fix the top quadratic coefficient.
for n in (1, 3, 5, 7):
    print(f"S_{n} = {compute_Sn(n)}")

# Quadratic parts of the integrals: even levels carry none.
for n in range(6):
    g = gamma(n, 3)
    q = {i: str(v) for i, v in g.quadratic.coeffs.items() if v}
    print(f"Gamma{n}: quadratic diagonal {q or 'zero'}")
