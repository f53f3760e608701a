"""Two Birkhoff steps on the truncated DP Hamiltonian.

The cubic step leaves no resonant terms. The quartic normal form keeps
only terms that depend on the actions |u_j|^2 inside the certified region.
"""

from dphierarchy.birkhoff import birkhoff_step, dp_hamiltonian_fourier, index_mass, is_trivially_resonant

J = 10
H = dp_hamiltonian_fourier(J)
cubic = birkhoff_step(H, 0)
print("cubic normal form terms:", len(cubic.normal_terms.terms))

quartic = birkhoff_step(cubic.H_next, 1)
terms = quartic.normal_terms.terms
certified = [a for a in terms if index_mass(a) <= quartic.certified_limit]
print(f"quartic normal form: {len(terms)} terms, {len(certified)} certified, "
      f"{len(quartic.flagged)} near the cutoff")
print("all certified terms are action terms:", all(is_trivially_resonant(a) for a in certified))
print("violations:", quartic.violations)
