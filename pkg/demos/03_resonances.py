"""Resonance structure of the DP dispersion relation omega(j) = j (3 + j^2) / (1 + j^2)."""

from dphierarchy.birkhoff import classify_resonance, nonresonance_scan, vandermonde_det

cubic = nonresonance_scan(1, 60)
print(f"cubic: {cubic.n_indices} indices with |j| <= 60, {cubic.n_resonant} resonant")

quartic = nonresonance_scan(2, 10)
print(f"quartic: {quartic.n_resonant} resonant, non-trivial ones:")
for alpha in quartic.nontrivial_resonant:
    rep = classify_resonance(alpha, 4)
    print("  ", alpha, "K_m divisors:", [str(k) for k in rep.km_divisors])
print("no index solves every K_m equation:", quartic.ok)

# The odd-power Vandermonde vanishes exactly when two |j| coincide.
print("det for [1, 2, 3]:", vandermonde_det([1, 2, 3]))
print("det for [1, -1, 3]:", vandermonde_det([1, -1, 3]))
