"""Lie algebras by structure equations: differentials, cohomology, structure.

The running examples are the two coupled nilpotent algebras and the
unimodular solvable family from the catalog; everything is exact.
"""

from fractions import Fraction as F

from g2lab import (
    betti,
    catalog,
    ce_differential,
    check_jacobi,
    derivation_space,
    from_structure_equations,
    is_unimodular,
    rank_one_extension,
    structure_flags,
)
from g2lab.su3 import adapted_su3_pair

# ---------------------------------------------------------------------------
# structure equations and the Chevalley-Eilenberg differential
# ---------------------------------------------------------------------------
n2 = catalog.nilpotent_n2()
print("n2 differentials:")
for i, de in enumerate(n2.d1, start=1):
    print("  de%d = %s" % (i, de))
print("Jacobi residual:", check_jacobi(n2))

omega, psi = adapted_su3_pair()
print("\nd(omega) on n2 =", ce_differential(n2, omega), " (= -psi)")

# perturbing a structure equation typically destroys d^2 = 0
broken = from_structure_equations(
    6, {5: {(1, 4): 1, (2, 3): 1}, 6: {(1, 3): 1, (2, 4): -1, (1, 5): 1}})
print("residual after adding e15 to de6:", check_jacobi(broken))

# ---------------------------------------------------------------------------
# Betti numbers and structural classification
# ---------------------------------------------------------------------------
print("\nBetti numbers of n2:", [betti(n2, k) for k in range(7)])
ffkm = catalog.get("ffkm_n").algebra
print("Betti numbers of the 3-step nilpotent algebra:",
      [betti(ffkm, k) for k in range(8)])
print("its flags:", structure_flags(ffkm))

s11 = catalog.solvable_s_ab(1, 1)
print("\nsolvable family at (a,b) = (1,1):",
      "unimodular =", is_unimodular(s11),
      "| flags =", structure_flags(s11))

nonsolv = catalog.get("nonsolv_2", mu=F(1, 2)).algebra
print("non-solvable classification entry:", structure_flags(nonsolv))

# ---------------------------------------------------------------------------
# derivations and rank-one extensions
# ---------------------------------------------------------------------------
der = derivation_space(n2)
print("\ndim Der(n2) =", der.dim)

d_half = catalog.lauret_derivation(F(1, 2))
print("the diagonal derivation is a member:", der.contains(d_half))

ext = rank_one_extension(n2, d_half, name="g_a(1/2)")
print("extension differentials (note the e7 terms):")
for i, de in enumerate(ext.d1, start=1):
    print("  de%d = %s" % (i, de))
print("extension satisfies Jacobi:", check_jacobi(ext) == 0)
print("dim Der of the three-parameter solvable extension:",
      derivation_space(catalog.get("g_abk", a=1, b=1, k=0).algebra).dim)
