"""SU(3)-structures in six dimensions and the closed forms they induce.

The pair (omega, psi) determines everything else: the almost-complex
structure J comes out of psi's quadratic invariant, psi_hat and the metric
follow, and the torsion sits in the constant c (d omega = c psi) together
with a primitive (1,1)-form w2.
"""

from fractions import Fraction as F

from g2lab import (
    catalog,
    check_dw2_prop_psi,
    find_compatible_derivations,
    g2_from_extension,
    norm_sq,
    reconstruct_su3,
    su3_torsion_class,
    w2_of,
)
from g2lab.exterior import Endo

# ---------------------------------------------------------------------------
# reconstruction from (omega, psi)
# ---------------------------------------------------------------------------
n2 = catalog.get("n2")
s2 = reconstruct_su3(n2.algebra, *n2.su3_pair)
print("psi_hat =", s2.psi_hat)
print("J e1 =", s2.j.apply((1, 0, 0, 0, 0, 0)))
print("metric is the identity:",
      all(s2.metric.g[i][j] == (1 if i == j else 0)
          for i in range(6) for j in range(6)))

# ---------------------------------------------------------------------------
# torsion classes and w2
# ---------------------------------------------------------------------------
for eid, params in (("n2", {}), ("n1", {}), ("s_ab", {"a": 1, "b": 2}),
                    ("s_ab", {"a": 1, "b": 0})):
    entry = catalog.get(eid, **params)
    s = reconstruct_su3(entry.algebra, *entry.su3_pair)
    tc = su3_torsion_class(s)
    label = "%s%s" % (eid, tuple(params.values()) if params else "")
    print("\n%-12s -> %s" % (label, tc.kind), end="")
    if tc.kind == "coupled":
        print(" with c =", tc.c)
        data = w2_of(s, tc.c)
        prop = check_dw2_prop_psi(s, data.w2)
        print("   w2 =", data.w2)
        print("   |w2|^2 =", norm_sq(s.metric, data.w2),
              "| d(w2) proportional to psi:", prop.proportional,
              "" if not prop.proportional else "with factor %s = |w2|^2/4" % prop.factor)
    else:
        print()

# ---------------------------------------------------------------------------
# derivations compatible with the coupling, and closed extensions
# ---------------------------------------------------------------------------
fam = find_compatible_derivations(n2.algebra, s2, -1)
print("\nsolutions of (D act psi) = psi inside Der(n2): affine dimension", fam.dim)
print("contains the diagonal family:",
      all(fam.contains(catalog.lauret_derivation(a))
          for a in (F(1, 4), F(1, 2), F(2))))

res = g2_from_extension(s2, catalog.lauret_derivation(F(1, 2)))
print("extension by the diagonal derivation is closed:", res.closed)

res_id = g2_from_extension(s2, Endo.identity(6))
print("extension by the identity is closed:", res_id.closed,
      " (identity scales psi by 3, not 1)")

n1 = catalog.get("n1")
s1 = reconstruct_su3(n1.algebra, *n1.su3_pair)
fam1 = find_compatible_derivations(n1.algebra, s1, -1)
print("\non the step-4 algebra the compatible family has dimension", fam1.dim)
w1 = w2_of(s1, -1)
print("and d(w2) is never proportional to psi:",
      not check_dw2_prop_psi(s1, w1.w2).proportional)
