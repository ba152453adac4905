"""Catalog tour and randomized search for closed positive 3-forms.

Ends with an open-ended experiment: flowing a generic closed perturbation on
the solvable extension to see whether it relaxes back toward the
one-parameter ansatz (no theory pins the answer; this just runs it).
"""

from fractions import Fraction as F

import numpy as np

from g2lab import (
    G2Structure,
    catalog,
    ce_differential,
    curvature,
    is_positive,
    laplacian_flow,
    search_closed_positive,
    torsion_form,
)
from g2lab.exterior import KForm
from g2lab.flow import ansatz_coefficients

# ---------------------------------------------------------------------------
# what's in the catalog
# ---------------------------------------------------------------------------
for eid in catalog.entry_ids():
    spec = catalog.describe(eid)
    flag = "  [ambiguous]" if spec.ambiguous else ""
    print("%-13s params: %-28s %s%s" % (eid, spec.param_doc, spec.description, flag))

# ---------------------------------------------------------------------------
# randomized search on the 3-step nilpotent algebra
# ---------------------------------------------------------------------------
ffkm = catalog.get("ffkm_n")
phi = search_closed_positive(ffkm.algebra, attempts=10000, seed=7)
print("\nclosed positive form found on the 3-step nilpotent algebra:",
      phi is not None)
print("  closedness residual: %.1e" % float(ce_differential(ffkm.algebra, phi).max_abs()),
      "| positive:", is_positive(7, phi))
struct = G2Structure(ffkm.algebra, phi)
tor = torsion_form(struct)
print("  |tau|^2 = %.4f, Scal = %.4f" % (tor.tau_norm_sq,
                                         float(curvature(struct).scal)))

# the classification entries also admit search-derived closed forms
entry = catalog.get("nonsolv_2", mu=F(1, 2))
phi2 = catalog.search_derived_phi(entry, seed=3)
print("\nsearch-derived form on a non-solvable entry:", phi2 is not None)

# ---------------------------------------------------------------------------
# experiment: does a generic closed perturbation relax to the ansatz?
# ---------------------------------------------------------------------------
g110 = catalog.get("g_abk", a=1, b=1, k=0)
rng = np.random.default_rng(12)
base = g110.phi.to_float().np_coeffs
ansatz_only = None
for _ in range(2000):
    candidate = KForm(7, 3, base + 0.05 * rng.standard_normal(35), "float")
    if not is_positive(7, candidate):
        continue
    resid = ce_differential(g110.algebra, candidate)
    # project back onto the closed cone by keeping only the kernel part
    from g2lab.g2 import closed_3form_basis

    kernel = np.array([f.np_coeffs for f in closed_3form_basis(g110.algebra)])
    coeffs, *_ = np.linalg.lstsq(kernel.T, candidate.np_coeffs, rcond=None)
    projected = KForm(7, 3, kernel.T @ coeffs, "float")
    if is_positive(7, projected):
        ansatz_only = projected
        break

print("\ngeneric closed positive perturbation found:", ansatz_only is not None)
traj = laplacian_flow(G2Structure(g110.algebra, ansatz_only), 0.25,
                      dt0=1e-3, tol=1e-8)
first = ansatz_coefficients(traj.samples[0].phi)
last = ansatz_coefficients(traj.samples[-1].phi)
print("on-ansatz at t = 0:", first is not None,
      "| on-ansatz at t = %.2f:" % traj.samples[-1].t, last is not None)


def off_ansatz_mass(form):
    from g2lab.flow import ANSATZ_MONOMIALS, index_of

    keep = {index_of(m) for m in ANSATZ_MONOMIALS}
    return float(sum(c * c for p, c in enumerate(form.coeffs) if p not in keep))


print("off-ansatz coefficient mass: %.4e -> %.4e"
      % (off_ansatz_mass(traj.samples[0].phi),
         off_ansatz_mass(traj.samples[-1].phi)))
print("(no acceptance value exists for this experiment; it is exploratory)")
