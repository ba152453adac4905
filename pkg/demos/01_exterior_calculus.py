"""Exterior-algebra tour: forms, wedge, contraction, Hodge duality.

Every quantity in this demo is exact: coefficients are rationals, and the
printed identities hold on the nose, not up to rounding.
"""

from fractions import Fraction as F

from g2lab import (
    Endo,
    KForm,
    MetricData,
    adapted_phi,
    basis_vector,
    endo_action,
    hodge,
    inner,
    interior,
    wedge,
)

# ---------------------------------------------------------------------------
# building forms
# ---------------------------------------------------------------------------
# A k-form stores one coefficient per increasing multi-index; e127 means
# e^1 ^ e^2 ^ e^7.  Indices may be given in any order, signs are handled.

omega = KForm.from_terms(6, 2, {(1, 2): 1, (3, 4): 1, (5, 6): 1})
print("omega          =", omega)
print("omega (swapped)=", KForm.from_terms(6, 2, {(2, 1): -1, (3, 4): 1, (5, 6): 1}))

# wedge products are graded-commutative and associative
e1, e2 = KForm.monomial(7, (1,)), KForm.monomial(7, (2,))
print("\ne1 ^ e2 =", wedge(e1, e2), "   e2 ^ e1 =", wedge(e2, e1))

a = KForm.from_terms(7, 2, {(1, 2): 1, (3, 4): 1})
print("(e12 + e34)^2 =", wedge(a, a))

# ---------------------------------------------------------------------------
# contraction and the endomorphism action
# ---------------------------------------------------------------------------
phi = adapted_phi()
print("\nthe standard positive 3-form:\nphi =", phi)
print("i_{e1} phi =", interior(basis_vector(7, 1), phi))

# an endomorphism acts slotwise; the identity multiplies by the degree
print("\nId acting on phi:", endo_action(Endo.identity(7), phi))

scaler = Endo.diag([F(1, 3), F(1, 3), F(1, 6), F(1, 6), F(1, 2), F(1, 2), 0])
print("a weighted diagonal fixes phi's 6-dim part:",
      endo_action(scaler, phi))

# ---------------------------------------------------------------------------
# metric pairings and the Hodge star
# ---------------------------------------------------------------------------
m = MetricData.identity(7)
print("\n<phi, phi> =", inner(m, phi, phi))
star_phi = hodge(m, phi)
print("*phi =", star_phi)
print("phi ^ *phi  =", wedge(phi, star_phi))
print("**phi == phi:", hodge(m, star_phi) == phi)

# the Hodge star squares to (-1)^{k(n-k)}; on 2-forms in dim 7 that is +1
tau = KForm.from_terms(7, 2, {(1, 2): -1, (3, 4): 3, (5, 6): -2})
print("\ntau =", tau, "   |tau|^2 =", inner(m, tau, tau))
print("tau ^ phi == -*tau:", wedge(tau, phi) == -1 * hodge(m, tau))
