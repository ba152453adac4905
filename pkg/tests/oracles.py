"""Independent brute-force implementations used to cross-check the library.

Everything here is deliberately written without reusing the library's sign
tables: forms are plain dicts {sorted 0-based tuple: Fraction}, the wedge is
the shuffle-sum definition, and ranks come from sympy.  Slow but obviously
correct on the small spaces involved.
"""

from fractions import Fraction
from itertools import combinations

import sympy


def perm_sign(seq):
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq))
              if seq[a] > seq[b])
    return (-1) ** inv


def form_value(terms, indices):
    """Evaluate a form dict on a tuple of (possibly unsorted) 0-based indices."""
    if len(set(indices)) != len(indices):
        return Fraction(0)
    key = tuple(sorted(indices))
    return perm_sign(indices) * terms.get(key, Fraction(0))


def wedge_oracle(a_terms, p, b_terms, q, n):
    """Shuffle-sum wedge: (a^b)(e_I) = sum over (p,q)-shuffles of signs."""
    out = {}
    for idx in combinations(range(n), p + q):
        total = Fraction(0)
        for left in combinations(range(p + q), p):
            right = tuple(i for i in range(p + q) if i not in left)
            shuffle = left + right
            sign = perm_sign(shuffle)
            total += sign * form_value(a_terms, tuple(idx[i] for i in left)) \
                * form_value(b_terms, tuple(idx[i] for i in right))
        if total:
            out[idx] = total
    return out


def interior_oracle(i, terms, k, n):
    """(i_{e_i} a)(X_2..X_k) = a(e_i, X_2..X_k)."""
    out = {}
    for idx in combinations(range(n), k - 1):
        val = form_value(terms, (i,) + idx)
        if val:
            out[idx] = val
    return out


def endo_oracle(rows, terms, k, n):
    """(A act a)(X_1..X_k) = sum_slots a(..., A X_slot, ...)."""
    out = {}
    for idx in combinations(range(n), k):
        total = Fraction(0)
        for slot in range(k):
            for m in range(n):
                coeff = Fraction(rows[m][idx[slot]])
                if coeff:
                    replaced = idx[:slot] + (m,) + idx[slot + 1:]
                    total += coeff * form_value(terms, replaced)
        if total:
            out[idx] = total
    return out


def kform_to_terms(form):
    """Library KForm -> oracle dict with 0-based keys."""
    return {tuple(i - 1 for i in idx): Fraction(c)
            for idx, c in form.terms().items()}


def terms_match(oracle_terms, form) -> bool:
    return oracle_terms == kform_to_terms(form)


def sympy_rank(rows) -> int:
    if not rows:
        return 0
    return sympy.Matrix([[sympy.Rational(x) for x in row] for row in rows]).rank()


def sympy_nullity(rows, ncols) -> int:
    return ncols - sympy_rank(rows)


def levi_civita_ricci(alg, g):
    """Independent Ricci oracle for a left-invariant metric, via Koszul.

    2 <nabla_X Y, Z> = <[X,Y],Z> - <[Y,Z],X> + <[Z,X],Y> for left-invariant
    fields; then Ric(X,Y) = sum_{i,j} g^{ij} <R(e_i, X) Y, e_j>.
    """
    import numpy as np

    n = alg.n
    g = np.array([[float(x) for x in row] for row in g])
    ginv = np.linalg.inv(g)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            c[i, j] = [float(x) for x in alg.bracket_basis(i, j)]
    nabla = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            rhs = np.zeros(n)
            for k in range(n):
                rhs[k] = 0.5 * (c[i, j] @ g[:, k] - c[j, k] @ g[:, i]
                                + c[k, i] @ g[:, j])
            nabla[i, j] = ginv @ rhs
    ric = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            total = 0.0
            for i in range(n):
                t1 = np.einsum("j,jk->k", nabla[x, y], nabla[i])
                t2 = np.einsum("j,jk->k", nabla[i, y], nabla[x])
                t3 = sum(c[i, x][m] * nabla[m, y] for m in range(n))
                r = t1 - t2 - t3
                for j in range(n):
                    total += ginv[i, j] * (r @ g[:, j])
            ric[x, y] = total
    return ric
