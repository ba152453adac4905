"""Closed G2-structures on seven-dimensional Lie algebras.

A positive 3-form phi induces a metric and volume via
    g(X,Y) dV = (1/6) i_X phi wedge i_Y phi wedge phi,
and, when d phi = 0, an intrinsic torsion 2-form tau characterised by
    d(*phi) = tau wedge phi,   tau in the 14-dimensional component of Lambda^2.
From tau one gets the Ricci tensor, the scalar curvature -|tau|^2/2, the
Hodge Laplacian d tau of phi, and the extremally-Ricci-pinched diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg
from .exterior import (
    KForm,
    MetricData,
    basis_indices,
    basis_vector,
    hodge,
    interior,
    norm_sq,
    wedge,
)
from .liealg import LieAlgebra, ce_differential
from .scalars import FLOAT, RATIONAL, ExactBackendUnavailable, rational_nth_root

CHOLESKY_PIVOT_TOL = 1e-12


class NotPositiveError(ValueError):
    """The 3-form is not a positive G2-form."""


class NotClosedError(ValueError):
    """The operation requires a closed G2-structure."""


class InconsistentTorsionError(ArithmeticError):
    """The torsion linear system has no solution within tolerance."""


class NotERPError(ValueError):
    """The structure is not extremally Ricci pinched."""


def adapted_phi(backend=RATIONAL) -> KForm:
    """The standard positive 3-form; its induced metric is the identity."""
    return KForm.from_terms(
        7, 3,
        {(1, 2, 7): 1, (3, 4, 7): 1, (5, 6, 7): 1,
         (1, 3, 5): 1, (1, 4, 6): -1, (2, 3, 6): -1, (2, 4, 5): -1},
        backend,
    )


def _np_bilinear_tables():
    """Cached numpy tables for the fast float path of induced_bilinear."""
    if not hasattr(_np_bilinear_tables, "_cache"):
        from .exterior import interior_table, wedge_tensor

        mats = []
        table = interior_table(7, 3)
        for i in range(7):
            m = np.zeros((21, 35))
            for pos_in, pos_out, sign in table[i]:
                m[pos_out, pos_in] = sign
            mats.append(m)
        _np_bilinear_tables._cache = (
            np.stack(mats), wedge_tensor(7, 2, 2), wedge_tensor(7, 4, 3)[:, :, 0])
    return _np_bilinear_tables._cache


def induced_bilinear_np(y: np.ndarray) -> np.ndarray:
    """Float-backend induced bilinear form from a coefficient vector."""
    mats, w22, w43 = _np_bilinear_tables()
    iphi = mats @ y                          # (7, 21)
    q = np.einsum("abc,c->ab", w22, w43 @ y)  # (21, 21)
    b = (iphi @ q @ iphi.T) / 6.0
    return (b + b.T) / 2.0


def induced_bilinear(phi: KForm):
    """The symmetric bilinear form b with b_ij e^{1..7} = (1/6) i_i phi ^ i_j phi ^ phi."""
    if phi.n != 7 or phi.k != 3:
        raise ValueError("expected a 3-form on R^7")
    if phi.backend == FLOAT:
        return [list(row) for row in induced_bilinear_np(phi.np_coeffs).tolist()]
    iphi = [interior(basis_vector(7, i + 1, phi.backend), phi) for i in range(7)]
    b = [[None] * 7 for _ in range(7)]
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(iphi[i], iphi[j]), phi)
            c = top.coeffs[0] / 6
            b[i][j] = c
            b[j][i] = c
    return b


def _float_cholesky_ok(b) -> bool:
    a = np.array([[float(x) for x in row] for row in b])
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(a)))))
    l = np.zeros_like(a)
    for i in range(n):
        s = a[i, i] - np.dot(l[i, :i], l[i, :i])
        if s <= CHOLESKY_PIVOT_TOL * scale:
            return False
        l[i, i] = math.sqrt(s)
        for j in range(i + 1, n):
            l[j, i] = (a[j, i] - np.dot(l[j, :i], l[i, :i])) / l[i, i]
    return True


def is_positive(alg_or_n, phi: KForm) -> bool:
    """True iff phi induces a positive-definite metric in the fixed orientation."""
    if phi.k != 3 or phi.n != 7:
        return False
    if phi.is_zero():
        return False
    b = induced_bilinear(phi)
    if phi.backend == RATIONAL:
        if linalg.det([list(r) for r in b]) <= 0:
            return False
        return linalg.is_positive_definite([list(r) for r in b])
    if np.linalg.det(np.array(b)) <= 0:
        return False
    return _float_cholesky_ok(b)


def metric_from_phi(alg_or_n, phi: KForm) -> MetricData:
    """Metric and volume induced by a positive 3-form.

    Writes b_ij for the induced bilinear coefficients; the metric is
    (det b)^(-1/9) b and the volume coefficient (det b)^(1/9).  In the
    rational backend the ninth root must be exact, otherwise
    ExactBackendUnavailable asks the caller to convert to floats.
    """
    b = induced_bilinear(phi)
    if phi.backend == RATIONAL:
        det_b = linalg.det([list(r) for r in b])
        if det_b <= 0 or not linalg.is_positive_definite([list(r) for r in b]):
            raise NotPositiveError("not a positive 3-form")
        root = rational_nth_root(det_b, 9)
        if root is None:
            raise ExactBackendUnavailable(
                "(det b)^(1/9) is irrational; convert the form with to_float()")
        g = [[x / root for x in row] for row in b]
        vol = KForm.monomial(7, tuple(range(1, 8)), root)
        return MetricData(g, vol)
    det_b = float(np.linalg.det(np.array(b)))
    if det_b <= 0 or not _float_cholesky_ok(b):
        raise NotPositiveError("not a positive 3-form")
    root = det_b ** (1.0 / 9.0)
    g = [[float(x) / root for x in row] for row in b]
    vol = KForm.monomial(7, tuple(range(1, 8)), root, backend=FLOAT)
    return MetricData(g, vol)


@dataclass(frozen=True)
class TorsionData:
    tau: KForm
    tau_norm_sq: object
    dtau: KForm


@dataclass(frozen=True)
class CurvatureData:
    ric: tuple
    scal: object
    ric_eigenvalues: tuple


@dataclass(frozen=True)
class ERPDiagnostics:
    residual: float
    tau_norm_sq: float
    tau_cubed_zero: bool
    tau_tau_closed: bool
    star_tau_tau_closed: bool
    tau_tau_simple: bool
    annihilator_dim: int
    ric_matches_j_formula: bool
    ric_eigenvalue_pattern: bool

    @property
    def passed(self) -> bool:
        return (self.tau_cubed_zero and self.tau_tau_closed
                and self.star_tau_tau_closed and self.tau_tau_simple
                and self.ric_matches_j_formula and self.ric_eigenvalue_pattern)


class G2Structure:
    """A positive 3-form on a 7-dimensional Lie algebra with derived metric.

    The metric, volume and the Hodge Gram tables for the degrees used by the
    torsion and curvature computations are built eagerly; afterwards every
    method is read-only.
    """

    def __init__(self, algebra: LieAlgebra, phi: KForm):
        if algebra.n != 7:
            raise ValueError("G2-structures need a 7-dimensional algebra")
        if phi.n != 7 or phi.k != 3:
            raise ValueError("phi must be a 3-form on R^7")
        self.algebra = algebra
        self.phi = phi
        self.metric = metric_from_phi(algebra, phi)
        for k in (2, 3, 4, 5):
            self.metric.gram(k)
        self._torsion: Optional[TorsionData] = None

    @property
    def backend(self):
        return self.phi.backend

    def star(self, form: KForm) -> KForm:
        return hodge(self.metric, form)

    def d(self, form: KForm) -> KForm:
        return ce_differential(self.algebra, form)

    def closedness_residual(self):
        return self.d(self.phi).max_abs()

    def is_closed(self, tol=1e-10) -> bool:
        if self.backend == RATIONAL:
            return self.closedness_residual() == 0
        return self.closedness_residual() < tol

    def to_float(self) -> "G2Structure":
        if self.backend == FLOAT:
            return self
        return G2Structure(self.algebra, self.phi.to_float())

    def __repr__(self):
        return "G2Structure(%r, closed=%s)" % (self.algebra, self.is_closed())


# ---------------------------------------------------------------------------
# 2-form decomposition
# ---------------------------------------------------------------------------

def wedge_phi_star_matrix(struct: G2Structure):
    """Matrix of alpha -> *(alpha wedge phi) on the 21 basis 2-forms."""
    cols = []
    for idx in basis_indices(7, 2):
        alpha = KForm.monomial(7, tuple(i + 1 for i in idx), backend=struct.backend)
        cols.append(struct.star(wedge(alpha, struct.phi)).coeffs)
    return [[cols[j][i] for j in range(21)] for i in range(21)]


def project_14(struct: G2Structure, alpha: KForm) -> KForm:
    """Projection of a 2-form onto the 14-dimensional component.

    Fixed points satisfy alpha wedge phi = -*alpha; the 7-dimensional
    complement (spanned by contractions of phi) has *(alpha wedge phi) = 2 alpha.
    """
    if alpha.k != 2 or alpha.n != 7:
        raise ValueError("expected a 2-form on R^7")
    star_part = struct.star(wedge(alpha, struct.phi))
    third = Fraction(1, 3) if struct.backend == RATIONAL else (1.0 / 3.0)
    return third * (2 * alpha - star_part)


def _lambda14_basis(struct: G2Structure):
    """A basis of the 14-dimensional component as coefficient vectors."""
    m = wedge_phi_star_matrix(struct)
    if struct.backend == RATIONAL:
        proj = [[(2 * (1 if i == j else 0) - m[i][j]) / 3 for j in range(21)]
                for i in range(21)]
        cols = linalg.transpose(proj)
        red, pivots = linalg.rref(cols)
        basis = [red[r] for r in range(len(pivots))]
        if len(basis) != 14:
            raise InconsistentTorsionError("projector rank %d != 14" % len(basis))
        return basis
    arr = (2.0 * np.eye(21) - np.array([[float(x) for x in r] for r in m])) / 3.0
    u, s, _ = np.linalg.svd(arr)
    count = int(np.sum(s > 1e-8 * s[0]))
    if count != 14:
        raise InconsistentTorsionError("projector rank %d != 14" % count)
    return [tuple(u[:, i]) for i in range(14)]


def torsion_form(struct: G2Structure) -> TorsionData:
    """The intrinsic torsion 2-form of a closed structure.

    Solves tau wedge phi = d(*phi) by least squares over the 14-dimensional
    component (the wedge-by-phi map is injective there) and asserts the
    residual.
    """
    if struct.backend == RATIONAL:
        if struct.closedness_residual() != 0:
            raise NotClosedError("structure is not closed")
    elif struct.closedness_residual() >= 1e-10:
        raise NotClosedError("structure is not closed")
    rhs = struct.d(struct.star(struct.phi))
    basis = _lambda14_basis(struct)
    if struct.backend == RATIONAL:
        cols = []
        for vec in basis:
            form = KForm(7, 2, vec, RATIONAL)
            cols.append(wedge(form, struct.phi).coeffs)
        a = [[cols[j][i] for j in range(len(cols))] for i in range(21)]
        x, res_sq = linalg.lstsq(a, list(rhs.coeffs))
        if res_sq != 0:
            raise InconsistentTorsionError("inconsistent torsion system")
        tau = KForm.zero(7, 2)
        for c, vec in zip(x, basis):
            tau = tau + c * KForm(7, 2, vec, RATIONAL)
    else:
        cols = []
        for vec in basis:
            form = KForm(7, 2, vec, FLOAT)
            cols.append(wedge(form, struct.phi).np_coeffs)
        a = np.array(cols).T
        b = rhs.np_coeffs
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        res = float(np.linalg.norm(a @ x - b))
        if res > 1e-9 * max(1.0, float(np.linalg.norm(b))):
            raise InconsistentTorsionError("inconsistent torsion system")
        tau = KForm(7, 2, (np.array(basis).T @ x), FLOAT)
    tau_nsq = norm_sq(struct.metric, tau)
    return TorsionData(tau=tau, tau_norm_sq=tau_nsq, dtau=struct.d(tau))


def torsion(struct: G2Structure) -> TorsionData:
    if struct._torsion is None:
        struct._torsion = torsion_form(struct)
    return struct._torsion


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def j_map(struct: G2Structure, gamma: KForm):
    """Symmetric tensor j(gamma)(X,Y) = *(i_X phi wedge i_Y phi wedge gamma)."""
    if gamma.k != 3 or gamma.n != 7:
        raise ValueError("expected a 3-form on R^7")
    volc = struct.metric.vol_coeff
    iphi = [interior(basis_vector(7, i + 1, struct.backend), struct.phi)
            for i in range(7)]
    rows = [[None] * 7 for _ in range(7)]
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(iphi[i], iphi[j]), gamma)
            val = top.coeffs[0] / volc
            rows[i][j] = val
            rows[j][i] = val
    return tuple(tuple(r) for r in rows)


def _generalized_eigenvalues(ric, g) -> tuple:
    a = np.array([[float(x) for x in row] for row in ric])
    b = np.array([[float(x) for x in row] for row in g])
    l = np.linalg.cholesky(b)
    linv = np.linalg.inv(l)
    m = linv @ a @ linv.T
    return tuple(sorted(np.linalg.eigvalsh(m).tolist()))


def curvature(struct: G2Structure) -> CurvatureData:
    """Ricci tensor and scalar curvature of a closed structure.

    Ric = |tau|^2/4 g - (1/4) j(d tau - (1/2) *(tau wedge tau)); the scalar
    curvature is computed independently as -|tau|^2/2 and checked against the
    metric trace of Ric.
    """
    tor = torsion(struct)
    half = Fraction(1, 2) if struct.backend == RATIONAL else 0.5
    quarter = Fraction(1, 4) if struct.backend == RATIONAL else 0.25
    tt = wedge(tor.tau, tor.tau)
    arg = tor.dtau - half * struct.star(tt)
    j = j_map(struct, arg)
    g = struct.metric.g
    ric = tuple(
        tuple(quarter * tor.tau_norm_sq * g[i][k] - quarter * j[i][k]
              for k in range(7))
        for i in range(7)
    )
    scal = -half * tor.tau_norm_sq
    ginv = struct.metric.g_inv()
    trace = sum(ginv[i][k] * ric[i][k] for i in range(7) for k in range(7))
    tol = 1e-8 * max(1.0, abs(float(scal)))
    if abs(float(trace - scal)) > tol:
        raise ArithmeticError(
            "trace of Ric (%s) disagrees with -|tau|^2/2 (%s)" % (trace, scal))
    return CurvatureData(ric=ric, scal=scal,
                         ric_eigenvalues=_generalized_eigenvalues(ric, g))


def erp_residual(struct: G2Structure) -> float:
    """g-norm of d tau - (|tau|^2/6) phi - (1/6) *(tau wedge tau)."""
    tor = torsion(struct)
    sixth = Fraction(1, 6) if struct.backend == RATIONAL else (1.0 / 6.0)
    r = tor.dtau - (sixth * tor.tau_norm_sq) * struct.phi \
        - sixth * struct.star(wedge(tor.tau, tor.tau))
    return math.sqrt(float(norm_sq(struct.metric, r)))


def erp_diagnostics(struct: G2Structure) -> ERPDiagnostics:
    """Structural checks for extremally-Ricci-pinched structures.

    Requires a nonzero torsion form and a vanishing ERP residual.  Verifies
    that tau^3 = 0, that tau wedge tau and its star are closed, that
    tau wedge tau is simple (3-dimensional annihilator), that
    Ric = (1/12) j(*(tau wedge tau)), and the eigenvalue pattern
    (-|tau|^2/6 three times, 0 four times).
    """
    tor = torsion(struct)
    res = erp_residual(struct)
    if float(tor.tau_norm_sq) <= 1e-12 or res >= 1e-8:
        raise NotERPError("not ERP")
    tol = 1e-9
    tt = wedge(tor.tau, tor.tau)
    ttt = wedge(tt, tor.tau)
    star_tt = struct.star(tt)
    d_tt = struct.d(tt)
    d_star_tt = struct.d(star_tt)
    cols = []
    for i in range(7):
        cols.append(interior(basis_vector(7, i + 1, struct.backend), tt).coeffs)
    if struct.backend == RATIONAL:
        ann_dim = 7 - linalg.rank(linalg.transpose(cols))
    else:
        ann_dim = 7 - int(np.linalg.matrix_rank(np.array(cols, dtype=float).T,
                                                tol=1e-10))
    cur = curvature(struct)
    twelfth = Fraction(1, 12) if struct.backend == RATIONAL else (1.0 / 12.0)
    j_alt = j_map(struct, star_tt)
    ric_match = max(
        abs(float(cur.ric[i][k] - twelfth * j_alt[i][k]))
        for i in range(7) for k in range(7)
    ) < 1e-8
    lam = -float(tor.tau_norm_sq) / 6.0
    eigs = cur.ric_eigenvalues
    pattern = (all(abs(e - lam) < 1e-7 for e in eigs[:3])
               and all(abs(e) < 1e-7 for e in eigs[3:]))
    return ERPDiagnostics(
        residual=res,
        tau_norm_sq=float(tor.tau_norm_sq),
        tau_cubed_zero=float(ttt.max_abs()) < tol,
        tau_tau_closed=float(d_tt.max_abs()) < tol,
        star_tau_tau_closed=float(d_star_tt.max_abs()) < tol,
        tau_tau_simple=(ann_dim == 3),
        annihilator_dim=ann_dim,
        ric_matches_j_formula=ric_match,
        ric_eigenvalue_pattern=pattern,
    )


def hodge_laplacian_closed(struct: G2Structure) -> KForm:
    """Hodge Laplacian of a closed structure: d tau, checked against -d*d*phi."""
    tor = torsion(struct)
    alt = -1 * struct.d(struct.star(struct.d(struct.star(struct.phi))))
    diff = (tor.dtau - alt).max_abs()
    scale = max(1.0, float(tor.dtau.max_abs()))
    if float(diff) > 1e-9 * scale:
        raise ArithmeticError("d tau and -d*d*phi disagree: %s" % diff)
    return tor.dtau


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def closed_3form_basis(alg: LieAlgebra):
    """Exact basis of the kernel of d on 3-forms."""
    null = linalg.nullspace(alg.d_matrix(3), ncols=len(basis_indices(alg.n, 3)))
    return [KForm(alg.n, 3, v, RATIONAL) for v in null]


def search_closed_positive(alg: LieAlgebra, attempts=10000, seed=0,
                           initial: Optional[KForm] = None,
                           backend=FLOAT) -> Optional[KForm]:
    """Randomized search for a closed positive 3-form.

    Samples coefficient combinations in ker(d) with a seeded generator
    (standard normal in the float backend, small integers in the rational
    one) and returns the first positive sample, or None.  An optional
    initial candidate is tried first.
    """
    if alg.n != 7:
        raise ValueError("search needs a 7-dimensional algebra")
    if initial is not None:
        closed = ce_differential(alg, initial).max_abs()
        ok = closed == 0 if initial.backend == RATIONAL else float(closed) < 1e-10
        if ok and is_positive(alg, initial):
            return initial
    kernel = closed_3form_basis(alg)
    if not kernel:
        return None
    rng = np.random.default_rng(seed)
    dim = len(kernel)
    if backend == RATIONAL:
        for _ in range(attempts):
            coeffs = rng.integers(-3, 4, size=dim)
            phi = KForm.zero(7, 3)
            for c, form in zip(coeffs, kernel):
                if c:
                    phi = phi + int(c) * form
            if is_positive(alg, phi):
                return phi
        return None
    kernel_np = np.array([f.np_coeffs for f in kernel])
    for _ in range(attempts):
        x = rng.standard_normal(dim)
        y = kernel_np.T @ x
        b = induced_bilinear_np(y)
        if np.linalg.det(b) <= 0:
            continue
        try:
            np.linalg.cholesky(b)
        except np.linalg.LinAlgError:
            continue
        if _float_cholesky_ok(b.tolist()):
            return KForm(7, 3, y, FLOAT)
    return None
