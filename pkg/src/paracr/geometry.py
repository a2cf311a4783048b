"""Pointwise pseudo-Riemannian machinery.

A *structure* object carries a chart and produces the quadruplet
(g, phi, xi, eta) — metric, (1,1)-endomorphism, Reeb vector, contact
1-form — at any chart point, evaluated over plain floats or over nested
dual numbers so that derivatives of every component are available to the
caller.  Three realizations exist:

- :class:`CoordinateStructure`: components given directly in the
  coordinate basis as parsed expressions (or callables).
- :class:`FrameStructure`: a moving frame E with constant frame-basis
  tensors; coordinate components are obtained by linear algebra over
  dual numbers at each point.
- :class:`HyperboloidStructure`: the structure induced on the unit
  pseudosphere of a flat para-Kahler ambient space, pulled back through
  an explicit graph parametrization.

A :class:`PointFrame` freezes one structure at one point: it extracts
component values and first/second partial derivatives by jet seeding,
then derives the Levi-Civita connection, curvature tensors, covariant
derivatives of the structure tensors, the h-operator, differential
forms, and projectors — everything downstream residual checks consume.

Index conventions (fixed throughout the package):
  g[i,j]        metric g(e_i, e_j) for coordinate fields e_i
  dg[a,i,j]     ∂_a g_ij;   d2g[a,b,i,j] = ∂_a ∂_b g_ij
  phi[i,j]      the (1,1) tensor component phi^i_j  (phi(e_j) = phi^i_j e_i)
  xi[i]         vector components; eta[j] covector components
  Gamma[k,i,j]  Christoffel symbols of the second kind
  Riem[k,a,b,j] curvature R(e_a, e_b)e_j = Riem[k,a,b,j] e_k
  Ric[y,z]      trace of X -> R(X, e_y)e_z
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateMetric,
    DegeneratePlane,
    OutsidePatch,
    SingularFrame,
    ValidationError,
    WrongDimension,
)
from .expr import eval_expr
from .jets import Dual, depth_of, nth_tangent, seed_multi, sqrt, value_of

_MIN_METRIC_DET = 1e-10
_MIN_FRAME_DET = 1e-6
_MIN_PATCH_MARGIN = 1e-6
_MIN_PLANE_GRAM = 1e-6


@dataclass(frozen=True)
class Chart:
    """A coordinate chart: dimension, coordinate names, and sampling box."""

    coordinates: tuple
    box: tuple  # per-coordinate (lo, hi) closed intervals

    def __post_init__(self):
        m = len(self.coordinates)
        if m < 3 or m % 2 == 0:
            raise ValidationError(
                f"chart dimension must be odd and >= 3, got {m}")
        if len(self.box) != m:
            raise ValidationError("box must give one interval per coordinate")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValidationError(f"empty box interval ({lo}, {hi})")

    @property
    def dim(self):
        return len(self.coordinates)

    @property
    def n(self):
        return (self.dim - 1) // 2


def _evaluator(entry):
    """Turn an expression node or a callable into a point function."""
    if callable(entry):
        return entry
    return lambda xs, e=entry: eval_expr(e, xs)


def _eval_matrix(fns, xs):
    return [[f(xs) for f in row] for row in fns]


def _eval_vector(fns, xs):
    return [f(xs) for f in fns]


# ---------------------------------------------------------------------------
# Scalar linear algebra (works on floats and nested duals alike)
# ---------------------------------------------------------------------------

def mat_mul(A, B):
    m, inner, k = len(A), len(B), len(B[0])
    return [[sum(A[i][e] * B[e][j] for e in range(inner)) for j in range(k)]
            for i in range(m)]


def mat_vec(A, v):
    return [sum(A[i][j] * v[j] for j in range(len(v))) for i in range(len(A))]


def vec_mat(v, A):
    return [sum(v[i] * A[i][j] for i in range(len(v))) for j in range(len(A[0]))]


def transpose(A):
    return [list(col) for col in zip(*A)]


def gauss_jordan(A, B, *, min_det, exc):
    """Solve A X = B for the columns of B by Gauss-Jordan elimination.

    Entries may be floats or nested duals; partial pivoting compares the
    float value levels.  Returns (X, det) with det the float determinant
    estimate (product of pivots with swap sign).  Raises ``exc`` when a
    pivot is numerically zero or |det| falls below ``min_det``.
    """
    m = len(A)
    M = [list(row) for row in A]
    X = [list(row) for row in B]
    det = 1.0
    for col in range(m):
        piv = max(range(col, m), key=lambda r: abs(value_of(M[r][col])))
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            X[col], X[piv] = X[piv], X[col]
            det = -det
        pivot = M[col][col]
        pval = value_of(pivot)
        if abs(pval) <= 1e-300:
            raise exc(f"singular linear system (zero pivot in column {col})")
        det *= pval
        for r in range(m):
            if r == col:
                continue
            factor = M[r][col] / pivot
            for c in range(col, m):
                M[r][c] = M[r][c] - factor * M[col][c]
            for c in range(len(X[r])):
                X[r][c] = X[r][c] - factor * X[col][c]
    for r in range(m):
        pivot = M[r][r]
        X[r] = [x / pivot for x in X[r]]
    if abs(det) < min_det:
        raise exc(f"determinant {det:.3e} below threshold {min_det:.1e}")
    return X, det


def invert_matrix(A, *, min_det, exc):
    m = len(A)
    identity = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    inv, det = gauss_jordan(A, identity, min_det=min_det, exc=exc)
    return inv, det


# ---------------------------------------------------------------------------
# Structure realizations
# ---------------------------------------------------------------------------

class CoordinateStructure:
    """Structure whose coordinate-basis components are given directly.

    ``g_entries``/``phi_entries`` are m x m nested sequences and
    ``xi_entries``/``eta_entries`` length-m sequences of expression nodes
    or callables mapping the coordinate tuple to a scalar.
    """

    def __init__(self, chart, g_entries, phi_entries, xi_entries, eta_entries):
        self.chart = chart
        m = chart.dim
        self._g = [[_evaluator(e) for e in row] for row in g_entries]
        self._phi = [[_evaluator(e) for e in row] for row in phi_entries]
        self._xi = [_evaluator(e) for e in xi_entries]
        self._eta = [_evaluator(e) for e in eta_entries]
        if len(self._g) != m or len(self._phi) != m:
            raise ValueError("component matrices must be m x m")

    @property
    def dim(self):
        return self.chart.dim

    @property
    def n(self):
        return self.chart.n

    def components(self, xs):
        return (
            _eval_matrix(self._g, xs),
            _eval_matrix(self._phi, xs),
            _eval_vector(self._xi, xs),
            _eval_vector(self._eta, xs),
        )


class FrameStructure:
    """Structure given by a moving frame with constant frame-basis tensors.

    ``frame`` is an m x m matrix of expression nodes or callables; column
    ``a`` holds the coordinate components of the frame field e_a.  The
    frame-basis metric ``g_hat``, endomorphism ``phi_hat``, vector
    ``xi_hat`` and covector ``eta_hat`` are constant.  At each point the
    coordinate components are
        phi = E phi_hat E^-1,  xi = E xi_hat,
        eta = eta_hat E^-1,    g = E^-T g_hat E^-1,
    with all linear algebra carried out over dual numbers so derivatives
    flow through.
    """

    def __init__(self, chart, frame, g_hat, phi_hat, xi_hat, eta_hat):
        self.chart = chart
        m = chart.dim
        self._frame = [[_evaluator(e) for e in row] for row in frame]
        self.g_hat = [[float(v) for v in row] for row in g_hat]
        self.phi_hat = [[float(v) for v in row] for row in phi_hat]
        self.xi_hat = [float(v) for v in xi_hat]
        self.eta_hat = [float(v) for v in eta_hat]
        if len(self._frame) != m:
            raise ValueError("frame matrix must be m x m")

    @property
    def dim(self):
        return self.chart.dim

    @property
    def n(self):
        return self.chart.n

    def frame_matrix(self, xs):
        return _eval_matrix(self._frame, xs)

    def components(self, xs):
        E = self.frame_matrix(xs)
        Einv, _det = invert_matrix(E, min_det=_MIN_FRAME_DET, exc=SingularFrame)
        phi = mat_mul(mat_mul(E, self.phi_hat), Einv)
        xi = mat_vec(E, self.xi_hat)
        eta = vec_mat(self.eta_hat, Einv)
        g = mat_mul(mat_mul(transpose(Einv), self.g_hat), Einv)
        return g, phi, xi, eta


class HyperboloidStructure:
    """Structure induced on the unit pseudosphere of para-Kahler flat space.

    The ambient space is R^(2n+2) with metric G = diag(+1 x (n+1),
    -1 x (n+1)) and the product map J swapping the first and last n+1
    coordinates.  The hypersurface is the quadric
        sum_{A<=n+1} x_A^2 - sum_{A>n+1} x_A^2 = -1,
    parametrized on the patch x_{2n+2} > 0 as a graph over the first
    2n+1 ambient coordinates.  With position field N (G(N,N) = -1) the
    induced structure is
        xi = -J N,   J X = phi X - eta(X) N,   g = G restricted,
    realized pointwise: tangent vectors T_i = d(embedding)/du_i come
    from one extra jet level; g_ij = G(T_i, T_j); eta_i = G(T_i, xi);
    the chart components of phi and xi solve an (m x m) linear system
    with the metric as coefficient matrix.
    """

    def __init__(self, n):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        m = 2 * n + 1
        coords = tuple(f"u{i}" for i in range(1, m + 1))
        self.chart = Chart(coords, tuple((-0.8, 0.8) for _ in range(m)))
        self.ambient_dim = 2 * n + 2

    @property
    def dim(self):
        return self.chart.dim

    def _ambient_metric_sign(self, A):
        return 1.0 if A < self.n + 1 else -1.0

    def ambient_inner(self, u, v):
        return sum(self._ambient_metric_sign(A) * u[A] * v[A]
                   for A in range(self.ambient_dim))

    def ambient_J(self, v):
        half = self.n + 1
        return [v[A + half] for A in range(half)] + [v[A] for A in range(half)]

    def embed(self, xs):
        """Ambient coordinates of the chart point (last one by the graph)."""
        half = self.n + 1
        arg = 1.0
        for i, x in enumerate(xs):
            if i < half:
                arg = arg + x * x
            else:
                arg = arg - x * x
        if value_of(arg) < _MIN_PATCH_MARGIN:
            raise OutsidePatch(
                f"graph-patch argument {value_of(arg):.3e} below "
                f"{_MIN_PATCH_MARGIN:.1e}")
        return list(xs) + [sqrt(arg)]

    def tangent_basis(self, xs):
        """T_i = d(embedding)/du_i, via one extra jet level per direction."""
        m = self.dim
        base_depth = max(depth_of(x) for x in xs) if xs else 0
        level = base_depth + 1
        basis = []
        for i in range(m):
            ys = [Dual(x, 1.0 if j == i else 0.0) for j, x in enumerate(xs)]
            F = self.embed(ys)
            basis.append([fa.t if depth_of(fa) == level else 0.0 for fa in F])
        return basis

    def components(self, xs):
        m = self.dim
        pos = self.embed(xs)
        T = self.tangent_basis(xs)
        xi_amb = [-c for c in self.ambient_J(pos)]
        g = [[self.ambient_inner(T[i], T[j]) for j in range(m)]
             for i in range(m)]
        eta = [self.ambient_inner(T[j], xi_amb) for j in range(m)]
        JT = [self.ambient_J(T[j]) for j in range(m)]
        B = [[self.ambient_inner(T[i], JT[j]) for j in range(m)]
             for i in range(m)]
        rhs = [B[i] + [eta[i]] for i in range(m)]
        sol, _det = gauss_jordan(g, rhs, min_det=_MIN_METRIC_DET,
                                 exc=DegenerateMetric)
        phi = [[sol[k][j] for j in range(m)] for k in range(m)]
        xi = [sol[k][m] for k in range(m)]
        return g, phi, xi, eta

    def quadric_residual(self, point):
        """|G(x,x) + 1| at the embedded point.  Since the position field is
        also the unit normal, this single number witnesses both that the
        point lies on the quadric and that G(N,N) = -1."""
        pos = self.embed(point)
        return abs(self.ambient_inner(pos, pos) + 1.0)


# ---------------------------------------------------------------------------
# Jet extraction of component arrays
# ---------------------------------------------------------------------------

@dataclass
class StructureArrays:
    """Component values and first/second partials of (g, phi, xi, eta)."""

    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    d2xi: np.ndarray
    eta: np.ndarray
    deta: np.ndarray
    d2eta: np.ndarray


def _order_arrays(parts, order):
    g, phi, xi, eta = parts
    pick = lambda e: nth_tangent(e, order)
    return (
        np.array([[pick(e) for e in row] for row in g], dtype=float),
        np.array([[pick(e) for e in row] for row in phi], dtype=float),
        np.array([pick(e) for e in xi], dtype=float),
        np.array([pick(e) for e in eta], dtype=float),
    )


def structure_arrays(structure, point):
    """Evaluate the structure and its partials to second order at a point.

    One plain evaluation supplies the values, m order-1 jet runs the
    first partials, and a full m^2 grid of order-2 runs the second
    partials — every slot independently, so downstream symmetry checks
    (mixed-partial commutation, Christoffel symmetry) exercise the real
    computation instead of a mirrored copy.
    """
    m = len(point)
    g0, phi0, xi0, eta0 = _order_arrays(structure.components(tuple(point)), 0)

    dg = np.empty((m, m, m))
    dphi = np.empty((m, m, m))
    dxi = np.empty((m, m))
    deta = np.empty((m, m))
    for a in range(m):
        parts = structure.components(seed_multi(point, [a]))
        ga, pa, xa, ea = _order_arrays(parts, 1)
        dg[a], dphi[a], dxi[a], deta[a] = ga, pa, xa, ea

    d2g = np.empty((m, m, m, m))
    d2phi = np.empty((m, m, m, m))
    d2xi = np.empty((m, m, m))
    d2eta = np.empty((m, m, m))
    for a in range(m):
        for b in range(m):
            # innermost direction b, outermost a: peeling twice yields
            # d/da d/db of every component
            parts = structure.components(seed_multi(point, [b, a]))
            gab, pab, xab, eab = _order_arrays(parts, 2)
            d2g[a, b], d2phi[a, b], d2xi[a, b], d2eta[a, b] = gab, pab, xab, eab

    return StructureArrays(g0, dg, d2g, phi0, dphi, d2phi,
                           xi0, dxi, d2xi, eta0, deta, d2eta)


def third_metric_derivatives(structure, point):
    """d3g[a,b,c,i,j] = ∂_a ∂_b ∂_c g_ij via a full m^3 grid of order-3 runs."""
    m = len(point)
    d3g = np.empty((m, m, m, m, m))
    for a in range(m):
        for b in range(m):
            for c in range(m):
                g, _phi, _xi, _eta = structure.components(
                    seed_multi(point, [c, b, a]))
                d3g[a, b, c] = [[nth_tangent(e, 3) for e in row] for row in g]
    return d3g


# ---------------------------------------------------------------------------
# Field helpers (values + jacobians as numpy arrays)
# ---------------------------------------------------------------------------

def lie_bracket(X_vals, X_jac, Y_vals, Y_jac):
    """[X,Y]^k = X^a ∂_a Y^k − Y^a ∂_a X^k  (jac[a,k] = ∂_a field^k)."""
    return np.einsum('a,ak->k', X_vals, Y_jac) - np.einsum(
        'a,ak->k', Y_vals, X_jac)


def lie_derivative_11(V_vals, V_jac, T_vals, T_jac):
    """(L_V T)^k_j = V^a ∂_a T^k_j − T^a_j ∂_a V^k + T^k_a ∂_j V^a."""
    return (np.einsum('a,akj->kj', V_vals, T_jac)
            - np.einsum('aj,ak->kj', T_vals, V_jac)
            + np.einsum('ka,ja->kj', T_vals, V_jac))


def d_one_form(jac):
    """Exterior derivative of a 1-form: dω[i,j] = ½(∂_i ω_j − ∂_j ω_i)."""
    return 0.5 * (jac - jac.T)


def d_two_form(jac):
    """Exterior derivative of an antisymmetric 2-form over coordinate fields:
    dΩ[i,j,k] = ⅓(∂_i Ω_jk + ∂_j Ω_ki + ∂_k Ω_ij)."""
    return (jac + np.einsum('jki->ijk', jac) + np.einsum('kij->ijk', jac)) / 3.0


# ---------------------------------------------------------------------------
# PointFrame: one structure frozen at one point
# ---------------------------------------------------------------------------

class PointFrame:
    """All pointwise tensor data of a structure at a single chart point.

    Derived quantities are cached properties computed on demand; nothing
    is symmetrized by fiat — residual checks see the honestly computed
    components.
    """

    def __init__(self, structure, point):
        self.structure = structure
        self.point = tuple(float(x) for x in point)
        self.m = structure.dim
        arrays = structure_arrays(structure, self.point)
        self.g = arrays.g
        self.dg = arrays.dg
        self.d2g = arrays.d2g
        self.phi = arrays.phi
        self.dphi = arrays.dphi
        self.d2phi = arrays.d2phi
        self.xi = arrays.xi
        self.dxi = arrays.dxi
        self.d2xi = arrays.d2xi
        self.eta = arrays.eta
        self.deta = arrays.deta
        self.d2eta = arrays.d2eta

    # -- metric inverses and their derivatives ------------------------------

    @cached_property
    def ginv(self):
        det = np.linalg.det(self.g)
        if abs(det) < _MIN_METRIC_DET:
            raise DegenerateMetric(
                f"|det g| = {abs(det):.3e} below {_MIN_METRIC_DET:.1e} "
                f"at point {self.point}")
        return np.linalg.inv(self.g)

    @cached_property
    def dginv(self):
        return -np.einsum('ij,ajk,kl->ail', self.ginv, self.dg, self.ginv)

    @cached_property
    def d2ginv(self):
        # ∂_a of dginv[b]
        return -(np.einsum('aij,bjk,kl->abil', self.dginv, self.dg, self.ginv)
                 + np.einsum('ij,abjk,kl->abil', self.ginv, self.d2g, self.ginv)
                 + np.einsum('ij,bjk,akl->abil', self.ginv, self.dg, self.dginv))

    # -- Levi-Civita connection ---------------------------------------------

    @cached_property
    def _dg_comb(self):
        # A[i,j,l] = ∂_i g_jl + ∂_j g_il − ∂_l g_ij
        dg = self.dg
        return dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)

    @cached_property
    def _ddg_comb(self):
        d2g = self.d2g
        return d2g + d2g.transpose(0, 2, 1, 3) - d2g.transpose(0, 2, 3, 1)

    @cached_property
    def Gamma(self):
        return 0.5 * np.einsum('kl,ijl->kij', self.ginv, self._dg_comb)

    @cached_property
    def dGamma(self):
        return 0.5 * (np.einsum('akl,ijl->akij', self.dginv, self._dg_comb)
                      + np.einsum('kl,aijl->akij', self.ginv, self._ddg_comb))

    @cached_property
    def d3g(self):
        return third_metric_derivatives(self.structure, self.point)

    @cached_property
    def d2Gamma(self):
        d3 = self.d3g
        d3_comb = d3 + d3.transpose(0, 1, 3, 2, 4) - d3.transpose(0, 1, 3, 4, 2)
        return 0.5 * (
            np.einsum('abkl,ijl->abkij', self.d2ginv, self._dg_comb)
            + np.einsum('bkl,aijl->abkij', self.dginv, self._ddg_comb)
            + np.einsum('akl,bijl->abkij', self.dginv, self._ddg_comb)
            + np.einsum('kl,abijl->abkij', self.ginv, d3_comb))

    # -- curvature ----------------------------------------------------------

    @cached_property
    def Riem(self):
        G = self.Gamma
        return (np.einsum('akbj->kabj', self.dGamma)
                - np.einsum('bkaj->kabj', self.dGamma)
                + np.einsum('kae,ebj->kabj', G, G)
                - np.einsum('kbe,eaj->kabj', G, G))

    @cached_property
    def dRiem(self):
        G, dG = self.Gamma, self.dGamma
        return (np.einsum('cakbj->ckabj', self.d2Gamma)
                - np.einsum('cbkaj->ckabj', self.d2Gamma)
                + np.einsum('ckae,ebj->ckabj', dG, G)
                + np.einsum('kae,cebj->ckabj', G, dG)
                - np.einsum('ckbe,eaj->ckabj', dG, G)
                - np.einsum('kbe,ceaj->ckabj', G, dG))

    @cached_property
    def Ric(self):
        return np.einsum('aayz->yz', self.Riem)

    @cached_property
    def dRic(self):
        return np.einsum('caayz->cyz', self.dRiem)

    @cached_property
    def r(self):
        return float(np.einsum('yz,yz->', self.ginv, self.Ric))

    @cached_property
    def dr(self):
        return (np.einsum('cyz,yz->c', self.dginv, self.Ric)
                + np.einsum('yz,cyz->c', self.ginv, self.dRic))

    @cached_property
    def Ric_star(self):
        return -np.einsum('ak,kayc,cz->yz', self.phi, self.Riem, self.phi)

    @cached_property
    def r_star(self):
        return float(np.einsum('zy,yz->', self.ginv, self.Ric_star))

    # -- covariant derivatives ----------------------------------------------

    def covariant_vector(self, vals, jac):
        """∇V[i,k] = ∂_i V^k + Γ^k_ie V^e."""
        return jac + np.einsum('kie,e->ik', self.Gamma, vals)

    def covariant_covector(self, vals, jac):
        """∇ω[i,j] = ∂_i ω_j − Γ^k_ij ω_k."""
        return jac - np.einsum('kij,k->ij', self.Gamma, vals)

    def covariant_11(self, vals, jac):
        """∇T[i,k,j] = ∂_i T^k_j + Γ^k_ie T^e_j − Γ^e_ij T^k_e."""
        return (jac + np.einsum('kie,ej->ikj', self.Gamma, vals)
                - np.einsum('eij,ke->ikj', self.Gamma, vals))

    def covariant_02(self, vals, jac):
        """∇T[a,y,z] = ∂_a T_yz − Γ^e_ay T_ez − Γ^e_az T_ye."""
        return (jac - np.einsum('eay,ez->ayz', self.Gamma, vals)
                - np.einsum('eaz,ye->ayz', self.Gamma, vals))

    @cached_property
    def nabla_eta(self):
        return self.covariant_covector(self.eta, self.deta)

    @cached_property
    def nabla_xi(self):
        return self.covariant_vector(self.xi, self.dxi)

    @cached_property
    def nabla_phi(self):
        return self.covariant_11(self.phi, self.dphi)

    # -- the h-operator and its covariant derivative ------------------------

    @cached_property
    def h(self):
        """h = ½ (Lie derivative of phi along xi)."""
        return 0.5 * (np.einsum('a,akj->kj', self.xi, self.dphi)
                      - np.einsum('aj,ak->kj', self.phi, self.dxi)
                      + np.einsum('ka,ja->kj', self.phi, self.dxi))

    @cached_property
    def dh(self):
        return 0.5 * (np.einsum('ia,akj->ikj', self.dxi, self.dphi)
                      + np.einsum('a,iakj->ikj', self.xi, self.d2phi)
                      - np.einsum('iaj,ak->ikj', self.dphi, self.dxi)
                      - np.einsum('aj,iak->ikj', self.phi, self.d2xi)
                      + np.einsum('ika,ja->ikj', self.dphi, self.dxi)
                      + np.einsum('ka,ija->ikj', self.phi, self.d2xi))

    @cached_property
    def nabla_h(self):
        return self.covariant_11(self.h, self.dh)

    # -- differential forms --------------------------------------------------

    @cached_property
    def dEta(self):
        """The 2-form dη with the convention dη(X,Y) = ½(Xη(Y) − Yη(X))."""
        return d_one_form(self.deta)

    @cached_property
    def Phi(self):
        """Fundamental 2-form Φ[i,j] = g(e_i, phi e_j)."""
        return np.einsum('ik,kj->ij', self.g, self.phi)

    @cached_property
    def dPhi_partial(self):
        return (np.einsum('aik,kj->aij', self.dg, self.phi)
                + np.einsum('ik,akj->aij', self.g, self.dphi))

    @cached_property
    def dPhi(self):
        return d_two_form(self.dPhi_partial)

    @cached_property
    def ddEta(self):
        """d(dη): must vanish — an engine self-test with real teeth, since
        every partial is computed independently."""
        jac = 0.5 * (self.d2eta - self.d2eta.transpose(0, 2, 1))
        return d_two_form(jac)

    # -- projectors onto the contact distribution ----------------------------

    @cached_property
    def P(self):
        """Projector onto D = ker η along ξ: P = I − ξ⊗η."""
        return np.eye(self.m) - np.outer(self.xi, self.eta)

    @cached_property
    def dP(self):
        return -(np.einsum('ak,j->akj', self.dxi, self.eta)
                 + np.einsum('k,aj->akj', self.xi, self.deta))

    @cached_property
    def Qplus(self):
        """Projector field onto the +1 eigendistribution of phi on D."""
        return 0.5 * (self.P + self.phi)

    @cached_property
    def dQplus(self):
        return 0.5 * (self.dP + self.dphi)

    @cached_property
    def Qminus(self):
        return 0.5 * (self.P - self.phi)

    @cached_property
    def dQminus(self):
        return 0.5 * (self.dP - self.dphi)

    def projected_field(self, proj, dproj, u):
        """Field q ↦ proj(q)·u for constant u: values and jacobian at p."""
        vals = proj @ u
        jac = np.einsum('akb,b->ak', dproj, u)
        return vals, jac

    def phi_applied_field(self, vals, jac):
        """Values and jacobian of q ↦ phi(q)·X(q) given those of X."""
        out_vals = self.phi @ vals
        out_jac = (np.einsum('akb,b->ak', self.dphi, vals)
                   + np.einsum('kb,ab->ak', self.phi, jac))
        return out_vals, out_jac

    # -- curvature scalars ---------------------------------------------------

    def sectional(self, X, Y):
        """Sectional curvature of span(X, Y); the plane must be
        nondegenerate for the pseudo-Riemannian Gram determinant."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        nx, ny = np.linalg.norm(X), np.linalg.norm(Y)
        if nx == 0.0 or ny == 0.0:
            raise DegeneratePlane("zero probe vector")
        X, Y = X / nx, Y / ny
        gXX = X @ self.g @ X
        gYY = Y @ self.g @ Y
        gXY = X @ self.g @ Y
        denom = gXX * gYY - gXY * gXY
        if abs(denom) < _MIN_PLANE_GRAM:
            raise DegeneratePlane(
                f"plane Gram determinant {denom:.3e} below "
                f"{_MIN_PLANE_GRAM:.1e}")
        RXYY = np.einsum('kabj,a,b,j->k', self.Riem, X, Y, Y)
        return float((RXYY @ self.g @ X) / denom)

    def weyl_residual(self):
        """Max-abs component of the Weyl-type obstruction (dim >= 5)."""
        m = self.m
        if m < 5:
            raise WrongDimension("Weyl obstruction needs dimension >= 5")
        n2 = m - 1  # 2n
        ric_op = np.einsum('ke,ex->kx', self.ginv, self.Ric)
        eye = np.eye(m)
        schouten = (np.einsum('yz,kx->kxyz', self.g, ric_op)
                    + np.einsum('yz,kx->kxyz', self.Ric, eye)
                    - np.einsum('xz,ky->kxyz', self.g, ric_op)
                    - np.einsum('xz,ky->kxyz', self.Ric, eye))
        volume = (np.einsum('yz,kx->kxyz', self.g, eye)
                  - np.einsum('xz,ky->kxyz', self.g, eye))
        expected = schouten / (n2 - 1) - (self.r / (n2 * (n2 - 1))) * volume
        return float(np.max(np.abs(self.Riem - expected)))

    def cotton_residual(self):
        """Max-abs component of the third-order conformal-flatness
        obstruction in dimension 3 (needs third metric derivatives)."""
        if self.m != 3:
            raise WrongDimension(
                "the divergence-type obstruction applies in dimension 3 only")
        nabla_ric = self.covariant_02(self.Ric, self.dRic)
        cotton = (nabla_ric - nabla_ric.transpose(2, 1, 0)
                  - 0.25 * (np.einsum('i,jk->ijk', self.dr, self.g)
                            - np.einsum('k,ji->ijk', self.dr, self.g)))
        return float(np.max(np.abs(cotton)))

    def conformal_flatness(self):
        if self.m == 3:
            return self.cotton_residual()
        return self.weyl_residual()

    # -- engine self-test residuals -----------------------------------------

    def metric_symmetry_residual(self):
        return float(np.max(np.abs(self.g - self.g.T)))

    def inverse_identity_residual(self):
        return float(np.max(np.abs(self.g @ self.ginv - np.eye(self.m))))

    def gamma_symmetry_residual(self):
        return float(np.max(np.abs(self.Gamma - self.Gamma.transpose(0, 2, 1))))

    def nabla_g_residual(self):
        nabla_g = (self.dg
                   - np.einsum('eai,ej->aij', self.Gamma, self.g)
                   - np.einsum('eaj,ie->aij', self.Gamma, self.g))
        return float(np.max(np.abs(nabla_g)))

    def bianchi_residual(self):
        """First Bianchi identity, scaled by the curvature magnitude."""
        R = self.Riem
        cyc = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
        scale = max(1.0, float(np.max(np.abs(R))))
        return float(np.max(np.abs(cyc))) / scale

    def riemann_skew_residual(self):
        """g(R(A,B)C, D) + g(R(A,B)D, C), scaled."""
        low = np.einsum('ck,kabj->cabj', self.g, self.Riem)
        scale = max(1.0, float(np.max(np.abs(low))))
        return float(np.max(np.abs(low + low.transpose(3, 1, 2, 0)))) / scale

    def dd_eta_residual(self):
        scale = max(1.0, float(np.max(np.abs(self.d2eta))))
        return float(np.max(np.abs(self.ddEta))) / scale

    def mixed_partial_residual(self):
        """Commutation of independently computed second partials."""
        res = 0.0
        for name in ("d2g", "d2phi", "d2xi", "d2eta"):
            arr = getattr(self, name)
            swap = arr.transpose((1, 0) + tuple(range(2, arr.ndim)))
            scale = max(1.0, float(np.max(np.abs(arr))))
            res = max(res, float(np.max(np.abs(arr - swap))) / scale)
        return res
