"""Structure conditions as numerical residuals.

Every named condition in the registry evaluates, at one point of one
structure, to a :class:`ConditionValue` holding the worst raw residual
together with its scale.  The scale is ``max(1, infinity-norms of the
formula's summands)``, so ``scaled = raw / scale`` is dimensionless and
insensitive to the overall magnitude of the inputs.

Evaluation policy by scope:

- ``tensor``: the full coordinate-basis residual array is formed (no
  sampling of arguments), and each supplied probe draw additionally
  contracts the vector slots with random vectors, giving extra parts
  with their own raw/scale.
- ``distribution``: like ``tensor`` but the vector slots are first
  composed with the projector P = id - xi (x) eta onto ker(eta), so the
  condition only constrains arguments in the kernel distribution.
- ``field``: the condition involves derivatives of its arguments, so it
  is evaluated on genuine local sections P u (u constant) built from
  the projector field, over all coordinate seed pairs and all probe
  draws.
- ``basis``: evaluated on bracket combinations of computed
  eigendistribution basis fields; probes are not used.
- ``dim3``: like ``tensor`` but defined only in dimension 3; other
  dimensions raise :class:`WrongDimension`.

The classifier combines scaled residuals into three-valued verdicts
(pass / fail / ambiguous) and cross-checks independent formulations of
the same property, raising :class:`InconsistentVerdict` on hard
disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentVerdict, RankDefect, WrongDimension
from .geometry import lie_bracket

__all__ = [
    "CLASS_NAMES",
    "CONDITIONS",
    "CONDITION_IDS",
    "BUNDLES",
    "Condition",
    "ConditionValue",
    "evaluate_condition",
    "expand_checks",
    "classify",
    "eigendistribution_bases",
    "involutivity_residual",
    "nijenhuis_field",
    "normality_field_residual",
    "levi_form",
    "levi_symmetry_residual",
    "h_property_residuals",
]

CLASS_NAMES = (
    "almost_paracontact_metric",
    "paracontact_metric",
    "normal",
    "para_sasakian",
    "almost_para_cosymplectic",
    "para_cr",
    "para_kahler_leaves",
)


@dataclass(frozen=True)
class ConditionValue:
    """Worst residual part of one condition at one point."""

    raw: float
    scale: float
    part: str = ""

    @property
    def scaled(self):
        return self.raw / self.scale


def _norm(arr):
    arr = np.asarray(arr, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


@dataclass(frozen=True)
class _Part:
    name: str
    res: np.ndarray
    terms: tuple
    slots: tuple = ()


def _scalar_part(name, value, *magnitudes):
    """A scalar residual scaled by the given term magnitudes."""
    return _Part(name, np.asarray(float(value)),
                 tuple(np.asarray(float(v)) for v in magnitudes))


def _contract(T, slots, draw):
    """Contract the listed axes of T with successive rows of draw."""
    if T.ndim < len(slots) or not slots:
        return T
    for ax, v in sorted(zip(slots, draw), key=lambda p: -p[0]):
        T = np.tensordot(T, np.asarray(v, dtype=float), axes=([ax], [0]))
    return T


def _best(parts, probes):
    best = None
    for p in parts:
        res = np.asarray(p.res, dtype=float)
        terms = tuple(np.asarray(t, float) for t in p.terms)
        candidates = [(res, terms, p.name)]
        if p.slots:
            for d, draw in enumerate(probes):
                rc = _contract(res, p.slots, draw)
                tc = tuple(_contract(t, p.slots, draw) if t.ndim == res.ndim
                           else t for t in terms)
                candidates.append((rc, tc, f"{p.name}/probe{d}"))
        for r, ts, label in candidates:
            raw = _norm(r)
            scale = max([1.0] + [_norm(t) for t in ts])
            val = ConditionValue(raw=raw, scale=scale, part=label)
            if best is None or val.scaled > best.scaled:
                best = val
    return best


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def _phi_nabla_xi(pf):
    """v[x, a] = (phi nabla_{e_x} xi)^a."""
    return np.einsum('ab,xb->xa', pf.phi, pf.nabla_xi)


def _nphi_kxy(pf):
    """(nabla_{e_x} phi)^k_y arranged as [k, x, y]."""
    return pf.nabla_phi.transpose(1, 0, 2)


def _project_slots(T, P, slots):
    """Compose the listed vector-argument axes of T with the projector."""
    for ax in slots:
        T = np.moveaxis(np.tensordot(T, P, axes=([ax], [0])), -1, ax)
    return T


def _nijenhuis_array(pf):
    """N[k, i, j]: torsion of phi on coordinate fields."""
    return (np.einsum('ai,akj->kij', pf.phi, pf.dphi)
            - np.einsum('aj,aki->kij', pf.phi, pf.dphi)
            - np.einsum('ka,iaj->kij', pf.phi, pf.dphi)
            + np.einsum('ka,jai->kij', pf.phi, pf.dphi))


# ---------------------------------------------------------------------------
# tensor / distribution conditions
# ---------------------------------------------------------------------------

def _cond_axioms(pf, probes):
    m = pf.m
    eye = np.eye(m)
    phi2 = pf.phi @ pf.phi
    bias = np.outer(pf.xi, pf.eta)
    parts = [
        _Part("phi_squared", phi2 - eye + bias, (phi2, eye, bias), (1,)),
        _scalar_part("eta_of_xi", float(pf.eta @ pf.xi) - 1.0,
                     float(pf.eta @ pf.xi), 1.0),
        _Part("phi_xi", pf.phi @ pf.xi,
              (_norm(pf.phi) * _norm(pf.xi),)),
        _Part("eta_phi", pf.eta @ pf.phi,
              (_norm(pf.eta) * _norm(pf.phi),)),
        _Part("eta_metric_dual", pf.eta - pf.g @ pf.xi,
              (pf.eta, pf.g @ pf.xi)),
        _Part("form_skew", pf.Phi + pf.Phi.T, (pf.Phi, pf.Phi.T), (0, 1)),
    ]
    return _best(parts, probes)


def _cond_compat(pf, probes):
    twisted = np.einsum('ai,ab,bj->ij', pf.phi, pf.g, pf.phi)
    bias = np.outer(pf.eta, pf.eta)
    res = twisted + pf.g - bias
    return _best([_Part("compat", res, (twisted, pf.g, bias), (0, 1))], probes)


def _cond_normal(pf, probes):
    N = _nijenhuis_array(pf)
    contact = 2.0 * np.einsum('ij,k->kij', pf.dEta, pf.xi)
    return _best([_Part("normality_tensor", N - contact, (N, contact),
                        (1, 2))], probes)


def _cond_pcm(pf, probes):
    return _best([_Part("form_vs_deta", pf.Phi - pf.dEta,
                        (pf.Phi, pf.dEta), (0, 1))], probes)


def _cond_apcos(pf, probes):
    half = 0.5 * pf.deta
    jac = pf.dPhi_partial
    thirds = (jac / 3.0, jac.transpose(1, 2, 0) / 3.0,
              jac.transpose(2, 0, 1) / 3.0)
    parts = [
        _Part("deta_closed", pf.dEta, (half, half.transpose(1, 0)), (0, 1)),
        _Part("dform_closed", pf.dPhi, thirds, (0, 1, 2)),
    ]
    return _best(parts, probes)


def _cond_news00(pf, probes):
    P = pf.P
    M = P.T @ (pf.dEta @ pf.phi) @ P
    return _best([_Part("levi_symmetry", M - M.T, (M, M.T), (0, 1))], probes)


def _cond_news01(pf, probes):
    P = pf.P
    B = pf.nabla_eta @ pf.phi + pf.phi.T @ pf.nabla_eta
    Bp = P.T @ B @ P
    return _best([_Part("nabla_eta_symmetry", Bp - Bp.T, (Bp, Bp.T),
                        (0, 1))], probes)


def _cond_thm1(pf, probes):
    P = pf.P
    t1 = _nphi_kxy(pf)
    t2 = np.einsum('ax,akb,by->kxy', pf.phi, pf.nabla_phi, pf.phi)
    S = (np.einsum('ya,ax->xy', pf.nabla_eta, pf.phi)
         + np.einsum('ay,ax->xy', pf.phi, pf.nabla_eta))
    t3 = np.einsum('xy,k->kxy', S, pf.xi)
    parts = [_Part("symmetric_nabla_phi",
                   _project_slots(t1 + t2 + t3, P, (1, 2)),
                   tuple(_project_slots(t, P, (1, 2)) for t in (t1, t2, t3)),
                   (1, 2))]
    return _best(parts, probes)


def _reeb_gradient_shape(pf):
    """The common right-hand side g(phi nabla_X xi, Y) xi - eta(Y) phi
    nabla_X xi, as [k, x, y] terms (returned separately)."""
    v = _phi_nabla_xi(pf)
    t2 = -np.einsum('xa,ay,k->kxy', v, pf.g, pf.xi)
    t3 = np.einsum('y,xk->kxy', pf.eta, v)
    return t2, t3


def _cond_jw3d(pf, probes):
    if pf.m != 3:
        raise WrongDimension(
            f"this identity is specific to dimension 3, got {pf.m}")
    t1 = _nphi_kxy(pf)
    t2, t3 = _reeb_gradient_shape(pf)
    return _best([_Part("dim3_nabla_phi", t1 + t2 + t3, (t1, t2, t3),
                        (1, 2))], probes)


def _cond_normal_nabla(pf, probes):
    t1 = np.einsum('ka,xay->kxy', pf.phi, pf.nabla_phi)
    t2 = -np.einsum('ax,aky->kxy', pf.phi, pf.nabla_phi)
    t3 = np.einsum('xy,k->kxy', pf.nabla_eta, pf.xi)
    return _best([_Part("normal_nabla", t1 + t2 + t3, (t1, t2, t3),
                        (1, 2))], probes)


def _cond_wlasn(pf, probes):
    along = np.einsum('i,ik->k', pf.xi, pf.nabla_xi)
    eta_along = np.einsum('i,ij->j', pf.xi, pf.nabla_eta)
    r3 = (np.einsum('ax,ak->kx', pf.phi, pf.nabla_xi)
          - np.einsum('ka,xa->kx', pf.phi, pf.nabla_xi))
    r4 = np.einsum('i,ikj->kj', pf.xi, pf.nabla_phi)
    parts = [
        _Part("reeb_geodesic", along,
              (_norm(pf.xi) * _norm(pf.nabla_xi),)),
        _Part("eta_parallel_along_reeb", eta_along,
              (_norm(pf.xi) * _norm(pf.nabla_eta),)),
        _Part("phi_commutes_with_reeb_gradient", r3,
              (np.einsum('ax,ak->kx', pf.phi, pf.nabla_xi),
               np.einsum('ka,xa->kx', pf.phi, pf.nabla_xi)), (1,)),
        _Part("phi_parallel_along_reeb", r4,
              (_norm(pf.xi) * _norm(pf.nabla_phi),), (1,)),
    ]
    return _best(parts, probes)


def _cond_h_rel(pf, probes):
    t1 = pf.nabla_xi.T
    t2 = pf.phi
    t3 = -pf.phi @ pf.h
    return _best([_Part("reeb_gradient_vs_h", t1 + t2 + t3, (t1, t2, t3),
                        (1,))], probes)


def _cond_lemat(pf, probes):
    t1 = np.einsum('ax,akb,by->kxy', pf.phi, pf.nabla_phi, pf.phi)
    t2 = -_nphi_kxy(pf)
    t3 = -2.0 * np.einsum('xy,k->kxy', pf.g, pf.xi)
    W = np.eye(pf.m) - pf.h + np.outer(pf.xi, pf.eta)
    t4 = np.einsum('y,kx->kxy', pf.eta, W)
    return _best([_Part("twisted_nabla_phi", t1 + t2 + t3 + t4,
                        (t1, t2, t3, t4), (1, 2))], probes)


def _cond_sas(pf, probes):
    t1 = _nphi_kxy(pf)
    t2 = np.einsum('xy,k->kxy', pf.g, pf.xi)
    t3 = -np.einsum('y,kx->kxy', pf.eta, np.eye(pf.m))
    return _best([_Part("defining_equation", t1 + t2 + t3, (t1, t2, t3),
                        (1, 2))], probes)


def _cond_wzor1(pf, probes):
    t1 = _nphi_kxy(pf)
    t2, t3 = _reeb_gradient_shape(pf)
    return _best([_Part("nabla_phi_from_reeb_gradient", t1 + t2 + t3,
                        (t1, t2, t3), (1, 2))], probes)


def _cond_wzorzamk(pf, probes):
    B = np.eye(pf.m) - pf.h
    t1 = _nphi_kxy(pf)
    t2 = np.einsum('ax,ay,k->kxy', B, pf.g, pf.xi)
    t3 = -np.einsum('y,kx->kxy', pf.eta, B)
    return _best([_Part("nabla_phi_from_h", t1 + t2 + t3, (t1, t2, t3),
                        (1, 2))], probes)


def _cond_contparacr(pf, probes):
    B = np.eye(pf.m) - pf.h
    t1 = _nphi_kxy(pf)
    t2 = np.einsum('ax,ay,k->kxy', B, pf.g, pf.xi)
    P = pf.P
    parts = [_Part("kernel_nabla_phi_from_h",
                   _project_slots(t1 + t2, P, (1, 2)),
                   (_project_slots(t1, P, (1, 2)),
                    _project_slots(t2, P, (1, 2))), (1, 2))]
    return _best(parts, probes)


def _cond_dacko(pf, probes):
    along = np.einsum('i,ik->k', pf.xi, pf.nabla_xi)
    r2 = np.einsum('i,ikj->kj', pf.xi, pf.nabla_phi)
    r3 = (np.einsum('ax,ak->kx', pf.phi, pf.nabla_xi)
          + np.einsum('ka,xa->kx', pf.phi, pf.nabla_xi))
    v = _phi_nabla_xi(pf)
    t1 = np.einsum('ax,akb,by->kxy', pf.phi, pf.nabla_phi, pf.phi)
    t2 = -_nphi_kxy(pf)
    t3 = -np.einsum('y,xk->kxy', pf.eta, v)
    parts = [
        _Part("reeb_geodesic", along,
              (_norm(pf.xi) * _norm(pf.nabla_xi),)),
        _Part("phi_parallel_along_reeb", r2,
              (_norm(pf.xi) * _norm(pf.nabla_phi),), (1,)),
        _Part("phi_anticommutes_with_reeb_gradient", r3,
              (np.einsum('ax,ak->kx', pf.phi, pf.nabla_xi),
               np.einsum('ka,xa->kx', pf.phi, pf.nabla_xi)), (1,)),
        _Part("twisted_nabla_phi", t1 + t2 + t3, (t1, t2, t3), (1, 2)),
    ]
    return _best(parts, probes)


def _cond_wzor2(pf, probes):
    t1 = _nphi_kxy(pf)
    t2, t3 = _reeb_gradient_shape(pf)
    return _best([_Part("nabla_phi_from_reeb_gradient", t1 + t2 + t3,
                        (t1, t2, t3), (1, 2))], probes)


def _cond_paracrcos(pf, probes):
    v = _phi_nabla_xi(pf)
    t1 = _nphi_kxy(pf)
    t2 = -np.einsum('xa,ay,k->kxy', v, pf.g, pf.xi)
    P = pf.P
    parts = [_Part("kernel_nabla_phi_from_reeb_gradient",
                   _project_slots(t1 + t2, P, (1, 2)),
                   (_project_slots(t1, P, (1, 2)),
                    _project_slots(t2, P, (1, 2))), (1, 2))]
    return _best(parts, probes)


# ---------------------------------------------------------------------------
# field conditions (need derivatives of their arguments)
# ---------------------------------------------------------------------------

def _field_draws(pf, probes):
    """Coordinate seed pairs plus the supplied probe pairs."""
    m = pf.m
    eye = np.eye(m)
    draws = [(eye[i], eye[j]) for i in range(m) for j in range(i + 1, m)]
    draws += [(draw[0], draw[1]) for draw in probes]
    return draws


def _cond_s0(pf, probes):
    best = None
    for d, (u, v) in enumerate(_field_draws(pf, probes)):
        X = pf.projected_field(pf.P, pf.dP, u)
        Y = pf.projected_field(pf.P, pf.dP, v)
        pX = pf.phi_applied_field(*X)
        pY = pf.phi_applied_field(*Y)
        t1 = float(pf.eta @ lie_bracket(*pX, *Y))
        t2 = float(pf.eta @ lie_bracket(*X, *pY))
        val = ConditionValue(raw=abs(t1 + t2),
                             scale=max(1.0, abs(t1), abs(t2)),
                             part=f"pair{d}")
        if best is None or val.scaled > best.scaled:
            best = val
    return best


def _cond_s1(pf, probes):
    best = None
    for d, (u, v) in enumerate(_field_draws(pf, probes)):
        X = pf.projected_field(pf.P, pf.dP, u)
        Y = pf.projected_field(pf.P, pf.dP, v)
        pX = pf.phi_applied_field(*X)
        pY = pf.phi_applied_field(*Y)
        t1 = lie_bracket(*X, *Y)
        t2 = lie_bracket(*pX, *pY)
        t3 = -pf.phi @ lie_bracket(*X, *pY)
        t4 = -pf.phi @ lie_bracket(*pX, *Y)
        val = ConditionValue(
            raw=_norm(t1 + t2 + t3 + t4),
            scale=max(1.0, _norm(t1), _norm(t2), _norm(t3), _norm(t4)),
            part=f"pair{d}")
        if best is None or val.scaled > best.scaled:
            best = val
    return best


# ---------------------------------------------------------------------------
# eigendistributions and involutivity
# ---------------------------------------------------------------------------

def _distribution_basis(Q, n, label, tol=1e-7):
    """Orthonormal basis of the column space of Q by sequential
    Gram-Schmidt over the coordinate images; RankDefect unless rank n."""
    scale = max(1.0, _norm(Q))
    basis = []
    for j in range(Q.shape[0]):
        v = np.array(Q[:, j], dtype=float)
        for b in basis:
            v -= (b @ v) * b
        nv = float(np.linalg.norm(v))
        if nv > tol * scale:
            basis.append(v / nv)
    if len(basis) != n:
        raise RankDefect(
            f"{label} eigendistribution has pointwise rank {len(basis)}, "
            f"expected {n}")
    return basis


def eigendistribution_bases(pf, tol=1e-7):
    """Bases of the +1 and -1 eigendistributions of phi inside ker(eta)."""
    n = (pf.m - 1) // 2
    plus = _distribution_basis(pf.Qplus, n, "+1", tol)
    minus = _distribution_basis(pf.Qminus, n, "-1", tol)
    return plus, minus


def involutivity_residual(pf, sign):
    """Worst non-tangential component of brackets of basis fields of the
    +1 (sign > 0) or -1 eigendistribution, as a ConditionValue."""
    n = (pf.m - 1) // 2
    if sign > 0:
        Q, dQ, Qop, label = pf.Qplus, pf.dQplus, pf.Qminus, "+1"
    else:
        Q, dQ, Qop, label = pf.Qminus, pf.dQminus, pf.Qplus, "-1"
    basis = _distribution_basis(Q, n, label)
    best = ConditionValue(raw=0.0, scale=1.0, part="trivial")
    for i in range(n):
        for j in range(i + 1, n):
            U = pf.projected_field(Q, dQ, basis[i])
            V = pf.projected_field(Q, dQ, basis[j])
            w = lie_bracket(*U, *V)
            raw = max(abs(float(pf.eta @ w)), _norm(Qop @ w))
            val = ConditionValue(raw=raw, scale=max(1.0, _norm(w)),
                                 part=f"bracket{i}{j}")
            if val.scaled > best.scaled:
                best = val
    return best


def _cond_inv_plus(pf, probes):
    return involutivity_residual(pf, +1)


def _cond_inv_minus(pf, probes):
    return involutivity_residual(pf, -1)


# ---------------------------------------------------------------------------
# curvature identities
# ---------------------------------------------------------------------------

def _cond_k1(pf, probes):
    A = pf.h - np.eye(pf.m)
    phiA = pf.phi @ A
    nh = pf.nabla_h
    D = nh.transpose(1, 0, 2) - nh.transpose(1, 2, 0)
    gD = np.einsum('awx,ay->wxy', D, pf.g)
    gA = np.einsum('ax,ay->xy', A, pf.g)
    gphiA = np.einsum('ax,ay->xy', phiA, pf.g)
    l1 = np.einsum('kwxa,ay->kwxy', pf.Riem, pf.phi)
    l2 = -np.einsum('ka,awxy->kwxy', pf.phi, pf.Riem)
    r1 = -np.einsum('wxy,k->kwxy', gD, pf.xi)
    r2 = -np.einsum('xy,kw->kwxy', gA, phiA)
    r3 = np.einsum('wy,kx->kwxy', gA, phiA)
    r4 = np.einsum('wy,kx->kwxy', gphiA, A)
    r5 = -np.einsum('xy,kw->kwxy', gphiA, A)
    r6 = np.einsum('y,kwx->kwxy', pf.eta, D)
    terms = (l1, l2, r1, r2, r3, r4, r5, r6)
    res = sum(terms)
    return _best([_Part("curvature_vs_h", res, terms, (1, 2, 3))], probes)


def _cond_k2(pf, probes):
    A = pf.h - np.eye(pf.m)
    phiA = pf.phi @ A
    nh = pf.nabla_h
    D = nh.transpose(1, 0, 2) - nh.transpose(1, 2, 0)
    gD = np.einsum('awx,ay->wxy', D, pf.g)
    gphiA = np.einsum('ax,ay->xy', phiA, pf.g)
    gxi = pf.g @ pf.xi
    phih2 = pf.phi @ pf.h @ pf.h
    M = np.einsum('aw,ax->wx', phih2, pf.g)
    l1 = np.einsum('kwxa,ay,k->wxy', pf.Riem, pf.phi, gxi)
    r1 = -gD
    r2 = 2.0 * np.einsum('y,wx->wxy', pf.eta, M)
    r3 = -np.einsum('x,wy->wxy', pf.eta, gphiA)
    r4 = np.einsum('w,xy->wxy', pf.eta, gphiA)
    terms = (l1, r1, r2, r3, r4)
    res = sum(terms)
    return _best([_Part("reeb_component_of_curvature", res, terms,
                        (0, 1, 2))], probes)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    id: str
    summary: str
    scope: str
    fn: object = field(repr=False)


_REGISTRY = (
    Condition("axioms",
              "structure tensor algebra: phi^2 = id - eta (x) xi, "
              "eta(xi) = 1, phi xi = 0, eta o phi = 0, eta = g(., xi), "
              "and skewness of the fundamental form",
              "tensor", _cond_axioms),
    Condition("compat",
              "metric compatibility g(phi X, phi Y) = -g(X,Y) "
              "+ eta(X) eta(Y)",
              "tensor", _cond_compat),
    Condition("normal",
              "vanishing of the normality tensor "
              "[phi,phi](X,Y) - 2 d(eta)(X,Y) xi",
              "tensor", _cond_normal),
    Condition("pcm",
              "contact coupling: the fundamental 2-form equals d(eta)",
              "tensor", _cond_pcm),
    Condition("apcos",
              "closedness of eta and of the fundamental 2-form",
              "tensor", _cond_apcos),
    Condition("s0",
              "eta([phi X, Y] + [X, phi Y]) = 0 for sections X, Y of "
              "ker(eta)",
              "field", _cond_s0),
    Condition("s1",
              "[X,Y] + [phi X, phi Y] = phi([X, phi Y] + [phi X, Y]) for "
              "sections X, Y of ker(eta)",
              "field", _cond_s1),
    Condition("news00",
              "symmetry of (X,Y) -> d(eta)(X, phi Y) on ker(eta)",
              "distribution", _cond_news00),
    Condition("news01",
              "symmetry of (X,Y) -> (nabla_X eta)(phi Y) "
              "+ (nabla_{phi X} eta)(Y) on ker(eta)",
              "distribution", _cond_news01),
    Condition("thm1",
              "(nabla_X phi)Y + (nabla_{phi X} phi)(phi Y) "
              "+ ((nabla_Y eta)(phi X) + (nabla_{phi Y} eta)(X)) xi = 0 "
              "on ker(eta)",
              "distribution", _cond_thm1),
    Condition("jw3d",
              "dimension-3 identity (nabla_X phi)Y "
              "= g(phi nabla_X xi, Y) xi - eta(Y) phi nabla_X xi",
              "dim3", _cond_jw3d),
    Condition("normal-nabla",
              "phi((nabla_X phi)Y) - (nabla_{phi X} phi)Y "
              "+ (nabla_X eta)(Y) xi = 0 (covariant form of normality)",
              "tensor", _cond_normal_nabla),
    Condition("wlasn",
              "nabla_xi xi = 0, nabla_xi eta = 0, nabla_{phi X} xi "
              "= phi nabla_X xi, nabla_xi phi = 0",
              "tensor", _cond_wlasn),
    Condition("h-rel",
              "nabla_X xi = -phi X + phi h X with h = (1/2) L_xi phi",
              "tensor", _cond_h_rel),
    Condition("lemat",
              "(nabla_{phi X} phi)(phi Y) - (nabla_X phi)Y "
              "= 2 g(X,Y) xi - eta(Y)(X - h X + eta(X) xi)",
              "tensor", _cond_lemat),
    Condition("sas",
              "(nabla_X phi)Y = -g(X,Y) xi + eta(Y) X "
              "(defining equation of the para-Sasakian class)",
              "tensor", _cond_sas),
    Condition("wzor1",
              "(nabla_X phi)Y = g(phi nabla_X xi, Y) xi "
              "- eta(Y) phi nabla_X xi (paracontact metric setting)",
              "tensor", _cond_wzor1),
    Condition("wzorzamk",
              "(nabla_X phi)Y = -g(X - h X, Y) xi + eta(Y)(X - h X) "
              "(paracontact metric setting)",
              "tensor", _cond_wzorzamk),
    Condition("contparacr",
              "(nabla_X phi)Y = -g(X - h X, Y) xi for X, Y in ker(eta) "
              "(para-CR test in the paracontact metric setting)",
              "distribution", _cond_contparacr),
    Condition("dacko",
              "nabla_xi xi = 0, nabla_xi phi = 0, nabla_{phi X} xi "
              "= -phi nabla_X xi, and (nabla_{phi X} phi)(phi Y) "
              "= (nabla_X phi)Y + eta(Y) phi nabla_X xi",
              "tensor", _cond_dacko),
    Condition("wzor2",
              "(nabla_X phi)Y = g(phi nabla_X xi, Y) xi "
              "- eta(Y) phi nabla_X xi (almost para-cosymplectic setting)",
              "tensor", _cond_wzor2),
    Condition("paracrcos",
              "(nabla_X phi)Y = g(phi nabla_X xi, Y) xi for X, Y in "
              "ker(eta) (para-CR test in the almost para-cosymplectic "
              "setting)",
              "distribution", _cond_paracrcos),
    Condition("inv-plus",
              "involutivity of the +1 eigendistribution of phi inside "
              "ker(eta)",
              "basis", _cond_inv_plus),
    Condition("inv-minus",
              "involutivity of the -1 eigendistribution of phi inside "
              "ker(eta)",
              "basis", _cond_inv_minus),
    Condition("k1",
              "curvature identity expressing R(W,X)(phi Y) "
              "- phi(R(W,X)Y) through A = h - id, phi A, and the "
              "antisymmetrized covariant derivative of h",
              "tensor", _cond_k1),
    Condition("k2",
              "scalar curvature identity for g(R(W,X)(phi Y), xi) "
              "through covariant derivatives of h",
              "tensor", _cond_k2),
)

CONDITIONS = {c.id: c for c in _REGISTRY}
CONDITION_IDS = tuple(c.id for c in _REGISTRY)

BUNDLES = {
    "para-cr": ("s0", "s1", "inv-plus", "inv-minus", "news00", "news01",
                "thm1"),
}


def evaluate_condition(cond_id, pf, probes=()):
    cond = CONDITIONS.get(cond_id)
    if cond is None:
        raise KeyError(f"unknown condition id {cond_id!r}")
    return cond.fn(pf, probes)


def expand_checks(requested, dim):
    """Expand a check request (list of ids / bundle names, or the string
    'all') into a deduplicated ordered list of condition ids.  'all'
    means every condition applicable in the given dimension."""
    if isinstance(requested, str):
        requested = [requested]
    out = []
    for item in requested:
        item = item.strip()
        if item == "all":
            ids = [c for c in CONDITION_IDS
                   if not (CONDITIONS[c].scope == "dim3" and dim != 3)]
        elif item in BUNDLES:
            ids = list(BUNDLES[item])
        elif item in CONDITIONS:
            ids = [item]
        else:
            raise KeyError(f"unknown check {item!r}")
        for cid in ids:
            if cid not in out:
                out.append(cid)
    return out


# ---------------------------------------------------------------------------
# invariant helpers used by tests and the classifier's callers
# ---------------------------------------------------------------------------

def nijenhuis_field(pf, X, Y):
    """Torsion of phi on the vector fields X, Y given as (values,
    jacobian) pairs: phi^2[X,Y] + [phi X, phi Y] - phi[phi X, Y]
    - phi[X, phi Y]."""
    pX = pf.phi_applied_field(*X)
    pY = pf.phi_applied_field(*Y)
    return (pf.phi @ (pf.phi @ lie_bracket(*X, *Y))
            + lie_bracket(*pX, *pY)
            - pf.phi @ lie_bracket(*pX, *Y)
            - pf.phi @ lie_bracket(*X, *pY))


def normality_field_residual(pf, X, Y):
    """The normality tensor on two fields: nijenhuis - 2 d(eta)(X,Y) xi."""
    w = nijenhuis_field(pf, X, Y)
    return w - 2.0 * float(X[0] @ pf.dEta @ Y[0]) * pf.xi


def levi_form(pf):
    """L(X,Y) = -d(eta)(X, phi Y) with both slots restricted to
    ker(eta), as a coordinate-slot matrix."""
    M = -pf.dEta @ pf.phi
    return pf.P.T @ M @ pf.P


def levi_symmetry_residual(pf):
    L = levi_form(pf)
    return _norm(L - L.T) / max(1.0, _norm(L))


def h_property_residuals(pf):
    """Scaled residuals of the algebraic identities of h on paracontact
    metric structures: g-symmetry, anticommutation with phi,
    tracelessness, h xi = 0, and eta o h = 0."""
    gh = pf.g @ pf.h
    ph = pf.phi @ pf.h
    hp = pf.h @ pf.phi
    hnorm = max(1.0, _norm(pf.h))
    return {
        "g_symmetric": _norm(gh - gh.T) / max(1.0, _norm(gh)),
        "anticommutes_with_phi": _norm(ph + hp)
        / max(1.0, _norm(ph), _norm(hp)),
        "traceless": abs(float(np.trace(pf.h))) / hnorm,
        "kills_reeb": _norm(pf.h @ pf.xi)
        / max(1.0, _norm(pf.h) * _norm(pf.xi)),
        "eta_annihilated": _norm(pf.eta @ pf.h)
        / max(1.0, _norm(pf.eta) * _norm(pf.h)),
    }


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def trit(value, tol, separation):
    """Three-valued verdict for a scaled residual: True below tol, False
    above separation, None in the ambiguous band (or for a None value)."""
    if value is None:
        return None
    if value <= tol:
        return True
    if value >= separation:
        return False
    return None


def _and(*trits):
    """Conjunction: False dominates, then None, else True."""
    if any(t is False for t in trits):
        return False
    if any(t is None for t in trits):
        return None
    return True


def _merge(trits, name):
    """Consensus over independent formulations of one property; hard
    pass-vs-fail disagreement raises InconsistentVerdict."""
    known = [t for t in trits if t is not None]
    if not known:
        return None
    if any(known) and not all(known):
        raise InconsistentVerdict(
            f"independent criteria for {name!r} disagree: "
            f"{[t for t in trits]}")
    return known[0]


def classify(values, tol=1e-6, separation=1e-2):
    """Map per-condition worst scaled residuals to class verdicts.

    ``values`` maps condition ids to scaled residuals; missing ids count
    as unknown.  Returns a dict over CLASS_NAMES with True / False /
    None entries.  Raises InconsistentVerdict when independent
    formulations of the same class give hard opposite verdicts.
    """
    t = {cid: trit(values.get(cid), tol, separation) for cid in CONDITION_IDS}
    apcm = _and(t["axioms"], t["compat"])
    pcm = _and(apcm, t["pcm"])
    normal = t["normal"]
    apcos = _and(apcm, t["apcos"])
    # news00 / news01 are equivalent reformulations of s0 alone (they are
    # identities on any paracontact metric structure), so they feed the s0
    # verdict; full para-CR needs s1 as well.  The three genuinely
    # independent full criteria are (s0 and s1), involutivity of both
    # eigendistributions, and the covariant characterization.
    s0_verdict = _merge([t["s0"], t["news00"], t["news01"]], "s0")
    para_cr = _merge(
        [_and(s0_verdict, t["s1"]),
         _and(t["inv-plus"], t["inv-minus"]),
         t["thm1"]],
        "para_cr")
    para_sasakian = _merge([_and(normal, pcm), t["sas"]], "para_sasakian")
    para_kahler_leaves = _and(apcos, t["wzor2"])
    return {
        "almost_paracontact_metric": apcm,
        "paracontact_metric": pcm,
        "normal": normal,
        "para_sasakian": para_sasakian,
        "almost_para_cosymplectic": apcos,
        "para_cr": para_cr,
        "para_kahler_leaves": para_kahler_leaves,
    }
