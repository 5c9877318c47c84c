"""Resource destroying maps: existence, construction and commutation tests.

A resource destroying map fixes every free state and sends every state into
the free set. When the maximally mixed state is free the only candidate is
the orthogonal projection onto V, so existence reduces to complete
positivity of that projection. Otherwise existence is an SDP feasibility
question about Choi matrices, decided with a Farkas certificate and
cross-checked through the dual subspace formulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .convert import ChoiMatrix, apply_channel, compose
from .errors import EmptyFreeSet, NoRdm, PreconditionViolated
from .io import encode_matrix, encode_vector
from .sdp import FarkasCertificate, Status, feasibility_homogeneous, max_margin, minimal_face
from .theory import AffineTheory
from .tolerances import EPS_FEAS, EPS_PSD


@dataclass
class RdmVerdict:
    exists: bool
    unital: bool
    delta_choi: ChoiMatrix | None = None
    negativity_witness: tuple | None = None  # (eigenvector, eigenvalue)
    farkas: FarkasCertificate | None = None
    cross_check: dict | None = None

    def to_json(self) -> dict:
        out = {"exists": self.exists, "unital": self.unital}
        if self.delta_choi is not None:
            out["delta_choi"] = encode_matrix(self.delta_choi.matrix)
        if self.negativity_witness is not None:
            vec, lam = self.negativity_witness
            out["witness"] = {"eigenvalue": float(lam),
                              "eigenvector": [[float(z.real), float(z.imag)] for z in vec]}
        elif self.farkas is not None:
            out["witness"] = {"coefficients": encode_vector(self.farkas.coefficients),
                              "margin": float(self.farkas.margin),
                              "pd_element": encode_matrix(self.farkas.witness_matrix)}
        if self.cross_check is not None:
            out["cross_check"] = self.cross_check
        return out


def projection_choi(theory: AffineTheory) -> np.ndarray:
    """Choi matrix of the complex-linear extension of X -> sum_j Tr[X_j X] X_j."""
    d = theory.dim
    Xs = theory.v_basis.elements
    J = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            # Tr[X_l |j><k|] = (X_l)[k, j]
            out = np.einsum("l,lab->ab", Xs[:, k, j], Xs)
            Ejk = np.zeros((d, d), dtype=complex)
            Ejk[j, k] = 1.0
            J += la.kron(out, Ejk)
    return la.hermitian_part(J)


def rdm_unital(theory: AffineTheory) -> RdmVerdict:
    if not theory.contains_maximally_mixed:
        raise PreconditionViolated("the maximally mixed state is not free; use rdm_general")
    d = theory.dim
    J = projection_choi(theory)
    w, V = np.linalg.eigh(J)
    if w[0] >= -EPS_PSD:
        return RdmVerdict(True, True, delta_choi=ChoiMatrix((d, d), J))
    return RdmVerdict(False, True, negativity_witness=(V[:, 0], float(w[0])))


# --- general case ----------------------------------------------------------


def _adapted_bases(theory: AffineTheory):
    """Orthonormal bases of V and V-perp whose first elements carry the identity."""
    d = theory.dim
    I = np.eye(d, dtype=complex)
    P = theory.v_basis.project(I)
    Q = I - P
    p = la.hs_inner(P, P)
    q = la.hs_inner(Q, Q)
    if p <= 1e-10:
        raise EmptyFreeSet("V contains no element with positive trace")
    Xs = la.orthonormalize([P] + list(theory.v_basis)).elements
    if q > 1e-10:
        Ys = la.orthonormalize([Q] + list(theory.v_perp_basis)).elements
    else:
        q = 0.0
        Ys = theory.v_perp_basis.elements
    return Xs, Ys, p, q


def rdm_constraints(theory: AffineTheory) -> list:
    """Homogeneous constraint matrices on the Choi matrix of a destroying map.

    With Tr J = d they say: the map is the identity on V, sends V-perp into
    V, and preserves the trace of V-perp elements.
    """
    d = theory.dim
    Xs, Ys, p, q = _adapted_bases(theory)
    r = np.sqrt(q / p)
    Id = np.eye(d * d)
    H = []
    for i, Xi in enumerate(Xs):
        for j, Xj in enumerate(Xs):
            H.append(la.kron(Xi, Xj.T) - (float(i == j) / d) * Id)
    for Yk in Ys:
        for Xi in Xs:
            H.append(la.kron(Yk, Xi.T))
    for Yk in Ys:
        for Yl in Ys:
            H.append(la.kron(Yk, Yl.T))
    for k, Yk in enumerate(Ys):
        shift = (r / d) if (k == 0 and q > 0) else 0.0
        H.append(la.kron(Xs[0], Yk.T) - shift * Id)
    return H


def k_subspace_complement(theory: AffineTheory) -> list:
    """Orthonormal spanning set of W + span{G}, the complement of K."""
    d = theory.dim
    Xs, Ys, p, q = _adapted_bases(theory)
    els = [la.kron(Xj, Yk.T) for Xj in Xs[1:] for Yk in Ys]
    G = sum(la.kron(Xj, Xj.T) for Xj in Xs)
    if q > 0:
        G = G + np.sqrt(q / p) * la.kron(Xs[0], Ys[0].T)
    els.append(G / d)
    return la.orthonormalize(els).elements


def k_route_margin(theory: AffineTheory) -> float:
    """max lambda_min(A) over trace-one A in K; positive iff K holds a PD matrix."""
    d = theory.dim
    cons = [(B, 0.0) for B in k_subspace_complement(theory)]
    prob, sol, N = max_margin(d * d, cons, 1.0)
    if sol.status != Status.OPTIMAL:
        return float("nan")
    return float((1.0 - np.trace(sol.primal_X).real) / N)


def _analytic_center(H, d: int, X0: np.ndarray, iters: int = 50) -> np.ndarray:
    """Maximize log det over {X : <H_j, X> = 0, Tr X = d} starting from X0.

    Falls back to X0 (the central-path point from the solver) when X0 is not
    positive definite, since the region then has no interior.
    """
    D = X0.shape[0]
    if la.min_eigenvalue(X0) <= 1e-9:
        return X0
    full = la.full_hermitian_basis(D)
    A = np.array([full.coords(Hj) for Hj in list(H) + [np.eye(D)]])
    _, s, Vt = np.linalg.svd(A)
    rank = int((s > 1e-10 * s[0]).sum())
    null = Vt[rank:]
    if len(null) == 0:
        return X0
    B = np.einsum("kn,nij->kij", null, full.elements)
    X = X0.copy()
    for _ in range(iters):
        Xi = np.linalg.inv(X)
        g = np.real(np.einsum("kij,ji->k", B, Xi))
        XiB = np.einsum("ij,kjl->kil", Xi, B)
        Hs = np.real(np.einsum("kij,lji->kl", XiB, XiB))
        step = np.linalg.solve(Hs, g)
        dec = float(g @ step)
        if dec < 1e-20:
            break
        t = 1.0
        while t > 1e-8:
            Xn = X + t * np.einsum("k,kij->ij", step, B)
            if la.min_eigenvalue(Xn) > 0:
                break
            t *= 0.5
        X = la.hermitian_part(Xn)
        if dec < 1e-16:
            break
    return X


def rdm_general(theory: AffineTheory, cross_check: bool = True) -> RdmVerdict:
    d = theory.dim
    H = rdm_constraints(theory)
    res = feasibility_homogeneous(H, normalization=d)
    cc = None
    if cross_check:
        km = k_route_margin(theory)
        cc = {"k_margin": km, "agrees": bool((km <= EPS_FEAS) == res.feasible)}
    unital = theory.contains_maximally_mixed
    if not res.feasible:
        return RdmVerdict(False, unital, farkas=res.certificate, cross_check=cc)
    # restrict to the smallest face first so the center is taken over the
    # relative interior even when the region is flat or a single point
    V, W0 = minimal_face(H, normalization=d)
    Hr = [la.hermitian_part(V.conj().T @ Hj @ V) for Hj in H]
    J = la.hermitian_part(V @ _analytic_center(Hr, d, W0) @ V.conj().T)
    return RdmVerdict(True, unital, delta_choi=ChoiMatrix((d, d), J), cross_check=cc)


def rdm(theory: AffineTheory) -> RdmVerdict:
    """Route to the unital construction when available, else the SDP decision."""
    if theory.contains_maximally_mixed:
        return rdm_unital(theory)
    return rdm_general(theory)


def delta_commuting_check(choi: ChoiMatrix, theory: AffineTheory,
                          tol: float = 1e-7) -> bool:
    verdict = rdm(theory)
    if not verdict.exists:
        raise NoRdm("the theory admits no resource destroying map")
    if choi.d_in != choi.d_out or choi.d_in != theory.dim:
        raise PreconditionViolated("commutation needs a channel on the theory's space")
    delta = verdict.delta_choi
    left = compose(delta, choi).matrix
    right = compose(choi, delta).matrix
    return la.hs_norm(left - right) <= tol
