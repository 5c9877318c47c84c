"""State conversion under resource non-generating and self-dual channels.

Channels are handled through Choi matrices J = sum_jk E(|j><k|) (x) |j><k|
(output factor first), so E(rho) = Tr_B[J (I (x) rho^T)]. Deciding whether
some free channel maps rho to rho' is a homogeneous SDP feasibility problem;
when it fails, the Farkas coefficients are turned into an explicit witness
matrix that is positive definite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (BoundaryAmbiguous, DimensionError, EmptyFreeSet,
                     InvalidWitnessComponents, SolverFailure)
from .io import encode_matrix, encode_vector
from .linalg import HermitianBasis
from .minentropy import OmegaParams, build_omega, guessing_value, w_value_program
from .sdp import (FarkasCertificate, SdpProblem, Status, feasibility_homogeneous,
                  make_certificate, require_optimal, solve)
from .theory import AffineTheory, is_free
from .tolerances import EPS_CERT, EPS_DECISION, EPS_FEAS

log = logging.getLogger(__name__)

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
BOUNDARY = "Boundary"


# --- Choi matrices ---------------------------------------------------------


@dataclass(frozen=True)
class ChoiMatrix:
    dims: tuple  # (d_out, d_in)
    matrix: np.ndarray

    def __post_init__(self):
        dout, din = (int(x) for x in self.dims)
        M = la.as_hermitian(self.matrix)
        if M.shape != (dout * din, dout * din):
            raise DimensionError(f"Choi of shape {M.shape} does not match dims {(dout, din)}")
        object.__setattr__(self, "dims", (dout, din))
        object.__setattr__(self, "matrix", M)

    @property
    def d_out(self) -> int:
        return self.dims[0]

    @property
    def d_in(self) -> int:
        return self.dims[1]

    def is_valid(self, psd_tol: float = 1e-9, tp_tol: float = EPS_FEAS) -> bool:
        tp = la.partial_trace(self.matrix, self.dims, keep="B")
        return (la.min_eigenvalue(self.matrix) >= -psd_tol
                and np.abs(tp - np.eye(self.d_in)).max() <= tp_tol)


def apply_linear(J: np.ndarray, dims, X) -> np.ndarray:
    """E(X) for any square X, linear extension of the channel."""
    dout, din = dims
    X = np.asarray(X, dtype=complex)
    if X.shape != (din, din):
        raise DimensionError(f"input of shape {X.shape}, channel expects {din}x{din}")
    T = np.asarray(J).reshape(dout, din, dout, din)
    # Tr_B[J (I (x) X^T)]_{ab} = sum_ij J[a,i,b,j] X^T[j,i] = sum_ij J[a,i,b,j] X[i,j]
    return np.einsum("aibj,ij->ab", T, X)


def apply_channel(choi: ChoiMatrix, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (choi.d_in, choi.d_in):
        raise DimensionError("state dimension does not match the channel input")
    return la.hermitian_part(apply_linear(choi.matrix, choi.dims, rho))


def choi_from_map(fn, d_in: int) -> np.ndarray:
    blocks = []
    for j in range(d_in):
        for k in range(d_in):
            Ejk = np.zeros((d_in, d_in), dtype=complex)
            Ejk[j, k] = 1.0
            blocks.append(la.kron(fn(Ejk), Ejk))
    return sum(blocks)


def compose(outer: ChoiMatrix, inner: ChoiMatrix) -> ChoiMatrix:
    """Choi matrix of outer after inner."""
    if outer.d_in != inner.d_out:
        raise DimensionError("channels cannot be composed")
    J = choi_from_map(lambda X: apply_linear(outer.matrix, outer.dims,
                                             apply_linear(inner.matrix, inner.dims, X)),
                      inner.d_in)
    return ChoiMatrix((outer.d_out, inner.d_in), J)


def identity_choi(d: int) -> ChoiMatrix:
    return ChoiMatrix((d, d), la.phi_plus(d))


def replacement_choi(sigma, d_in: int) -> ChoiMatrix:
    sigma = np.asarray(sigma, dtype=complex)
    return ChoiMatrix((sigma.shape[0], d_in), la.kron(sigma, np.eye(d_in)))


def dephasing_choi(d: int) -> ChoiMatrix:
    J = np.zeros((d * d, d * d), dtype=complex)
    for j in range(d):
        J[j * d + j, j * d + j] = 1.0
    return ChoiMatrix((d, d), J)


def unitary_choi(U) -> ChoiMatrix:
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    return ChoiMatrix((d, d), choi_from_map(lambda X: U @ X @ U.conj().T, d))


# --- constraint families ---------------------------------------------------


def _families(rho, rho_out, theory_in: AffineTheory, theory_out: AffineTheory,
              self_dual: bool):
    d, dp = theory_in.dim, theory_out.dim
    rhoT = rho.T
    Id = np.eye(dp * d)
    fam = {}
    Ys = la.traceless_basis(dp)
    fam["a"] = [la.kron(Y, rhoT) - (la.hs_inner(Y, rho_out) / d) * Id for Y in Ys]
    fam["b"] = [la.kron(np.eye(dp), Z) for Z in la.traceless_basis(d)]
    fam["c"] = [la.kron(Y, X.T) for Y in theory_out.v_perp_basis for X in theory_in.v_basis]
    if self_dual:
        fam["d"] = [la.kron(X, Y.T) for X in theory_out.v_basis for Y in theory_in.v_perp_basis]
    return Ys, fam


def constraint_matrices(rho, rho_out, theory_in: AffineTheory, theory_out: AffineTheory,
                        self_dual: bool = False) -> list:
    """The homogeneous constraints on the Choi matrix, in certificate order."""
    _, fam = _families(np.asarray(rho, dtype=complex), np.asarray(rho_out, dtype=complex),
                       theory_in, theory_out, self_dual)
    return [M for key in ("a", "b", "c", "d") if key in fam for M in fam[key]]


def witness_subspace(theory_in: AffineTheory, theory_out: AffineTheory,
                     self_dual: bool = False) -> HermitianBasis:
    """Orthonormal basis of the tensor space the N component must lie in."""
    d, dp = theory_in.dim, theory_out.dim
    els = [la.kron(Y, X.T) for Y in theory_out.v_perp_basis for X in theory_in.v_basis]
    if self_dual:
        els += [la.kron(X, Y.T) for X in theory_out.v_basis for Y in theory_in.v_perp_basis]
    if not els:
        return HermitianBasis(dp * d, np.zeros((0, dp * d, dp * d)))
    return HermitianBasis(dp * d, np.array(els))


# --- certificates ----------------------------------------------------------


@dataclass
class Witness:
    N: np.ndarray
    Y: np.ndarray
    tau: np.ndarray
    margin: float

    def to_json(self) -> dict:
        return {"N": encode_matrix(self.N), "Y": encode_matrix(self.Y),
                "tau": encode_matrix(self.tau), "margin": float(self.margin)}


@dataclass
class ConversionCertificate:
    verdict: str
    w_value: float | None = None
    choi: ChoiMatrix | None = None
    witness: Witness | None = None
    dual_tuple: OmegaParams | None = None
    farkas: FarkasCertificate | None = None
    t_star: float | None = None
    operation_class: str = "rng"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "operation_class": self.operation_class,
               "w_value": None if self.w_value is None else float(self.w_value)}
        if self.t_star is not None:
            out["t_star"] = float(self.t_star)
        if self.choi is not None:
            out["choi"] = encode_matrix(self.choi.matrix)
            out["dims"] = list(self.choi.dims)
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.farkas is not None:
            out["farkas"] = {"coefficients": encode_vector(self.farkas.coefficients),
                             "margin": float(self.farkas.margin)}
        if self.dual_tuple is not None:
            out["dual_tuple"] = {
                "eta": encode_matrix(self.dual_tuple.eta),
                "omegas": [encode_matrix(w) for w in self.dual_tuple.omegas],
                "sigmas": [encode_matrix(s) for s in self.dual_tuple.sigmas],
            }
        return out


def _split(r, fam):
    out, i = {}, 0
    for key in ("a", "b", "c", "d"):
        if key in fam:
            k = len(fam[key])
            out[key] = r[i:i + k]
            i += k
    return out


def reconstruct_witness(r, rho, rho_out, theory_in, theory_out, self_dual=False):
    """(N, Y, tau) with -Tr[Y rho'] I (x) tau + Y (x) rho^T + N = sum_j r_j H_j."""
    d, dp = theory_in.dim, theory_out.dim
    Ys, fam = _families(rho, rho_out, theory_in, theory_out, self_dual)
    parts = _split(np.asarray(r, dtype=float), fam)
    W = sum((c * Y for c, Y in zip(parts["a"], Ys)), np.zeros((dp, dp), dtype=complex))
    Z = sum((c * Zk for c, Zk in zip(parts["b"], la.traceless_basis(d))),
            np.zeros((d, d), dtype=complex))
    D = dp * d
    N = np.zeros((D, D), dtype=complex)
    for key in ("c", "d"):
        if key in parts:
            for c, H in zip(parts[key], fam[key]):
                N += c * H
    gamma = theory_out.max_rank_state
    denom = la.hs_inner(W, gamma - rho_out)
    Wg = la.hs_inner(W, gamma)
    if abs(denom) < 1e-300:
        tau = np.eye(d, dtype=complex) / d
    else:
        tau = (Wg * rho.T - la.hs_inner(W, rho_out) / d * np.eye(d) + Z) / denom
    Y = W - Wg * np.eye(dp)
    return la.hermitian_part(N), la.hermitian_part(Y), la.hermitian_part(tau)


def evaluate_witness(N, Y, tau, rho, rho_out, gamma, theory_in=None, theory_out=None,
                     self_dual: bool = False, tol: float = EPS_FEAS):
    """M = -Tr[Y rho'] I (x) tau + Y (x) rho^T + N and its minimum eigenvalue.

    Preconditions are validated and reported together. The tensor-space
    check on N runs when both theories are supplied.
    """
    N = np.asarray(N, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    rho_out = np.asarray(rho_out, dtype=complex)
    dp, d = Y.shape[0], rho.shape[0]
    failures = []
    if N.shape != (dp * d, dp * d) or tau.shape != (d, d) or rho_out.shape != (dp, dp):
        raise DimensionError("witness components have inconsistent dimensions")
    if abs(la.hs_inner(Y, gamma)) > tol:
        failures.append(f"Tr[Y gamma] = {la.hs_inner(Y, gamma):.3e} is not zero")
    if la.min_eigenvalue(tau) <= 0:
        failures.append("tau is not positive definite")
    if theory_in is not None and theory_out is not None:
        sub = witness_subspace(theory_in, theory_out, self_dual)
        res = sub.residual(la.hermitian_part(N)) if len(sub) else la.hs_norm(N)
        if res > tol:
            failures.append(f"N leaves the admissible tensor space (residual {res:.3e})")
    if failures:
        raise InvalidWitnessComponents(failures)
    M = (-la.hs_inner(Y, rho_out)) * la.kron(np.eye(dp), tau) + la.kron(Y, rho.T) + N
    M = la.hermitian_part(M)
    return M, la.min_eigenvalue(M)


def dual_tuple_from_witness(N, Y, theory_in: AffineTheory, theory_out: AffineTheory):
    """Translate (N, Y) into states (eta, omega_1..omega_n) violating the necessary condition.

    N is expanded as sum_l H_l (x) sigma_l^T over the input density basis;
    the traceless parts of -H_l and -Y are shifted onto u_{d'} after a common
    rescaling that keeps all of them positive semidefinite.
    """
    d, dp = theory_in.dim, theory_out.dim
    sig = list(theory_in.state_basis)
    n = len(sig)
    # Hermitian matrices that are real-independent are complex-independent,
    # so each d x d block of N has unique complex coordinates on sigma_l^T
    S = np.array([s.T.reshape(-1) for s in sig]).T  # (d^2, n)
    T = np.asarray(N).reshape(dp, d, dp, d).transpose(0, 2, 1, 3).reshape(dp * dp, d * d)
    coef = np.linalg.lstsq(S, T.T, rcond=None)[0]  # (n, dp^2)
    H = coef.reshape(n, dp, dp)
    u = np.eye(dp) / dp
    F = [la.hermitian_part(h - np.trace(h).real * u) for h in H]
    Zy = la.hermitian_part(Y - np.trace(Y).real * u)
    lam = max([la.max_eigenvalue(X) for X in F + [Zy]] + [0.0])
    s = 1.0 if lam <= 1.0 / dp else (1.0 / dp) / lam
    omegas = [la.hermitian_part(u - s * X) for X in F]
    eta = la.hermitian_part(u - s * Zy)
    return OmegaParams(eta, tuple(omegas), tuple(sig))


# --- conversion checks -----------------------------------------------------


def _check(rho, theory_in, rho_out, theory_out, self_dual, eps_feas=EPS_FEAS):
    rho = la.as_density(rho)
    rho_out = la.as_density(rho_out)
    if rho.shape[0] != theory_in.dim or rho_out.shape[0] != theory_out.dim:
        raise DimensionError("state dimensions do not match the theories")
    d, dp = theory_in.dim, theory_out.dim
    H = constraint_matrices(rho, rho_out, theory_in, theory_out, self_dual)
    cls = "self_dual" if self_dual else "rng"
    try:
        res = feasibility_homogeneous(H, normalization=d, eps_feas=eps_feas)
    except BoundaryAmbiguous as exc:
        cert = ConversionCertificate(BOUNDARY, t_star=exc.t_star, operation_class=cls)
        if exc.X is not None:
            cert.choi = ChoiMatrix((dp, d), exc.X)
        if exc.certificate is not None:
            cert.farkas = exc.certificate
            N, Y, tau = reconstruct_witness(exc.certificate.coefficients, rho, rho_out,
                                            theory_in, theory_out, self_dual)
            cert.witness = Witness(N, Y, tau, exc.certificate.margin)
        return cert
    if res.feasible:
        X = res.X * (d / np.trace(res.X).real)
        return ConversionCertificate(FEASIBLE, choi=ChoiMatrix((dp, d), X),
                                     t_star=res.t_star, operation_class=cls)
    r = res.certificate.coefficients
    N, Y, tau = reconstruct_witness(r, rho, rho_out, theory_in, theory_out, self_dual)
    cert = ConversionCertificate(INFEASIBLE, farkas=res.certificate, t_star=res.t_star,
                                 operation_class=cls)
    try:
        M, margin = evaluate_witness(N, Y, tau, rho, rho_out, theory_out.max_rank_state)
    except InvalidWitnessComponents:
        if not self_dual:
            raise
        # the extra self-dual family can leave tau indefinite; the Farkas
        # coefficients remain a complete certificate on their own
        log.debug("self-dual certificate has no witness-form decomposition")
        return cert
    cert.witness = Witness(N, Y, tau, margin)
    if not self_dual:
        cert.dual_tuple = dual_tuple_from_witness(N, Y, theory_in, theory_out)
    return cert


def check_rng(rho, theory_in: AffineTheory, rho_out, theory_out: AffineTheory,
              eps_feas: float = EPS_FEAS) -> ConversionCertificate:
    """Decide whether a resource non-generating channel maps rho to rho_out."""
    return _check(rho, theory_in, rho_out, theory_out, self_dual=False, eps_feas=eps_feas)


def check_selfdual(rho, theory_in: AffineTheory, rho_out, theory_out: AffineTheory,
                   eps_feas: float = EPS_FEAS) -> ConversionCertificate:
    """As check_rng, also requiring the adjoint to map V_out into V_in."""
    return _check(rho, theory_in, rho_out, theory_out, self_dual=True, eps_feas=eps_feas)


def verify_choi(choi: ChoiMatrix, rho, rho_out, theory_in, theory_out,
                self_dual: bool = False, tol: float = 1e-6) -> list:
    """Failures of a claimed conversion channel, checked in the inhomogeneous form."""
    fails = []
    if not choi.is_valid():
        fails.append("Choi is not PSD and trace preserving")
    if la.trace_distance(apply_channel(choi, rho), rho_out) > tol:
        fails.append("channel does not reproduce the target state")
    for s in theory_in.state_basis:
        if not is_free(apply_channel(choi, s), theory_out):
            fails.append("a free input state is mapped outside the free set")
            break
    if self_dual:
        adj = [_adjoint(choi, X) for X in theory_out.v_basis]
        if any(theory_in.v_perp_basis.coords(A).__abs__().max(initial=0.0) > tol for A in adj):
            fails.append("adjoint does not map V_out into V_in")
    return fails


def _adjoint(choi: ChoiMatrix, X) -> np.ndarray:
    """E^dag(X) = Tr_A[J (X (x) I)]^T."""
    dout, din = choi.dims
    T = choi.matrix.reshape(dout, din, dout, din)
    return np.einsum("aibj,ba->ij", T, np.asarray(X)).T


def w_value(rho, theory_in: AffineTheory, rho_out, theory_out: AffineTheory) -> float:
    """min over dual tuples of 2^{-H_min} minus the necessary-condition bound."""
    prob = w_value_program(rho, rho_out, theory_in, theory_out)
    return float(require_optimal(solve(prob), "W functional").objective_value)


def w_verdict(w: float) -> str:
    return FEASIBLE if w >= -EPS_DECISION else INFEASIBLE


# --- channel sampling ------------------------------------------------------


def rng_choi_constraints(theory_in: AffineTheory, theory_out: AffineTheory,
                         self_dual: bool = False) -> list:
    d, dp = theory_in.dim, theory_out.dim
    cons = [(la.kron(np.eye(dp), F), np.trace(F).real) for F in la.full_hermitian_basis(d)]
    cons += [(la.kron(Y, X.T), 0.0) for Y in theory_out.v_perp_basis for X in theory_in.v_basis]
    if self_dual:
        cons += [(la.kron(X, Y.T), 0.0) for X in theory_out.v_basis
                 for Y in theory_in.v_perp_basis]
    return cons


def sample_rng_channel(theory_in: AffineTheory, theory_out: AffineTheory, direction=None,
                       self_dual: bool = False) -> ChoiMatrix:
    """Minimizer of <direction, J> over RNG Choi matrices."""
    d, dp = theory_in.dim, theory_out.dim
    D = dp * d
    C = np.zeros((D, D), dtype=complex) if direction is None else la.hermitian_part(direction)
    sol = solve(SdpProblem(D, C, rng_choi_constraints(theory_in, theory_out, self_dual)))
    if sol.status == Status.PRIMAL_INFEASIBLE:
        raise EmptyFreeSet("no free channel between these theories")
    require_optimal(sol, "channel sampling")
    J = la.hermitian_part(sol.primal_X)
    lam = la.min_eigenvalue(J)
    if lam < 0:
        J = J - lam * np.eye(D)
        J = J * (d / np.trace(J).real)
    choi = ChoiMatrix((dp, d), J)
    for s in theory_in.state_basis:
        if not is_free(apply_channel(choi, s), theory_out):
            raise SolverFailure("sampled channel does not preserve the free set")
    return choi


# --- sampled necessary condition -------------------------------------------


def random_dual_state(theory: AffineTheory, rng: np.random.Generator,
                      edge: tuple = (0.5, 1.0)) -> np.ndarray:
    """Random element of the dual set, pushed toward its boundary.

    Dual states are u + X with X traceless and orthogonal to the traceless
    part of V; X is drawn at random and scaled to a random fraction of the
    largest step keeping the matrix PSD.
    """
    d = theory.dim
    u = np.eye(d, dtype=complex) / d
    fixed = la.orthonormalize([np.eye(d)] + list(theory.traceless_v_basis))
    X = la.random_hermitian(d, rng)
    X = X - fixed.project(X)
    if la.hs_norm(X) < 1e-12:
        return u
    lam = la.min_eigenvalue(X)
    s_max = (1.0 / d) / -lam if lam < 0 else 1.0
    s = s_max * rng.uniform(*edge)
    return la.hermitian_part(u + s * X)


@dataclass
class Condition2Report:
    samples: int
    violations: list
    min_slack: float

    @property
    def status(self) -> str:
        return "violated" if self.violations else "no_violation_found"

    def to_json(self) -> dict:
        return {"samples": self.samples, "violations": len(self.violations),
                "min_slack": self.min_slack, "status": self.status}


def condition2_slack(params: OmegaParams, rho, rho_out, theory_out: AffineTheory) -> float:
    """2^{-H_min} minus (Tr[eta rho'] + n g(mean omega)) / (n + 1)."""
    n = params.n
    lhs = guessing_value(build_omega(params, rho)).two_pow_neg_hmin
    g = theory_out.state_basis[0]
    rhs = (la.hs_inner(params.eta, rho_out) + sum(la.hs_inner(w, g) for w in params.omegas)) / (n + 1)
    return float(lhs - rhs)


def check_condition2(rho, rho_out, theory_in: AffineTheory, theory_out: AffineTheory,
                     samples: int = 100, rng: np.random.Generator | None = None,
                     tol: float = EPS_FEAS, extra: list | None = None) -> Condition2Report:
    """Sample dual tuples and report violations of the necessary condition.

    Each violation is a standalone proof that no RNG channel exists; finding
    none is evidence only.
    """
    rng = rng or np.random.default_rng(0)
    sig = tuple(theory_in.state_basis)
    tuples = list(extra or [])
    for _ in range(samples):
        eta = la.random_density(theory_out.dim, rng)
        omegas = tuple(random_dual_state(theory_out, rng) for _ in sig)
        tuples.append(OmegaParams(eta, omegas, sig))
    violations, worst = [], np.inf
    for i, p in enumerate(tuples):
        slack = condition2_slack(p, rho, rho_out, theory_out)
        worst = min(worst, slack)
        if slack < -tol:
            violations.append((i, slack, p))
    return Condition2Report(len(tuples), violations, float(worst))
