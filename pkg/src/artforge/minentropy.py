"""Conditional min-entropy and the separable-state monotones built on it.

Bipartite matrices live on A (x) B with A the output-side (d') factor.
Values are exchanged as 2^{-H_min}; logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DimensionError, NotInDualSet, PreconditionViolated, TOutOfRange
from .sdp import SdpProblem, require_optimal, solve
from .theory import (AffineTheory, dual_constraints, dual_face, dual_membership, g_range,
                     is_free)


@dataclass(frozen=True)
class BipartiteState:
    dims: tuple
    state: np.ndarray

    def __post_init__(self):
        dA, dB = (int(x) for x in self.dims)
        M = la.as_hermitian(self.state)
        if M.shape != (dA * dB, dA * dB):
            raise DimensionError(f"state of shape {M.shape} does not match dims {(dA, dB)}")
        object.__setattr__(self, "dims", (dA, dB))
        object.__setattr__(self, "state", M)


@dataclass(frozen=True)
class OmegaParams:
    eta: np.ndarray
    omegas: tuple
    sigmas: tuple

    def __post_init__(self):
        if len(self.omegas) != len(self.sigmas):
            raise DimensionError("need as many dual states as free states")
        object.__setattr__(self, "omegas", tuple(self.omegas))
        object.__setattr__(self, "sigmas", tuple(self.sigmas))

    @property
    def n(self) -> int:
        return len(self.omegas)

    def validate(self, theory_sigma: AffineTheory, theory_out: AffineTheory, tol: float = 1e-7):
        for w in self.omegas:
            if not dual_membership(w, theory_out, tol):
                raise NotInDualSet("omega is not a dual state of the output theory")
        for s in self.sigmas:
            if not is_free(s, theory_sigma):
                raise PreconditionViolated("sigma is not free")


@dataclass
class MinEntropyResult:
    two_pow_neg_hmin: float
    method: str
    heuristic: bool = False
    extra: dict | None = None

    @property
    def hmin(self) -> float:
        return float(-np.log2(self.two_pow_neg_hmin))

    def to_json(self) -> dict:
        return {"hmin": self.hmin, "two_pow_neg_hmin": self.two_pow_neg_hmin,
                "method": self.method, "heuristic": self.heuristic}


def _as_state(omega, dims=None) -> BipartiteState:
    if isinstance(omega, BipartiteState):
        return omega
    if dims is None:
        raise DimensionError("dims are required for a bare matrix")
    return BipartiteState(tuple(dims), np.asarray(omega))


# --- constraint assembly ---------------------------------------------------
#
# Every program below dominates a bipartite matrix by scale * I_A (x) tau.
# The slack S = scale I (x) tau - sum(terms) - const is a PSD block and the
# identity is imposed componentwise along an orthonormal basis E_k of H_{dA dB}.


def _basis_tensor(dA: int, dB: int):
    E = la.full_hermitian_basis(dA * dB).elements
    return E, E.reshape(-1, dA, dB, dA, dB)


def _coef_tau(E4):
    """<E_k, I (x) tau> = <Tr_A E_k, tau>."""
    return np.einsum("kaiaj->kij", E4)


def _coef_left(E4, sigma):
    """<E_k, w^T (x) sigma> = <C_k, w> with C_k = (Tr_B[E_k (I (x) sigma)])^T."""
    return np.einsum("kaibj,ji->kba", E4, sigma)


def _coef_right(E4, omega):
    """<E_k, omega^T (x) s> = <C_k, s> with C_k = Tr_A[(omega^T (x) I) E_k]."""
    return np.einsum("kaibj,ab->kij", E4, omega)


def _assemble(E, blocks_coefs, rhs):
    """Constraints <E_k, S> + sum_b <coef_b[k], X_b> = rhs[k]; S is block 0."""
    cons = []
    for k in range(E.shape[0]):
        cons.append(([E[k]] + [None if c is None else c[k] for c in blocks_coefs], rhs[k]))
    return cons


# --- conditional min-entropy -----------------------------------------------


def guessing_value(omega, dims=None) -> MinEntropyResult:
    """2^{-H_min(A|B)} = min Tr tau subject to I_A (x) tau >= Omega."""
    st = _as_state(omega, dims)
    dA, dB = st.dims
    E, E4 = _basis_tensor(dA, dB)
    rhs = -np.real(np.einsum("kij,ji->k", E, st.state))
    cons = _assemble(E, [-_coef_tau(E4)], rhs)
    prob = SdpProblem((dA * dB, dB), [None, np.eye(dB)], cons)
    sol = require_optimal(solve(prob), "min-entropy")
    return MinEntropyResult(float(sol.objective_value), "primal",
                            extra={"tau": sol.primal_X[1]})


def hmin(omega, dims=None) -> float:
    return guessing_value(omega, dims).hmin


def guessing_value_dual(omega, dims=None) -> MinEntropyResult:
    """max Tr[Omega X] over X >= 0 with Tr_A X = I_B.

    X is the (output-first) Choi matrix of a channel from B to A up to a
    transpose, so the optimum is d_A times the best fidelity of
    (id (x) E)(Omega) with the normalized maximally entangled state.
    """
    st = _as_state(omega, dims)
    dA, dB = st.dims
    IA = np.eye(dA)
    cons = [(la.kron(IA, F), np.trace(F).real) for F in la.full_hermitian_basis(dB)]
    sol = require_optimal(solve(SdpProblem(dA * dB, -st.state, cons)), "min-entropy dual")
    return MinEntropyResult(float(-sol.objective_value), "dual", extra={"X": sol.primal_X})


def hmin_dual(omega, dims=None) -> float:
    return guessing_value_dual(omega, dims).hmin


def build_omega(params: OmegaParams, rho) -> BipartiteState:
    """(1/(n+1)) (eta^T (x) rho + sum_l omega_l^T (x) sigma_l)."""
    rho = np.asarray(rho, dtype=complex)
    eta = np.asarray(params.eta, dtype=complex)
    d, dp = rho.shape[0], eta.shape[0]
    for w, s in zip(params.omegas, params.sigmas):
        if np.shape(w) != (dp, dp) or np.shape(s) != (d, d):
            raise DimensionError("omega/sigma dimensions do not match eta/rho")
    M = la.kron(eta.T, rho)
    for w, s in zip(params.omegas, params.sigmas):
        M = M + la.kron(np.asarray(w).T, s)
    return BipartiteState((dp, d), la.hermitian_part(M / (params.n + 1)))


# --- monotones -------------------------------------------------------------


def f_omega(rho, eta, omegas, theory: AffineTheory) -> MinEntropyResult:
    """min over free sigma_l of 2^{-H_min} of the mixed separable state.

    ``theory`` is the free set of the space rho lives in: the input theory
    for input states and the output theory for output states.
    """
    rho = la.as_hermitian(rho)
    eta = la.as_hermitian(eta)
    n = len(omegas)
    d, dp = rho.shape[0], eta.shape[0]
    if theory.dim != d:
        raise DimensionError("theory dimension does not match rho")
    E, E4 = _basis_tensor(dp, d)
    const = la.kron(eta.T, rho)
    rhs = -np.real(np.einsum("kij,ji->k", E, const))
    coefs = [-(n + 1) * _coef_tau(E4)]
    coefs += [_coef_right(E4, np.asarray(w, dtype=complex)) for w in omegas]
    cons = _assemble(E, coefs, rhs)
    sizes = (dp * d, d) + (d,) * n
    # each sigma_l is a free state: unit trace and orthogonal to V-perp
    for ell in range(n):
        blocks = [None] * len(sizes)
        blocks[2 + ell] = np.eye(d)
        cons.append((list(blocks), 1.0))
        for B in theory.v_perp_basis:
            blocks = [None] * len(sizes)
            blocks[2 + ell] = B
            cons.append((list(blocks), 0.0))
    obj = [None, np.eye(d)] + [None] * n
    sol = require_optimal(solve(SdpProblem(sizes, obj, cons)), "f_omega")
    sigmas = [la.hermitian_part(S) for S in sol.primal_X[2:]]
    return MinEntropyResult(float(sol.objective_value), "primal",
                            extra={"sigmas": sigmas, "tau": sol.primal_X[1]})


def _check_t(t, theory_out):
    lo, hi = g_range(theory_out)
    if not (lo - 1e-9 <= t <= hi + 1e-9):
        raise TOutOfRange(f"t = {t} outside the dual range [{lo}, {hi}]")


def _pinned_sigmas(theory_in: AffineTheory, theory_out: AffineTheory, side: str) -> list:
    n = theory_in.n
    if side == "in":
        return list(theory_in.state_basis)
    if side == "out":
        # n free output states, cycling through the output density basis
        basis = theory_out.state_basis
        return [basis[ell % len(basis)] for ell in range(n)]
    raise ValueError(f"side must be 'in' or 'out', got {side!r}")


def _omega_program(rho, eta, sigmas, theory_out: AffineTheory, t=None, rho_out=None,
                   face=None):
    """Shared SDP over (tau, omega_1..omega_n).

    With ``t`` the mean g-value is pinned. With ``rho_out`` eta becomes a
    variable too and the objective subtracts the right-hand side of the
    necessary condition, giving the W functional. ``face`` is an isometry V
    and each omega is then parametrized as V W V^dag.
    """
    rho = np.asarray(rho, dtype=complex)
    n = len(sigmas)
    d = rho.shape[0]
    dp = theory_out.dim
    V = np.eye(dp, dtype=complex) if face is None else np.asarray(face, dtype=complex)
    k = V.shape[1]

    def squeeze(C):
        # <C, V W V^dag> = <V^dag C V, W>
        return np.einsum("ai,...ab,bj->...ij", V.conj(), C, V)

    E, E4 = _basis_tensor(dp, d)
    s_out = theory_out.state_basis[0]
    coefs = [-(n + 1) * _coef_tau(E4)]
    coefs += [squeeze(_coef_left(E4, np.asarray(s, dtype=complex))) for s in sigmas]
    sizes = [dp * d, d] + [k] * n
    obj = [None, np.eye(d)] + [None] * n
    if rho_out is None:
        const = la.kron(np.asarray(eta, dtype=complex).T, rho)
        rhs = -np.real(np.einsum("kij,ji->k", E, const))
    else:
        coefs.append(_coef_left(E4, rho))
        sizes.append(dp)
        rhs = np.zeros(E.shape[0])
        for ell in range(n):
            obj[2 + ell] = -squeeze(s_out) / (n + 1)
        obj.append(-np.asarray(rho_out, dtype=complex) / (n + 1))
    cons = _assemble(E, coefs, rhs)
    nb = len(sizes)
    for ell in range(n):
        for A, b in dual_constraints(theory_out):
            blocks = [None] * nb
            blocks[2 + ell] = squeeze(A)
            cons.append((blocks, b))
    if rho_out is not None:
        blocks = [None] * nb
        blocks[-1] = np.eye(dp)
        cons.append((blocks, 1.0))
    if t is not None:
        blocks = [None] * nb
        for ell in range(n):
            blocks[2 + ell] = squeeze(s_out) / n
        cons.append((blocks, float(t)))
    return SdpProblem(tuple(sizes), obj, cons)


def R_fixed(rho, eta, t, theory_in: AffineTheory, theory_out: AffineTheory,
            side: str = "in") -> MinEntropyResult:
    """R_{eta,t} with sigma_1..sigma_n pinned to a fixed free basis."""
    _check_t(t, theory_out)
    sigmas = _pinned_sigmas(theory_in, theory_out, side)
    return _r_given_sigmas(rho, eta, t, sigmas, theory_out)


def _r_given_sigmas(rho, eta, t, sigmas, theory_out, face=None):
    if face is None:
        face = dual_face(theory_out, t)
    prob = _omega_program(rho, eta, sigmas, theory_out, t=t, face=face)
    sol = require_optimal(solve(prob), "R_{eta,t}")
    omegas = [la.hermitian_part(face @ W @ face.conj().T) for W in sol.primal_X[2:]]
    return MinEntropyResult(float(sol.objective_value), "primal",
                            extra={"omegas": omegas, "sigmas": list(sigmas)})


def sample_free_state(theory: AffineTheory, direction) -> np.ndarray:
    """Maximizer of Tr[sigma direction] over the free states."""
    d = theory.dim
    cons = [(np.eye(d), 1.0)] + [(B, 0.0) for B in theory.v_perp_basis]
    sol = require_optimal(solve(SdpProblem(d, -la.hermitian_part(direction), cons)),
                          "free state")
    S = la.hermitian_part(sol.primal_X)
    return S / np.trace(S).real


def R_full(rho, eta, t, theory_in: AffineTheory, theory_out: AffineTheory,
           side: str = "in", restarts: int = 3, rng: np.random.Generator | None = None,
           max_rounds: int = 50) -> MinEntropyResult:
    """Heuristic upper bound on R_{eta,t} by alternating minimization.

    Restart 0 starts from the pinned basis, so the result never exceeds
    R_fixed; further restarts start from random free states.
    """
    _check_t(t, theory_out)
    rng = rng or np.random.default_rng(0)
    free = theory_in if side == "in" else theory_out
    n = theory_in.n
    face = dual_face(theory_out, t)
    best = None
    for r in range(max(1, restarts)):
        if r == 0:
            sigmas = _pinned_sigmas(theory_in, theory_out, side)
        else:
            sigmas = [sample_free_state(free, la.random_hermitian(free.dim, rng))
                      for _ in range(n)]
        value = np.inf
        for _ in range(max_rounds):
            res = _r_given_sigmas(rho, eta, t, sigmas, theory_out, face)
            res2 = f_omega(rho, eta, res.extra["omegas"], free)
            new = res2.two_pow_neg_hmin
            sigmas = res2.extra["sigmas"]
            if value - new < 1e-7 * max(1.0, abs(value)):
                value = min(value, new)
                break
            value = new
        value = min(value, res.two_pow_neg_hmin)
        if best is None or value < best:
            best = value
    return MinEntropyResult(float(best), "alternating", heuristic=True)


def w_value_program(rho, rho_out, theory_in: AffineTheory, theory_out: AffineTheory):
    return _omega_program(rho, None, list(theory_in.state_basis), theory_out,
                          rho_out=rho_out)
