"""Affine resource theories: free sets, their spans, and dual sets.

A theory is described by free states whose real span V fixes the free set
as V intersected with the density matrices. Everything downstream works
with orthonormal bases of V and its complement, plus a basis of V made of
free density matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import EmptyFreeSet, NotAffine, NotInDualSet, PreconditionViolated
from .io import decode_matrix, encode_matrix
from .linalg import HermitianBasis
from .sdp import SdpProblem, Status, require_optimal, solve

FREE_TOL = 1e-7


# --- specifications --------------------------------------------------------


@dataclass(frozen=True)
class TheorySpec:
    kind: str  # gibbs | coherence | real | twirl | custom
    dim: int
    data: tuple = ()  # matrices: (gamma,), unitaries or generators

    def to_json(self) -> dict:
        if self.kind == "gibbs":
            return {"type": "gibbs", "gamma": encode_matrix(self.data[0])}
        if self.kind in ("coherence", "real"):
            return {"type": self.kind, "dim": self.dim}
        key = "unitaries" if self.kind == "twirl" else "generators"
        return {"type": self.kind, key: [encode_matrix(M) for M in self.data]}

    @classmethod
    def from_json(cls, obj: dict) -> "TheorySpec":
        kind = obj.get("type")
        if kind == "gibbs":
            return gibbs(decode_matrix(obj["gamma"]))
        if kind == "coherence":
            return coherence(int(obj["dim"]))
        if kind in ("real", "real_qm"):
            return real_qm(int(obj["dim"]))
        if kind == "twirl":
            return group_twirl([decode_matrix(U) for U in obj["unitaries"]])
        if kind == "custom":
            return custom([decode_matrix(G) for G in obj["generators"]])
        raise ValueError(f"unknown theory type {kind!r}")


def gibbs(gamma) -> TheorySpec:
    """Athermality: the single free state gamma."""
    gamma = la.as_density(gamma)
    return TheorySpec("gibbs", gamma.shape[0], (gamma,))


def coherence(d: int) -> TheorySpec:
    """Diagonal states in the computational basis."""
    return TheorySpec("coherence", int(d))


def real_qm(d: int) -> TheorySpec:
    """Density matrices with real entries."""
    return TheorySpec("real", int(d))


def group_twirl(unitaries) -> TheorySpec:
    """States invariant under conjugation by every listed unitary."""
    Us = tuple(np.asarray(U, dtype=complex) for U in unitaries)
    if not Us:
        raise EmptyFreeSet("twirl needs at least one unitary")
    d = Us[0].shape[0]
    for U in Us:
        if U.shape != (d, d) or np.abs(U.conj().T @ U - np.eye(d)).max() > 1e-9:
            raise ValueError("twirl elements must be unitaries of a common dimension")
    return TheorySpec("twirl", d, Us)


def all_states(d: int) -> TheorySpec:
    """Every state is free (twirl over the trivial group)."""
    return group_twirl([np.eye(d)])


def custom(generators) -> TheorySpec:
    gens = tuple(la.as_density(G) for G in generators)
    if not gens:
        raise EmptyFreeSet("custom theory needs at least one generator")
    d = gens[0].shape[0]
    if any(G.shape != (d, d) for G in gens):
        raise ValueError("generators must share a dimension")
    return TheorySpec("custom", d, gens)


def z2_swap(d: int) -> list:
    """The group {I, P} with P swapping the first two basis vectors."""
    P = np.eye(d, dtype=complex)
    P[[0, 1]] = P[[1, 0]]
    return [np.eye(d, dtype=complex), P]


# --- theory object ---------------------------------------------------------


@dataclass(frozen=True)
class AffineTheory:
    dim: int
    generators: tuple
    v_basis: HermitianBasis
    v_perp_basis: HermitianBasis
    state_basis: tuple
    max_rank_state: np.ndarray
    contains_maximally_mixed: bool
    kind: str = "custom"
    spec: TheorySpec | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.v_basis)

    @property
    def traceless_v_basis(self) -> HermitianBasis:
        """Orthonormal basis of the trace-zero part of V (spanned by sigma_i - sigma_1)."""
        cached = self.__dict__.get("_v0")
        if cached is None:
            diffs = [s - self.state_basis[0] for s in self.state_basis[1:]]
            cached = la.orthonormalize(diffs) if diffs else HermitianBasis(
                self.dim, np.zeros((0, self.dim, self.dim)))
            object.__setattr__(self, "_v0", cached)
        return cached

    def project(self, M) -> np.ndarray:
        return self.v_basis.project(M)


def _fixed_point_span(unitaries) -> list:
    d = unitaries[0].shape[0]
    full = la.full_hermitian_basis(d)
    # real matrix of the twirl in the orthonormal Hermitian basis
    T = np.zeros((d * d, d * d))
    for k, B in enumerate(full):
        TB = sum(U @ B @ U.conj().T for U in unitaries) / len(unitaries)
        T[:, k] = full.coords(TB)
    _, s, Vt = np.linalg.svd(T - np.eye(d * d))
    kernel = Vt[s < 1e-9]
    return [np.einsum("n,nij->ij", v, full.elements) for v in kernel]


def _generators(spec: TheorySpec):
    d = spec.dim
    if spec.kind in ("gibbs", "custom"):
        return list(spec.data), None
    if spec.kind == "coherence":
        return [la.proj(la.ket(d, j)) for j in range(d)], None
    if spec.kind == "real":
        gens = [la.proj(la.ket(d, j)) for j in range(d)]
        for j in range(d):
            for k in range(j + 1, d):
                gens.append(la.proj(la.ket(d, j) + la.ket(d, k)) / 2)
        return gens, None
    if spec.kind == "twirl":
        return None, _fixed_point_span(list(spec.data))
    raise ValueError(f"unknown theory kind {spec.kind!r}")


def max_rank_free_state(generators, v_basis: HermitianBasis | None = None) -> np.ndarray:
    """A free state of maximal rank.

    The uniform average of the generators has support equal to the union of
    their supports, which is maximal. The SDP route is kept for the case
    where the average loses rank numerically.
    """
    avg = la.hermitian_part(sum(generators) / len(generators))
    union = la.support_projector(sum(generators))
    r_union = int(round(np.trace(union).real))
    if np.linalg.matrix_rank(avg, tol=1e-10) >= r_union or v_basis is None:
        return avg
    d = avg.shape[0]
    perp = la.complement_basis(v_basis)
    # maximize t with sigma in V, Tr sigma = 1 and sigma - t Pi = X >= 0;
    # t lives in an auxiliary 1x1 block
    cons = [([B, None, None], 0.0) for B in perp]
    cons.append(([np.eye(d), None, None], 1.0))
    for E in la.full_hermitian_basis(d):
        cons.append(([E, -E, np.array([[-la.hs_inner(E, union)]])], 0.0))
    prob = SdpProblem((d, d, 1), [None, None, np.array([[-1.0]])], cons)
    sol = require_optimal(solve(prob), "max-rank free state")
    return la.hermitian_part(sol.primal_X[0])


def _density_basis(v_basis: HermitianBasis, gamma: np.ndarray) -> list:
    """Free density matrices spanning V built around the max-rank state gamma."""
    d = gamma.shape[0]
    w, U = np.linalg.eigh(gamma)
    keep = w > 1e-10
    Uk = U[:, keep]
    inv_sqrt = Uk / np.sqrt(w[keep])
    n = len(v_basis)
    for attempt in range(8):
        sigmas = []
        for j, X in enumerate(v_basis):
            R = inv_sqrt.conj().T @ X @ inv_sqrt
            lam = la.min_eigenvalue(R)
            t_max = 1.0 / abs(lam) if lam < 0 else np.inf
            t = min(1.0, 0.5 * t_max)
            # shrink on retries to break accidental linear dependence
            t *= 0.5 ** attempt if attempt and j % 2 else 1.0
            S = gamma + t * X
            S = la.hermitian_part(S / np.trace(S).real)
            sigmas.append(S)
        if la.span_rank(sigmas) == n:
            return sigmas
    raise EmptyFreeSet("could not build a density-matrix basis of the free span")


def build_theory(spec: TheorySpec, verify: bool = False,
                 rng: np.random.Generator | None = None) -> AffineTheory:
    gens, span = _generators(spec)
    d = spec.dim
    if gens is not None:
        if not gens:
            raise EmptyFreeSet("no free states")
        v_basis = la.orthonormalize(gens)
    else:
        v_basis = la.orthonormalize(span)
        if len(v_basis) == 0:
            raise EmptyFreeSet("twirl has no fixed points")
    v_perp = la.complement_basis(v_basis)
    if gens is None:
        # the twirl of I/d is I/d, so the fixed-point set always contains u_d
        gamma = np.eye(d, dtype=complex) / d
    else:
        gamma = max_rank_free_state(gens, v_basis)
    if la.hs_norm(la.hermitian_part(gamma) - v_basis.project(gamma)) > 1e-8:
        raise EmptyFreeSet("max-rank state escaped the free span")
    sigmas = _density_basis(v_basis, gamma)
    generators = tuple(gens) if gens is not None else tuple(sigmas)
    u = np.eye(d, dtype=complex) / d
    theory = AffineTheory(
        dim=d,
        generators=generators,
        v_basis=v_basis,
        v_perp_basis=v_perp,
        state_basis=tuple(sigmas),
        max_rank_state=gamma,
        contains_maximally_mixed=v_basis.residual(u) <= 1e-9,
        kind=spec.kind,
        spec=spec,
    )
    for s in sigmas:
        if not is_free(s, theory):
            raise EmptyFreeSet("density basis element is not free")
    if verify and spec.kind == "custom":
        affine_diagnostic(theory, rng or np.random.default_rng(0))
    return theory


# --- membership ------------------------------------------------------------


def is_free(rho, theory: AffineTheory, tol: float = FREE_TOL) -> bool:
    rho = la.hermitian_part(rho)
    return theory.v_basis.residual(rho) <= tol


def dual_membership(omega, theory: AffineTheory, tol: float = 1e-8) -> bool:
    s1 = theory.state_basis[0]
    return all(abs(la.hs_inner(omega, s - s1)) <= tol for s in theory.state_basis[1:])


def g_value(omega, theory: AffineTheory, tol: float = 1e-7) -> float:
    """Common overlap Tr[omega sigma] of a dual state with the free states."""
    if not dual_membership(omega, theory, tol):
        raise NotInDualSet("state is not in the dual set of the theory")
    return la.hs_inner(omega, theory.state_basis[0])


def dual_constraints(theory: AffineTheory) -> list:
    """Linear equalities (A, b) cutting the dual set out of the density matrices."""
    cons = [(np.eye(theory.dim, dtype=complex), 1.0)]
    cons += [(Z, 0.0) for Z in theory.traceless_v_basis]
    return cons


def sample_dual_state(theory: AffineTheory, direction) -> np.ndarray:
    """Maximizer of Tr[omega direction] over the dual set."""
    d = theory.dim
    D = la.hermitian_part(np.asarray(direction, dtype=complex))
    if np.abs(D).max(initial=0.0) == 0:
        return np.eye(d, dtype=complex) / d
    sol = require_optimal(solve(SdpProblem(d, -D, dual_constraints(theory))), "dual state")
    return _clean_state(sol.primal_X)


def _clean_state(M) -> np.ndarray:
    M = la.hermitian_part(M)
    w, V = np.linalg.eigh(M)
    w = np.clip(w, 0.0, None)
    M = (V * w) @ V.conj().T
    return M / np.trace(M).real


def g_range(theory: AffineTheory) -> tuple[float, float]:
    s1 = theory.state_basis[0]
    d = theory.dim
    cons = dual_constraints(theory)
    lo = require_optimal(solve(SdpProblem(d, s1, cons)), "g range").objective_value
    hi = -require_optimal(solve(SdpProblem(d, -s1, cons)), "g range").objective_value
    lo = min(max(lo, 0.0), 1.0)
    hi = min(max(hi, lo), 1.0)
    return lo, hi


def dual_face(theory: AffineTheory, t: float, tol: float = 1e-7) -> np.ndarray:
    """Isometry V with every dual state of g-value t of the form V W V^dag.

    Inside the g range this is the identity. At an endpoint the states are
    confined to the kernel of the optimal dual slack of the endpoint SDP,
    and restricting to it restores a strictly feasible program.
    """
    s1 = theory.state_basis[0]
    d = theory.dim
    cons = dual_constraints(theory)
    full = np.eye(d, dtype=complex)
    for sign in (1.0, -1.0):
        sol = require_optimal(solve(SdpProblem(d, sign * s1, cons)), "g range")
        if abs(sign * sol.objective_value - t) > tol:
            continue
        w, U = np.linalg.eigh(la.hermitian_part(sol.dual_Z))
        keep = w <= 1e-6 * max(1.0, float(np.abs(w).max()))
        if keep.all():
            return full
        return U[:, keep]
    return full


def double_dual_check(theory: AffineTheory, rng: np.random.Generator | None = None,
                      tol: float = 1e-8) -> bool:
    """Check that the states annihilated by (dual states - u) span exactly V."""
    if not theory.contains_maximally_mixed:
        raise PreconditionViolated("the maximally mixed state is not free")
    rng = rng or np.random.default_rng(0)
    d = theory.dim
    u = np.eye(d, dtype=complex) / d
    cons_basis = la.orthonormalize([np.eye(d)] + list(theory.traceless_v_basis))
    diffs = []
    for _ in range(2 * d * d):
        omega = sample_dual_state(theory, la.random_hermitian(d, rng))
        # remove solver noise along the defining equalities
        omega = omega - cons_basis.project(omega) + cons_basis.project(u)
        diffs.append(omega - u)
    W = la.orthonormalize(diffs, tol=1e-6)
    L = la.complement_basis(W, tol=1e-6) if len(W) else la.full_hermitian_basis(d)
    if len(L) != len(theory.v_basis):
        return False
    return all(theory.v_basis.residual(B) <= tol for B in L) and all(
        L.residual(B) <= tol for B in theory.v_basis)


def affine_diagnostic(theory: AffineTheory, rng: np.random.Generator, samples: int = 20):
    """Reject generator sets whose convex hull misses PSD points of their span."""
    from scipy.optimize import linprog

    gens = list(theory.generators)
    G = la._realvecs(np.array(gens)).T
    A_eq = np.vstack([G, np.ones((1, len(gens)))])
    for _ in range(samples):
        i, j = rng.choice(len(gens), size=2, replace=len(gens) == 1)
        s1, s2 = gens[i], gens[j]
        dm = la.d_max(s1, s2)
        if not np.isfinite(dm):
            continue
        # s2 >= t s1 for t up to 2^-Dmax(s1||s2); push toward that edge
        t = 2.0 ** (-dm) * rng.uniform(0.5, 1.0)
        if t >= 1 - 1e-9:
            continue
        cand = (s2 - t * s1) / (1 - t)
        if la.min_eigenvalue(cand) < -1e-9:
            continue
        b_eq = np.concatenate([la._realvecs(cand[None])[0], [1.0]])
        res = linprog(np.zeros(len(gens)), A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                      method="highs")
        if res.status != 0:
            raise NotAffine("a PSD affine combination of generators lies outside their hull")
