"""Small dense semidefinite programming.

Problems are posed in primal standard form over a block-diagonal Hermitian
variable::

    minimize    sum_b <C_b, X_b>
    subject to  sum_b <A_ib, X_b> = b_i,   X_b >= 0

Complex blocks are realified (X -> [[Re X, -Im X], [Im X, Re X]]) so a single
real symmetric-cone interior-point core serves every caller. Blocks whose
data is entirely real are solved directly over real symmetric matrices,
which is exact because the real part of any feasible point is feasible with
the same objective.

The core is an infeasible-start primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector, with dense
Cholesky factorization of the Schur complement.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import BoundaryAmbiguous, DimensionError, SolverFailure
from .linalg import as_hermitian, min_eigenvalue
from .tolerances import EPS_CERT, EPS_FEAS, EPS_PSD

log = logging.getLogger(__name__)

MAX_ITERS = 200
REFINE_STEPS = 6


class Status(str, Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SdpProblem:
    """Standard-form SDP.

    ``dim`` is either an int (single Hermitian block, matrices given as
    arrays) or a tuple of block sizes (matrices given as per-block lists,
    where ``None`` stands for a zero block).
    """

    dim: int | tuple[int, ...]
    objective: object
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        single = isinstance(self.dim, (int, np.integer))
        self._single = single
        dims = (int(self.dim),) if single else tuple(int(d) for d in self.dim)
        if not dims or any(d <= 0 for d in dims):
            raise DimensionError(f"invalid block dimensions {self.dim!r}")
        self.dims = dims
        self._C = self._blocks(self.objective, "objective")
        cons = []
        for A, bval in self.constraints:
            cons.append((self._blocks(A, "constraint"), float(bval)))
        self._A = cons
        if not cons and all(np.abs(C).max(initial=0.0) == 0 for C in self._C):
            raise ValueError("degenerate problem: no constraints and zero objective")

    def _blocks(self, M, what):
        if self._single:
            M = [M]
        if len(M) != len(self.dims):
            raise DimensionError(f"{what} has {len(M)} blocks, expected {len(self.dims)}")
        out = []
        for Mb, d in zip(M, self.dims):
            if Mb is None:
                out.append(np.zeros((d, d), dtype=complex))
                continue
            Mb = np.asarray(Mb, dtype=complex)
            if Mb.shape != (d, d):
                raise DimensionError(f"{what} block of shape {Mb.shape}, expected {(d, d)}")
            out.append(as_hermitian(Mb))
        return out

    @property
    def n_constraints(self) -> int:
        return len(self._A)

    def to_json(self) -> str:
        from .io import encode_matrix

        def enc(blocks):
            if self._single:
                return encode_matrix(blocks[0])
            return [encode_matrix(B) for B in blocks]

        payload = {
            "dim": self.dims[0] if self._single else list(self.dims),
            "C": enc(self._C),
            "constraints": [{"A": enc(A), "b": b} for A, b in self._A],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "SdpProblem":
        from .io import decode_matrix

        data = json.loads(text)
        single = isinstance(data["dim"], int)

        def dec(x):
            return decode_matrix(x) if single else [decode_matrix(B) for B in x]

        return cls(
            data["dim"] if single else tuple(data["dim"]),
            dec(data["C"]),
            [(dec(c["A"]), c["b"]) for c in data["constraints"]],
        )


@dataclass
class SdpSolution:
    status: Status
    primal_X: object  # array for single-block problems, list of arrays otherwise
    dual_y: np.ndarray
    objective_value: float
    gap: float
    dual_Z: object = None
    dual_objective: float = float("nan")
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    iterations: int = 0
    log: list = field(default_factory=list)
    ray: np.ndarray | None = None  # infeasibility ray in original constraint indexing

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


@dataclass
class FarkasCertificate:
    """Coefficients r with sum_j r_j H_j positive definite."""

    coefficients: np.ndarray
    witness_matrix: np.ndarray
    margin: float


@dataclass
class FeasibilityResult:
    feasible: bool
    t_star: float
    X: np.ndarray | None = None
    certificate: FarkasCertificate | None = None


# --- realification ---------------------------------------------------------


def _realify(M: np.ndarray) -> np.ndarray:
    """Map a Hermitian coefficient matrix so that <out, phi(X)> = Tr[M X]."""
    R, I = M.real, M.imag
    return 0.5 * np.block([[R, -I], [I, R]])


def _unrealify(Y: np.ndarray) -> np.ndarray:
    """Project a real symmetric 2D x 2D matrix back to a D x D Hermitian one."""
    D = Y.shape[0] // 2
    re = 0.5 * (Y[:D, :D] + Y[D:, D:])
    im = 0.5 * (Y[D:, :D] - Y[:D, D:])
    return re + 1j * im


# --- interior-point core ---------------------------------------------------


def _factor(M: np.ndarray) -> np.ndarray:
    """Some L with L L^T = M; Cholesky when possible, eigen-based otherwise."""
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh((M + M.T) / 2)
        w = np.clip(w, 1e-300, None)
        return V * np.sqrt(w)


def _max_step(L: np.ndarray, dM: np.ndarray) -> float:
    """Largest alpha with L L^T + alpha dM still PSD."""
    Li = np.linalg.inv(L)
    S = Li @ dM @ Li.T
    lam = np.linalg.eigvalsh((S + S.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _sym(M):
    return (M + M.T) / 2


class _Core:
    """Real symmetric block SDP solved by a primal-dual interior-point method."""

    def __init__(self, sizes, C, A, b, tol=1e-10, max_iters=MAX_ITERS):
        self.sizes = sizes
        self.C = C              # list of (n, n)
        self.A = A              # list of (m, n, n)
        self.b = b
        self.m = b.shape[0]
        self.N = sum(sizes)
        self.tol = tol
        self.max_iters = max_iters

    def Aop(self, X):
        out = np.zeros(self.m)
        for Ab, Xb in zip(self.A, X):
            out += Ab.reshape(self.m, Xb.size) @ Xb.reshape(-1)
        return out

    def ATop(self, y):
        return [(y @ Ab.reshape(self.m, -1)).reshape(Cb.shape) if self.m else np.zeros_like(Cb)
                for Ab, Cb in zip(self.A, self.C)]

    @staticmethod
    def inner(X, Z):
        return float(sum(np.vdot(Xb, Zb) for Xb, Zb in zip(X, Z)))

    def solve(self):
        m, N = self.m, self.N
        normb = np.linalg.norm(self.b)
        normC = np.sqrt(sum(np.sum(Cb ** 2) for Cb in self.C))
        normA = max((np.sqrt(np.sum(Ab[k] ** 2)) for Ab in self.A for k in range(m)), default=1.0)

        xi = max(1.0, max((1 + abs(bk)) / (1 + normA) for bk in self.b) if m else 1.0)
        eta = max(1.0, (1 + max(normA, normC)) / np.sqrt(N))
        X = [xi * np.eye(n) for n in self.sizes]
        Z = [eta * np.eye(n) for n in self.sizes]
        y = np.zeros(m)

        history = []
        status = Status.NUMERICAL_FAILURE
        best = None
        it = 0
        for it in range(self.max_iters + 1):
            ATy = self.ATop(y)
            rp = self.b - self.Aop(X)
            Rd = [Cb - Ab - Zb for Cb, Ab, Zb in zip(self.C, ATy, Z)]
            mu = self.inner(X, Z) / N
            pobj = self.inner(self.C, X)
            dobj = float(self.b @ y)
            pinf = np.linalg.norm(rp) / (1 + normb)
            dinf = np.sqrt(sum(np.sum(R ** 2) for R in Rd)) / (1 + normC)
            relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
            compl = self.inner(X, Z) / (1 + abs(pobj) + abs(dobj))
            history.append(dict(iter=it, pobj=pobj, dobj=dobj, pinf=pinf, dinf=dinf,
                                mu=mu, gap=relgap))
            err = max(pinf, dinf, relgap, compl)
            # feasibility residuals weigh more than the gap when ranking iterates
            score = max(10 * pinf, 10 * dinf, relgap, compl)
            if best is None or score < best[0]:
                best = (score, [Xb.copy() for Xb in X], y.copy(), [Zb.copy() for Zb in Z])
                best_it = it
            if err <= self.tol:
                status = Status.OPTIMAL
                break
            if it - best_it >= 8:
                log.debug("no progress since iteration %d", best_it)
                break

            # infeasibility rays
            if dobj > 0 and m:
                ray_norm = np.sqrt(sum(np.sum((Cb - R) ** 2) for Cb, R in zip(self.C, Rd)))
                if dobj > 1e8 and ray_norm / dobj < 1e-9:
                    status = Status.PRIMAL_INFEASIBLE
                    break
            if pobj < 0:
                if -pobj > 1e8 and np.linalg.norm(self.b - rp) / (-pobj) < 1e-9:
                    status = Status.DUAL_INFEASIBLE
                    break
            if it == self.max_iters:
                break

            step = None
            for safe in (False, True):
                try:
                    with np.errstate(all="ignore"):
                        step = self._step(X, Z, y, rp, Rd, mu, safe=safe)
                except np.linalg.LinAlgError:
                    step = None
                if step is not None and step[3] >= 1e-12 and np.isfinite(step[1]).all() \
                        and all(np.isfinite(Xb).all() for Xb in step[0]):
                    break
                log.debug("step collapsed at iteration %d (safeguarded=%s)", it, safe)
                step = None
            if step is None:
                break
            X, y, Z, alpha = step

        if status != Status.OPTIMAL and best is not None:
            err, Xb, yb, Zb = best
            if status == Status.NUMERICAL_FAILURE:
                X, y, Z = Xb, yb, Zb
                # accept if within the contract tolerances
                h = history[best_it]
                if max(h["pinf"], h["dinf"]) <= 1e-8 and h["gap"] <= 1e-7:
                    status = Status.OPTIMAL
        return status, X, y, Z, history, it

    def _step(self, X, Z, y, rp, Rd, mu, safe=False):
        m = self.m
        Gs, Ws, lams, Ls, Rs = [], [], [], [], []
        for Xb, Zb in zip(X, Z):
            L = _factor(Xb)
            R = _factor(Zb)
            U, s, _ = np.linalg.svd(L.T @ R)
            s = np.maximum(s, 1e-300)
            G = (L @ U) / np.sqrt(s)
            Gs.append(G)
            Ws.append(G @ G.T)
            lams.append(s)
            Ls.append(L)
            Rs.append(R)

        # Schur complement in Gram form: M_ij = <G^T A_i G, G^T A_j G>
        M = np.zeros((m, m))
        for Ab, G in zip(self.A, Gs):
            if not np.any(Ab):
                continue
            At = (G.T @ Ab @ G).reshape(m, -1)
            M += At @ At.T
        M = (M + M.T) / 2
        if safe:
            # damped Schur complement; refinement below restores the exact step
            M = M + 1e-10 * max(1e-300, np.trace(M) / max(m, 1)) * np.eye(m)
        try:
            cho = cho_factor(M)
            solveM = lambda r: cho_solve(cho, r)
        except (np.linalg.LinAlgError, ValueError):
            reg = 1e-14 * max(1.0, np.abs(M).max())
            Minv = np.linalg.pinv(M + reg * np.eye(m))
            solveM = lambda r: Minv @ r

        WRdW = [W @ R @ W for W, R in zip(Ws, Rd)]

        def direction(Rc):
            base = [rc - wrw for rc, wrw in zip(Rc, WRdW)]
            rhs = rp - self.Aop(base)
            dy = solveM(rhs) if m else np.zeros(0)
            for _ in range(REFINE_STEPS if m else 0):
                # iterative refinement against the exact operator: the
                # primal residual of the step equals rhs - M dy
                dX = [_sym(b + W @ a @ W) for b, W, a in zip(base, Ws, self.ATop(dy))]
                e = rp - self.Aop(dX)
                if np.linalg.norm(e) <= 1e-15 * (1 + np.linalg.norm(rp)):
                    break
                dy = dy + solveM(e)
            ATdy = self.ATop(dy)
            dZ = [_sym(R - a) for R, a in zip(Rd, ATdy)]
            dX = [_sym(rc - W @ dz @ W) for rc, W, dz in zip(Rc, Ws, dZ)]
            return dX, dy, dZ

        # predictor: target V o (dX~ + dZ~) = -V^2, i.e. Rc = -X
        dXa, dya, dZa = direction([-Xb for Xb in X])
        ap = min(1.0, min(_max_step(L, d) for L, d in zip(Ls, dXa)))
        ad = min(1.0, min(_max_step(R, d) for R, d in zip(Rs, dZa)))
        mu_aff = self.inner([Xb + ap * d for Xb, d in zip(X, dXa)],
                            [Zb + ad * d for Zb, d in zip(Z, dZa)]) / self.N
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        if safe:
            sigma = max(sigma, 0.1)

        # corrector
        Rc = []
        for G, lam, dx, dz in zip(Gs, lams, dXa, dZa):
            Gi = np.linalg.inv(G)
            dxs = Gi @ dx @ Gi.T
            dzs = G.T @ dz @ G
            corr = 0.0 if safe else _sym(dxs @ dzs)
            T = sigma * mu * np.eye(len(lam)) - np.diag(lam ** 2) - corr
            Rt = 2 * T / (lam[:, None] + lam[None, :])
            Rc.append(_sym(G @ Rt @ G.T))
        dX, dy, dZ = direction(Rc)

        ap = min(_max_step(L, d) for L, d in zip(Ls, dX))
        ad = min(_max_step(R, d) for R, d in zip(Rs, dZ))
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap = min(1.0, gamma * ap)
        ad = min(1.0, gamma * ad)
        Xn = [_sym(Xb + ap * d) for Xb, d in zip(X, dX)]
        Zn = [_sym(Zb + ad * d) for Zb, d in zip(Z, dZ)]
        yn = y + ad * dy
        return Xn, yn, Zn, min(ap, ad)


# --- public solver ---------------------------------------------------------


def solve(problem: SdpProblem, tol: float = 1e-10) -> SdpSolution:
    """Solve a standard-form SDP; deterministic for identical inputs."""
    dims = problem.dims
    m = problem.n_constraints
    real_block = []
    for k, d in enumerate(dims):
        data = [problem._C[k]] + [A[k] for A, _ in problem._A]
        real_block.append(all(np.abs(M.imag).max(initial=0.0) == 0 for M in data))
    sizes = [d if r else 2 * d for d, r in zip(dims, real_block)]

    def conv(M, k):
        return M.real.copy() if real_block[k] else _realify(M)

    C = [conv(problem._C[k], k) for k in range(len(dims))]
    A_full = [np.array([conv(A[k], k) for A, _ in problem._A]).reshape(m, sizes[k], sizes[k])
              for k in range(len(dims))]
    b = np.array([bv for _, bv in problem._A], dtype=float)

    # reduce to linearly independent constraints with orthonormal rows
    if m:
        Avec = np.concatenate([Ab.reshape(m, -1) for Ab in A_full], axis=1)
        U, s, Vt = np.linalg.svd(Avec, full_matrices=True)
        rank = int((s > 1e-10 * max(1.0, s[0])).sum())
        Ur, sr, Vr = U[:, :rank], s[:rank], Vt[:rank]
        incons = U[:, rank:].T @ b if rank < m else np.zeros(0)
        if incons.size and np.linalg.norm(incons) > 1e-9 * (1 + np.linalg.norm(b)):
            ray = U[:, rank:] @ incons
            zero = [np.zeros((d, d), dtype=complex) for d in dims]
            return SdpSolution(Status.PRIMAL_INFEASIBLE, _out(problem, zero), np.zeros(m),
                               float("nan"), float("nan"), ray=ray)
        b_red = (Ur.T @ b) / sr
        A_red, offset = [], 0
        for n in sizes:
            # singular vectors of small singular values pick up antisymmetric
            # noise, which no symmetric dual slack could ever absorb
            Ab = Vr[:, offset:offset + n * n].reshape(rank, n, n)
            A_red.append((Ab + Ab.transpose(0, 2, 1)) / 2)
            offset += n * n
        back = Ur / sr  # y_original = back @ y_reduced
    else:
        rank = 0
        b_red = np.zeros(0)
        A_red = [np.zeros((0, n, n)) for n in sizes]
        back = np.zeros((0, 0))

    core = _Core(sizes, C, A_red, b_red, tol=tol)
    status, Xr, yr, Zr, history, iters = core.solve()

    y = back @ yr if m else np.zeros(0)
    Xc = [Xb if r else _unrealify(Xb) for Xb, r in zip(Xr, real_block)]
    Xc = [((Xb + Xb.conj().T) / 2).astype(complex) for Xb in Xc]
    Zc = []
    for k in range(len(dims)):
        Zk = problem._C[k] - sum((y[i] * problem._A[i][0][k] for i in range(m)),
                                 np.zeros_like(problem._C[k]))
        Zc.append(Zk)
    pobj = float(sum(np.real(np.vdot(Cb, Xb)) for Cb, Xb in zip(problem._C, Xc)))
    dobj = float(b @ y) if m else 0.0
    res = [sum(np.real(np.vdot(A[k], Xc[k])) for k in range(len(dims))) - bv
           for A, bv in problem._A]
    presid = float(np.max(np.abs(res))) if m else 0.0
    gap = abs(pobj - dobj) / (1 + abs(pobj))
    ray = None
    if status == Status.PRIMAL_INFEASIBLE:
        ray = y / max(abs(dobj), 1e-300)
    sol = SdpSolution(status, _out(problem, Xc), y, pobj, gap, dual_Z=_out(problem, Zc),
                      dual_objective=dobj, primal_residual=presid,
                      dual_residual=history[-1]["dinf"] if history else float("nan"),
                      iterations=iters, log=history, ray=ray)
    log.debug("sdp solve: status=%s iters=%d pobj=%.12g dobj=%.12g", status.value, iters, pobj, dobj)
    return sol


def _out(problem, blocks):
    return blocks[0] if problem._single else blocks


def require_optimal(sol: SdpSolution, what: str = "sdp") -> SdpSolution:
    if sol.status != Status.OPTIMAL:
        raise SolverFailure(f"{what}: solver returned {sol.status.value}", sol)
    return sol


# --- homogeneous feasibility ----------------------------------------------


def max_margin(dims, constraints, c: float, tol: float = 1e-11):
    """Maximize t subject to linear equalities, Tr X = c and X >= t I.

    ``constraints`` is a list of (A, b) in the block format of SdpProblem.
    Substituting X = X' + t I and eliminating t through the trace turns this
    into a standard-form problem in X' >= 0 that is strictly feasible whenever
    the equalities are consistent.

    Returns (t_star, X, y, solution) with y the multipliers of the equality
    constraints, satisfying sum_k y_k A_k <= (N t*/c + sum_k y_k b_k / c) I
    at optimality (N = total dimension).
    """
    single = isinstance(dims, (int, np.integer))
    dlist = [int(dims)] if single else [int(d) for d in dims]
    N = sum(dlist)
    eye = [np.eye(d, dtype=complex) for d in dlist]

    def blocks(A):
        A = [A] if single else A
        return [np.zeros((d, d), dtype=complex) if Ab is None else np.asarray(Ab, dtype=complex)
                for Ab, d in zip(A, dlist)]

    tilde = []
    for A, bval in constraints:
        Ab = blocks(A)
        trA = sum(np.trace(B).real for B in Ab)
        At = [B - (trA / N) * E for B, E in zip(Ab, eye)]
        tilde.append((At if not single else At[0], bval - c * trA / N))
    obj = eye[0] if single else eye
    prob = SdpProblem(dims if single else tuple(dlist), obj, tilde)
    sol = solve(prob, tol=tol)
    return prob, sol, N


def feasibility_homogeneous(H: Sequence, normalization: float = 1.0,
                            tol: float = 1e-11, eps_feas: float = EPS_FEAS
                            ) -> FeasibilityResult:
    """Decide whether some nonzero PSD X satisfies <H_j, X> = 0 for all j.

    Returns a feasible X with Tr X = normalization, or a verified Farkas
    certificate r with sum_j r_j H_j positive definite. ``eps_feas`` is the
    margin below zero still accepted as feasible.
    """
    c = float(normalization)
    if c <= 0:
        raise ValueError("normalization must be positive")
    H = [as_hermitian(Hj) for Hj in H]
    if not H:
        raise ValueError("need at least one constraint matrix")
    D = H[0].shape[0]
    if any(Hj.shape != (D, D) for Hj in H):
        raise DimensionError("all constraint matrices must share a dimension")

    prob, sol, N = max_margin(D, [(Hj, 0.0) for Hj in H], c, tol=tol)

    if sol.status == Status.PRIMAL_INFEASIBLE and sol.ray is not None:
        # inconsistent equalities: sum y_k H~_k = 0 with b~.y > 0
        cert = make_certificate(-sol.ray, H)
        if cert.margin > EPS_CERT:
            return FeasibilityResult(False, -np.inf, None, cert)
        raise SolverFailure("inconsistent constraints but certificate failed to verify", sol)
    if sol.status != Status.OPTIMAL:
        # Either verdict can still be settled soundly: a primal-feasible point
        # with nonnegative margin is a witness of feasibility by itself, and
        # a certificate is checked by its own eigenvalue.
        Xp = sol.primal_X
        if (np.isfinite(Xp).all() and sol.primal_residual <= EPS_FEAS
                and min_eigenvalue(Xp) >= -EPS_PSD):
            t_star = (c - np.trace(Xp).real) / N
            if t_star >= -eps_feas:
                log.debug("accepting primal-feasible point from %s solve", sol.status.value)
                return FeasibilityResult(True, float(t_star), _clean_psd(Xp + t_star * np.eye(D), c))
        if np.isfinite(sol.dual_y).all() and len(sol.dual_y):
            cert = make_certificate(-sol.dual_y, H)
            if cert.margin > EPS_CERT:
                return FeasibilityResult(False, float("nan"), None, cert)
        raise SolverFailure(f"feasibility program: {sol.status.value}", sol)

    Xp = sol.primal_X
    t_star = (c - np.trace(Xp).real) / N
    X = Xp + t_star * np.eye(D)
    if t_star >= -eps_feas:
        return FeasibilityResult(True, float(t_star), _clean_psd(X, c), None)

    cert = make_certificate(-sol.dual_y, H)
    if cert.margin > EPS_CERT:
        return FeasibilityResult(False, float(t_star), None, cert)
    if t_star > -10 * eps_feas:
        raise BoundaryAmbiguous(float(t_star), _clean_psd(X, c), cert)
    raise SolverFailure(f"negative margin t*={t_star:.3e} but certificate margin "
                        f"{cert.margin:.3e} does not verify", sol)


def minimal_face(H: Sequence, normalization: float = 1.0, tol: float = 1e-7):
    """Isometry V whose range holds every PSD X with <H_j, X> = 0 and Tr X = c.

    Repeatedly maximizes the smallest eigenvalue over the current face; a
    zero optimum comes with a dual slack Z >= 0 orthogonal to the whole
    feasible set, so the set lies in the kernel of Z and the search
    restarts there. Returns (V, W) with W a positive definite feasible point
    of the reduced problem in X = V W V^dag.
    """
    c = float(normalization)
    H = [as_hermitian(Hj) for Hj in H]
    D = H[0].shape[0]
    V = np.eye(D, dtype=complex)
    for _ in range(D):
        k = V.shape[1]
        Hr = [as_hermitian(V.conj().T @ Hj @ V) for Hj in H]
        prob, sol, N = max_margin(k, [(Hj, 0.0) for Hj in Hr], c)
        if sol.status == Status.PRIMAL_INFEASIBLE:
            raise ValueError("no PSD point satisfies the constraints")
        require_optimal(sol, "face reduction")
        t_star = (c - np.trace(sol.primal_X).real) / N
        W = sol.primal_X + t_star * np.eye(k)
        if t_star > tol:
            return V, as_hermitian(W)
        if t_star < -tol:
            raise ValueError("no PSD point satisfies the constraints")
        w, U = np.linalg.eigh(as_hermitian(sol.dual_Z))
        keep = w <= 1e-6 * max(1.0, float(np.abs(w).max()))
        if keep.all() or not keep.any():
            log.debug("face reduction stalled at dimension %d", k)
            return V, as_hermitian(W)
        V = V @ U[:, keep]
    return V, as_hermitian(W)


def _clean_psd(X, c):
    X = (X + X.conj().T) / 2
    lam = min_eigenvalue(X)
    if lam < 0:
        X = X - lam * np.eye(X.shape[0])
        X = X * (c / np.trace(X).real)
    return X


def make_certificate(r, H) -> FarkasCertificate:
    r = np.asarray(r, dtype=float)
    scale = np.abs(r).max(initial=0.0)
    if scale > 0:
        r = r / scale
    Wm = sum((rj * Hj for rj, Hj in zip(r, H)), np.zeros_like(np.asarray(H[0], dtype=complex)))
    Wm = (Wm + Wm.conj().T) / 2
    return FarkasCertificate(r, Wm, min_eigenvalue(Wm))


def verify_certificate(cert: FarkasCertificate, H: Sequence) -> bool:
    """Recompute sum_j r_j H_j from scratch and test positive definiteness."""
    r = np.asarray(cert.coefficients, dtype=float)
    if len(r) != len(H):
        raise DimensionError(f"{len(r)} coefficients for {len(H)} constraint matrices")
    scale = np.abs(r).max(initial=0.0)
    if scale == 0:
        return False
    r = r / scale
    D = np.asarray(H[0]).shape[0]
    Wm = np.zeros((D, D), dtype=complex)
    for rj, Hj in zip(r, H):
        Wm += rj * np.asarray(Hj, dtype=complex)
    return min_eigenvalue(Wm) > EPS_CERT
