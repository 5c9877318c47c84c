"""Dense linear algebra on the real vector space of Hermitian matrices.

Matrices are plain complex numpy arrays. The Hilbert-Schmidt inner product
``<A, B> = Tr[A B]`` is real on Hermitian inputs and is the only inner
product used for spans, complements and projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotDensityMatrixError, NotHermitianError
from .tolerances import EPS_PSD, EPS_RANK, EPS_TRACE


def as_hermitian(M, tol: float = 1e-8) -> np.ndarray:
    """Validate ``M`` as Hermitian and return its exactly symmetrized copy."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.conj().T).max(initial=0.0) > tol * scale:
        raise NotHermitianError("matrix is not Hermitian")
    return (M + M.conj().T) / 2


def as_density(M, psd_tol: float = EPS_PSD, trace_tol: float = EPS_TRACE) -> np.ndarray:
    """Validate ``M`` as a density matrix (PSD, unit trace)."""
    M = as_hermitian(M)
    tr = np.trace(M).real
    if abs(tr - 1.0) > trace_tol:
        raise NotDensityMatrixError(f"trace is {tr!r}, expected 1")
    lam = min_eigenvalue(M)
    if lam < -psd_tol:
        raise NotDensityMatrixError(f"minimum eigenvalue {lam:.3e} is negative")
    return M


def hermitian_part(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return (M + M.conj().T) / 2


def hs_inner(A, B) -> float:
    """Hilbert-Schmidt inner product Tr[A B] of two Hermitian matrices."""
    return float(np.real(np.vdot(np.asarray(A).conj().T, B)))


def hs_norm(A) -> float:
    return float(np.linalg.norm(A))


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def transpose(M) -> np.ndarray:
    """Entrywise transpose in the fixed computational basis."""
    return np.asarray(M).T.copy()


def partial_trace(M, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite matrix on A (x) B.

    ``keep`` names the subsystem that survives ("A" or "B").
    """
    M = np.asarray(M, dtype=complex)
    dA, dB = int(dims[0]), int(dims[1])
    if M.shape != (dA * dB, dA * dB):
        raise DimensionError(f"matrix of shape {M.shape} does not factor as {dA}x{dB}")
    T = M.reshape(dA, dB, dA, dB)
    if keep in ("A", "a", 0):
        return np.einsum("ibjb->ij", T)
    if keep in ("B", "b", 1):
        return np.einsum("aiaj->ij", T)
    raise ValueError(f"unknown subsystem tag {keep!r}")


def min_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def max_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(M))[-1])


def trace_norm(M) -> float:
    return float(np.abs(np.linalg.eigvalsh(hermitian_part(M))).sum())


def trace_distance(A, B) -> float:
    return 0.5 * trace_norm(np.asarray(A) - np.asarray(B))


def psd_sqrt(M) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(M))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def support_projector(M, tol: float = 1e-10) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(M))
    keep = w > tol * max(1.0, w[-1])
    Vk = V[:, keep]
    return Vk @ Vk.conj().T


def d_max(sigma1, sigma2, tol: float = 1e-10) -> float:
    """Max-relative entropy log2 min{lam : lam sigma2 >= sigma1}.

    Returns ``inf`` when the support of sigma1 is not inside that of sigma2.
    """
    w, V = np.linalg.eigh(hermitian_part(sigma2))
    keep = w > tol
    if not keep.any():
        return float("inf")
    Vk = V[:, keep]
    outside = sigma1 - Vk @ (Vk.conj().T @ sigma1 @ Vk) @ Vk.conj().T
    if np.abs(outside).max() > 1e-8:
        return float("inf")
    inv_sqrt = Vk / np.sqrt(w[keep])
    R = inv_sqrt.conj().T @ sigma1 @ inv_sqrt
    return float(np.log2(max_eigenvalue(R)))


def phi_plus(d: int) -> np.ndarray:
    """Unnormalized maximally entangled projector sum_jk |jj><kk|."""
    v = np.eye(d, dtype=complex).reshape(d * d)
    return np.outer(v, v.conj())


def ket(d: int, j: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[j] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# --- bases -----------------------------------------------------------------


@dataclass(frozen=True)
class HermitianBasis:
    """Hilbert-Schmidt orthonormal family of d x d Hermitian matrices."""

    dim: int
    elements: np.ndarray  # shape (k, dim, dim)

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex).reshape(-1, self.dim, self.dim)
        object.__setattr__(self, "elements", els)

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def coords(self, M) -> np.ndarray:
        """Real coordinates <B_i, M> of M along each basis element."""
        if len(self) == 0:
            return np.zeros(0)
        return np.real(np.einsum("kij,ji->k", self.elements, np.asarray(M)))

    def project(self, M) -> np.ndarray:
        """Orthogonal projection of a Hermitian matrix onto the span."""
        if len(self) == 0:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return np.einsum("k,kij->ij", self.coords(M), self.elements)

    def residual(self, M) -> float:
        return hs_norm(np.asarray(M) - self.project(M))

    def gram(self) -> np.ndarray:
        E = _realvecs(self.elements)
        return E @ E.T


def _realvecs(mats) -> np.ndarray:
    """Real vectors whose Euclidean inner products equal Tr[A B] for Hermitian A, B."""
    mats = np.asarray(mats, dtype=complex)
    k = mats.shape[0]
    return np.concatenate([mats.real.reshape(k, -1), mats.imag.reshape(k, -1)], axis=1)


def full_hermitian_basis(d: int) -> HermitianBasis:
    """Orthonormal basis of H_d: diagonal units, then real and imaginary off-diagonals."""
    els = []
    for j in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[j, j] = 1.0
        els.append(E)
    s = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[j, k] = E[k, j] = s
            els.append(E)
            F = np.zeros((d, d), dtype=complex)
            F[j, k] = -1j * s
            F[k, j] = 1j * s
            els.append(F)
    return HermitianBasis(d, np.array(els))


def traceless_basis(d: int) -> HermitianBasis:
    """Orthonormal basis of the traceless Hermitian matrices H_{d,0}."""
    return complement_basis(HermitianBasis(d, np.eye(d, dtype=complex)[None] / np.sqrt(d)))


def orthonormalize(span: Sequence, tol: float = EPS_RANK) -> HermitianBasis:
    """Gram-Schmidt over the reals with residual-norm compression.

    Inputs are unit-normalized first; elements whose residual falls below
    ``tol`` are dropped, so the output cardinality is the real rank.
    """
    mats = [hermitian_part(M) for M in span]
    if not mats:
        raise ValueError("orthonormalize needs a nonempty span")
    d = mats[0].shape[0]
    if any(M.shape != (d, d) for M in mats):
        raise DimensionError("all spanning matrices must share a dimension")
    out: list[np.ndarray] = []
    for M in mats:
        nrm = hs_norm(M)
        if nrm < tol:
            continue
        v = M / nrm
        # two passes of modified Gram-Schmidt
        for _ in range(2):
            for B in out:
                v = v - hs_inner(B, v) * B
        r = hs_norm(v)
        if r < tol:
            continue
        out.append(v / r)
    if not out:
        return HermitianBasis(d, np.zeros((0, d, d), dtype=complex))
    return HermitianBasis(d, np.array(out))


def complement_basis(basis: HermitianBasis, tol: float = EPS_RANK) -> HermitianBasis:
    """Orthonormal basis of the orthogonal complement inside H_d."""
    d = basis.dim
    full = full_hermitian_basis(d)
    if len(basis) == 0:
        return full
    # coordinates of the given basis in the canonical orthonormal basis of H_d
    C = np.array([full.coords(B) for B in basis.elements])  # (k, d^2)
    _, s, Vt = np.linalg.svd(C, full_matrices=True)
    rank = int((s > tol).sum())
    null = Vt[rank:]
    els = np.einsum("kn,nij->kij", null, full.elements) if len(null) else np.zeros((0, d, d))
    return HermitianBasis(d, els)


def concat_bases(*bases: HermitianBasis) -> HermitianBasis:
    d = bases[0].dim
    return HermitianBasis(d, np.concatenate([b.elements for b in bases], axis=0))


def span_rank(mats: Iterable, tol: float = 1e-9) -> int:
    mats = [hermitian_part(M) for M in mats]
    if not mats:
        return 0
    E = _realvecs(np.array(mats))
    s = np.linalg.svd(E, compute_uv=False)
    return int((s > tol * max(1.0, s[0])).sum())


# --- random objects --------------------------------------------------------


def random_density(d: int, rng: np.random.Generator, rank: int | None = None,
                   real: bool = False) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank."""
    k = d if rank is None else rank
    G = rng.normal(size=(d, k))
    if not real:
        G = G + 1j * rng.normal(size=(d, k))
    rho = G @ G.conj().T
    rho = hermitian_part(rho / np.trace(rho).real)
    return rho.astype(complex)


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_density(d, rng, rank=1)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitian_part(G)


def random_probability(d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(d))
