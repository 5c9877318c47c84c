"""Brute-force classical references used to cross-check the quantum code.

Everything here is deliberately elementary: sorted partial sums, Lorenz
curves compared at their breakpoints, a stochastic-matrix feasibility
problem and the two-outcome discrimination formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DimensionError
from .sdp import Status, max_margin

MAJ_TOL = 1e-10
LORENZ_TOL = 1e-9
LP_TOL = 1e-8


def _prob(p, name="p") -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or (p < -MAJ_TOL).any() or abs(p.sum() - 1) > MAJ_TOL:
        raise ValueError(f"{name} is not a probability vector")
    return np.clip(p, 0.0, None)


def _gibbs(g, name="gamma") -> np.ndarray:
    g = np.asarray(g, dtype=float).ravel()
    if (g <= 0).any():
        raise ValueError(f"{name} must be strictly positive")
    return g / g.sum()


def majorizes(p, q) -> bool:
    """True when p majorizes q: sorted partial sums of p dominate those of q."""
    p, q = _prob(p), _prob(q, "q")
    if p.shape != q.shape:
        raise DimensionError(f"length mismatch: {p.size} vs {q.size}")
    sp = np.cumsum(np.sort(p)[::-1])
    sq = np.cumsum(np.sort(q)[::-1])
    return bool((sp >= sq - MAJ_TOL).all())


@dataclass
class LorenzCurve:
    points: np.ndarray  # rows (x, y), from (0, 0) to (1, 1)

    def __call__(self, x):
        return np.interp(x, self.points[:, 0], self.points[:, 1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self.points[:, 0]


def lorenz_curve(p, gamma) -> LorenzCurve:
    """Thermo-majorization curve: order by decreasing p_i / gamma_i and accumulate."""
    p, g = _prob(p), _gibbs(gamma)
    if p.shape != g.shape:
        raise DimensionError(f"length mismatch: {p.size} vs {g.size}")
    order = np.argsort(-(p / g), kind="stable")
    x = np.concatenate([[0.0], np.cumsum(g[order])])
    y = np.concatenate([[0.0], np.cumsum(p[order])])
    x[-1] = y[-1] = 1.0
    return LorenzCurve(np.column_stack([x, y]))


def thermo_majorizes(p, gamma_in, q, gamma_out) -> bool:
    """True when the curve of (p, gamma_in) is nowhere below that of (q, gamma_out)."""
    a, b = lorenz_curve(p, gamma_in), lorenz_curve(q, gamma_out)
    xs = np.union1d(a.breakpoints, b.breakpoints)
    return bool((a(xs) >= b(xs) - LORENZ_TOL).all())


def classical_conversion_lp(p, gamma_in, q, gamma_out) -> bool:
    """Is there a column-stochastic S >= 0 with S p = q and S gamma_in = gamma_out?

    The entries of S are the 1x1 blocks of a diagonal SDP. We maximize the
    smallest entry of S with its total fixed to the number of columns, so a
    nonnegative optimum means a stochastic solution exists.
    """
    p, g = _prob(p), _gibbs(gamma_in)
    q, h = _prob(q, "q"), _gibbs(gamma_out, "gamma_out")
    if p.shape != g.shape or q.shape != h.shape:
        raise DimensionError("probability and Gibbs vectors must match in length")
    dout, din = q.size, p.size
    nvar = dout * din

    def row(coef):
        # coef is a dout x din array of weights on S
        return [np.array([[c]]) for c in coef.ravel()]

    cons = []
    for i in range(dout):
        for vec, target in ((p, q[i]), (g, h[i])):
            coef = np.zeros((dout, din))
            coef[i] = vec
            cons.append((row(coef), float(target)))
    for j in range(din):
        coef = np.zeros((dout, din))
        coef[:, j] = 1.0
        cons.append((row(coef), 1.0))
    _, sol, N = max_margin(tuple([1] * nvar), cons, float(din))
    if sol.status == Status.PRIMAL_INFEASIBLE:
        return False
    if sol.status != Status.OPTIMAL:
        return False
    total = sum(np.trace(B).real for B in sol.primal_X)
    t_star = (din - total) / N
    return bool(t_star >= -LP_TOL)


def helstrom(prior: float, rho0, rho1) -> float:
    """Optimal success probability for telling rho0 (weight prior) from rho1."""
    if not 0.0 <= prior <= 1.0:
        raise ValueError("prior must lie in [0, 1]")
    rho0, rho1 = la.as_hermitian(rho0), la.as_hermitian(rho1)
    return 0.5 * (1.0 + la.trace_norm(prior * rho0 - (1 - prior) * rho1))
