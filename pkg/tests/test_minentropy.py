import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artforge import linalg as la
from artforge.convert import apply_linear, sample_rng_channel
from artforge.errors import DimensionError, TOutOfRange
from artforge.minentropy import (BipartiteState, OmegaParams, R_fixed, R_full,
                                 build_omega, f_omega, guessing_value, guessing_value_dual,
                                 hmin, hmin_dual)
from artforge.oracles import helstrom
from artforge.theory import build_theory, coherence, gibbs, sample_dual_state

seeds = st.integers(min_value=0, max_value=2**32 - 1)
PLUS = la.proj(np.array([1, 1]) / np.sqrt(2))
ZERO, ONE = la.proj(la.ket(2, 0)), la.proj(la.ket(2, 1))


def cq_state(prior, rho0, rho1):
    return BipartiteState((2, rho0.shape[0]), prior * la.kron(ZERO, rho0)
                          + (1 - prior) * la.kron(ONE, rho1))


def test_product_state():
    rng = np.random.default_rng(0)
    for dp in (2, 3):
        rho = la.random_density(2, rng)
        om = BipartiteState((dp, 2), la.kron(np.eye(dp) / dp, rho))
        assert hmin(om) == pytest.approx(np.log2(dp), abs=1e-6)
        assert hmin_dual(om) == pytest.approx(np.log2(dp), abs=1e-6)


def test_maximally_entangled():
    om = BipartiteState((2, 2), la.phi_plus(2) / 2)
    assert guessing_value(om).two_pow_neg_hmin == pytest.approx(2.0, abs=1e-6)
    assert hmin(om) == pytest.approx(-1.0, abs=1e-6)
    assert hmin_dual(om) == pytest.approx(-1.0, abs=1e-6)


def test_classical_perfect_guessing():
    om = cq_state(0.5, ZERO, ONE)
    assert guessing_value(om).two_pow_neg_hmin == pytest.approx(1.0, abs=1e-6)


def test_cq_matches_helstrom():
    om = cq_state(0.5, ZERO, PLUS)
    target = 0.5 * (1 + 1 / np.sqrt(2))
    assert helstrom(0.5, ZERO, PLUS) == pytest.approx(target, abs=1e-12)
    assert guessing_value(om).two_pow_neg_hmin == pytest.approx(target, abs=1e-6)
    assert guessing_value_dual(om).two_pow_neg_hmin == pytest.approx(target, abs=1e-6)


def test_dims_required():
    with pytest.raises(DimensionError):
        hmin(np.eye(4) / 4)
    with pytest.raises(DimensionError):
        BipartiteState((2, 3), np.eye(4) / 4)


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2)]))
def test_primal_dual_agree(seed, dims):
    rng = np.random.default_rng(seed)
    om = BipartiteState(dims, la.random_density(dims[0] * dims[1], rng))
    assert hmin(om) == pytest.approx(hmin_dual(om), abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(seeds, st.floats(min_value=0.0, max_value=1.0))
def test_cq_helstrom_property(seed, prior):
    rng = np.random.default_rng(seed)
    r0, r1 = la.random_density(2, rng), la.random_density(2, rng)
    val = guessing_value(cq_state(prior, r0, r1)).two_pow_neg_hmin
    assert val == pytest.approx(helstrom(prior, r0, r1), abs=1e-6)


def test_build_omega_forms():
    u = np.eye(2) / 2
    p = OmegaParams(u, (u,), (u,))
    assert np.allclose(build_omega(p, u).state, np.eye(4) / 4)
    # single free state: half eta (x) rho plus half omega (x) gamma
    rng = np.random.default_rng(1)
    eta, w, rho = (la.random_density(2, rng, real=True) for _ in range(3))
    gamma = np.diag([0.75, 0.25])
    om = build_omega(OmegaParams(eta, (w,), (gamma,)), rho)
    assert np.allclose(om.state, 0.5 * (la.kron(eta, rho) + la.kron(w, gamma)))
    assert np.trace(om.state).real == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        build_omega(OmegaParams(eta, (w,), (np.eye(3) / 3,)), rho)


def _apply_on_b(choi, om):
    dA, dB = om.dims
    T = om.state.reshape(dA, dB, dA, dB)
    dout = choi.d_out
    out = np.zeros((dA, dout, dA, dout), dtype=complex)
    for a in range(dA):
        for b in range(dA):
            out[a, :, b, :] = apply_linear(choi.matrix, choi.dims, T[a, :, b, :])
    return BipartiteState((dA, dout), out.reshape(dA * dout, dA * dout))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_data_processing(seed):
    rng = np.random.default_rng(seed)
    T = build_theory(coherence(2))
    choi = sample_rng_channel(T, T, la.random_hermitian(4, rng))
    eta = la.random_density(2, rng)
    omegas = tuple(sample_dual_state(T, la.random_hermitian(2, rng)) for _ in range(T.n))
    om = build_omega(OmegaParams(eta, omegas, T.state_basis), la.random_density(2, rng))
    assert hmin(_apply_on_b(choi, om)) >= hmin(om) - 1e-6


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_entanglement_fidelity_bound(seed):
    rng = np.random.default_rng(seed)
    T = build_theory(coherence(2))
    eta = la.random_density(2, rng)
    omegas = tuple(sample_dual_state(T, la.random_hermitian(2, rng)) for _ in range(T.n))
    om = build_omega(OmegaParams(eta, omegas, T.state_basis), la.random_density(2, rng))
    fid = la.hs_inner(om.state, la.phi_plus(2))  # = d' <phi+|Omega|phi+> for normalized phi+
    assert guessing_value(om).two_pow_neg_hmin >= fid - 1e-6


def test_f_omega_examples():
    rng = np.random.default_rng(3)
    G = build_theory(gibbs(np.diag([0.75, 0.25])))
    rho, eta, w = la.random_density(2, rng), la.random_density(2, rng), la.random_density(2, rng)
    f = f_omega(rho, eta, [w], G).two_pow_neg_hmin
    direct = guessing_value(build_omega(OmegaParams(eta, (w,), G.state_basis), rho))
    assert f == pytest.approx(direct.two_pow_neg_hmin, abs=1e-6)

    C = build_theory(coherence(2))
    u = np.eye(2) / 2
    assert f_omega(rho, u, [u, u], C).two_pow_neg_hmin == pytest.approx(0.5, abs=1e-6)

    omegas = [sample_dual_state(C, la.random_hermitian(2, rng)) for _ in range(2)]
    f = f_omega(rho, eta, omegas, C).two_pow_neg_hmin
    fixed = guessing_value(build_omega(OmegaParams(eta, tuple(omegas), (ZERO, ONE)), rho))
    assert f <= fixed.two_pow_neg_hmin + 1e-6


def test_r_functions():
    rng = np.random.default_rng(4)
    C = build_theory(coherence(2))
    rho, eta = la.random_density(2, rng), la.random_density(2, rng)
    fixed = R_fixed(rho, eta, 0.5, C, C).two_pow_neg_hmin
    full = R_full(rho, eta, 0.5, C, C, restarts=3, rng=rng)
    assert full.heuristic
    assert full.two_pow_neg_hmin <= fixed + 1e-6

    G = build_theory(gibbs(np.diag([0.75, 0.25])))
    for t in (0.25, 0.5, 0.75):
        a = R_fixed(rho, eta, t, G, G).two_pow_neg_hmin
        b = R_full(rho, eta, t, G, G, restarts=2).two_pow_neg_hmin
        assert b == pytest.approx(a, abs=1e-6)
    with pytest.raises(TOutOfRange):
        R_fixed(rho, eta, 0.9, G, G)
    with pytest.raises(TOutOfRange):
        R_fixed(rho, eta, 0.6, C, C)


def test_r_fixed_endpoint_forces_eigenprojector():
    G = build_theory(gibbs(np.diag([0.75, 0.25])))
    rng = np.random.default_rng(5)
    res = R_fixed(la.random_density(2, rng), la.random_density(2, rng), 0.75, G, G)
    # g(omega) = 3/4 is only reached by the eigenprojector of the larger eigenvalue
    assert np.allclose(res.extra["omegas"][0], ZERO, atol=1e-4)


def test_r_full_restart_stability():
    rng = np.random.default_rng(6)
    C = build_theory(coherence(2))
    rho, eta = la.random_density(2, rng), la.random_density(2, rng)
    vals = [R_full(rho, eta, 0.5, C, C, restarts=5, rng=np.random.default_rng(s)).two_pow_neg_hmin
            for s in range(2)]
    assert vals[0] == pytest.approx(vals[1], abs=1e-5)


def test_result_json():
    out = guessing_value(BipartiteState((2, 2), np.eye(4) / 4)).to_json()
    assert set(out) == {"hmin", "two_pow_neg_hmin", "method", "heuristic"}
    assert out["method"] == "primal" and out["heuristic"] is False
