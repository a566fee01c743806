import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from decolab import entropies as en, qmat, states as st
from decolab.errors import DimMismatch, InconsistentMarginal
from decolab.infotypes import basis, coarse_grain, measure_coherently, standard_basis
from decolab.theorems import random_pure_tripartite

Z2 = standard_basis(2)


def _random_decomposition(rng, n, d):
    rho = st.random_state(dims=(n, d), seed=rng)
    return en.cq_decompose(rho, basis(st.random_unitary(n, rng)), 1)


def test_decompose_completely_absent(absent_ac):
    dec = en.cq_decompose(absent_ac, Z2, 1)
    assert np.allclose(dec.probs, [0.5, 0.5])
    assert all(np.allclose(c, np.eye(2) / 2) for c in dec.cond_states)
    assert abs(en.cond_entropy_vn(dec) - 1) < 1e-12
    assert abs(en.cond_entropy_quad(dec, np.eye(2) / 2) - 0.25) < 1e-12
    g = en.p_guess(dec)
    assert abs(g.p_guess - 0.5) < 1e-12
    for kind in (en.VN, en.QUAD, en.MIN):
        assert abs(en.certainty(kind, dec)) < 1e-12


def test_decompose_perfectly_present(present_ac):
    dec = en.cq_decompose(present_ac, Z2, 1)
    assert np.allclose(dec.probs, [0.5, 0.5])
    assert np.allclose(dec.cond_states[0], np.diag([1, 0]))
    assert np.allclose(dec.cond_states[1], np.diag([0, 1]))
    assert abs(en.cond_entropy_vn(dec)) < 1e-12
    assert abs(en.cond_entropy_quad(dec)) < 1e-12
    assert abs(en.p_guess(dec).p_guess - 1) < 1e-12
    assert abs(en.h_min(dec)) < 1e-12
    assert abs(en.certainty(en.VN, dec) - 1) < 1e-12
    assert abs(en.certainty(en.MIN, dec) - 1) < 1e-12


def test_trivial_conditioning(plus):
    dec = en.cq_decompose(st.as_density(plus), Z2)
    assert abs(en.cond_entropy_vn(dec) - 1) < 1e-12
    assert abs(en.cond_entropy_quad(dec) - 0.5) < 1e-12
    skew = st.as_density(np.array([math.sqrt(0.7), math.sqrt(0.3)]))
    assert abs(en.p_guess(en.cq_decompose(skew, Z2)).p_guess - 0.7) < 1e-12


def test_decompose_matches_isometry_route(rng):
    rho = random_pure_tripartite((2, 2, 2), rng)
    z = basis(st.random_unitary(2, rng))
    dec = en.cq_decompose(rho, z, 2)
    direct = sum(np.kron(qmat.proj(qmat.ket(j, 2)), s) for j, s in enumerate(dec.unnormalized))
    lifted = measure_coherently(rho, z)  # factors (M, A, B, C)
    via_iso = lifted.reduce([0, 3]).matrix
    assert np.max(np.abs(direct - via_iso)) < 1e-10


def test_decompose_errors(rng):
    rho = random_pure_tripartite((2, 2, 2), rng)
    with pytest.raises(DimMismatch):
        en.cq_decompose(rho, Z2, 0)
    with pytest.raises(DimMismatch):
        en.cq_decompose(rho, Z2, 5)
    with pytest.raises(InconsistentMarginal):
        en.cond_entropy_quad(en.cq_decompose(rho, Z2, 2), np.eye(2) / 2 + 0.1)


def test_zero_probability_outcomes_are_skipped():
    rho = st.DensityOperator(np.kron(np.diag([1.0, 0.0, 0.0]), np.eye(2) / 2), (3, 2))
    dec = en.cq_decompose(rho, standard_basis(3), 1)
    assert dec.cond_states[1] is None and dec.cond_states[2] is None
    assert abs(en.cond_entropy_vn(dec)) < 1e-12
    assert en.p_guess(dec).p_guess == 1.0


def test_quadratic_forms_agree(rng):
    for _ in range(20):
        dec = _random_decomposition(rng, 3, 3)
        hq = en.cond_entropy_quad(dec)
        assert abs(hq - en.cond_entropy_quad_pairwise(dec)) < 1e-10
        cq = en.certainty(en.QUAD, dec)
        assert abs(cq - en.certainty_quad_pairwise(dec)) < 1e-10
        assert abs(cq - en.certainty_quad_from_purity(dec)) < 1e-10


def test_helstrom_matches_sdp(rng):
    for _ in range(30):
        dec = _random_decomposition(rng, 2, 3)
        closed = en.p_guess(dec).p_guess
        primal, dual, _, _ = en.min_error_sdp(np.stack(dec.unnormalized)[None], 1e-10)
        assert abs(closed - primal[0]) < 1e-6
        assert dual[0] >= primal[0] - 1e-9


def test_trine_guessing_probability():
    # three symmetric real qubit states with equal priors: p_guess = 2/3
    kets = [np.array([math.cos(a), math.sin(a)]) for a in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
    dec = en.from_unnormalized([qmat.proj(k) / 3 for k in kets])
    g = en.p_guess(dec)
    assert g.method == "ipm" and g.converged
    assert abs(g.p_guess - 2 / 3) < 1e-7


def test_sdp_povm_is_valid(rng):
    dec = _random_decomposition(rng, 4, 3)
    g = en.p_guess(dec)
    assert g.residual <= en.SDP_TOL
    total = sum(g.povm)
    assert np.max(np.abs(total - np.eye(3))) < 1e-6
    assert min(np.linalg.eigvalsh(q).min() for q in g.povm) > -1e-8
    achieved = sum(float(np.real(np.trace(q @ s))) for q, s in zip(g.povm, dec.unnormalized))
    assert abs(achieved - g.p_guess) < 1e-6


def test_guess_batch_matches_single(rng):
    decs = [_random_decomposition(rng, 3, 2) for _ in range(4)]
    vals, gaps = en.guess_batch(np.array([np.stack(d.unnormalized) for d in decs]))
    for v, d in zip(vals, decs):
        assert abs(v - en.p_guess(d).p_guess) < 1e-7
    assert np.all(gaps <= en.SDP_TOL)


def test_guessing_matches_pinched_fidelity(rng):
    rho = random_pure_tripartite((3, 2, 3), rng)
    z = basis(st.random_unitary(3, rng))
    g = en.p_guess(en.cq_decompose(rho, z, 2))
    fid = en.max_pinched_fidelity(rho.reduce([0, 1]), z, restarts=10, seed=1)
    assert abs(g.p_guess - fid.value) < 1e-5


def test_unknown_kind():
    dec = en.from_unnormalized([np.eye(1) / 2, np.eye(1) / 2])
    with pytest.raises(ValueError):
        en.conditional_entropy("renyi", dec)
    with pytest.raises(ValueError):
        en.certainty("renyi", dec)


@settings(max_examples=80, deadline=None)
@given(seed=hst.integers(0, 2**32 - 1), da=hst.integers(2, 4), dc=hst.integers(1, 4))
def test_entropy_bounds_and_ordering(seed, da, dc):
    rng = np.random.default_rng(seed)
    rho = st.random_state(dims=(da, dc), seed=rng)
    dec = en.cq_decompose(rho, basis(st.random_unitary(da, rng)), 1)
    h = en.cond_entropy_vn(dec)
    hmin = en.h_min(dec)
    hq = en.cond_entropy_quad(dec)
    logn = math.log2(da)
    assert -1e-9 <= h <= logn + 1e-9
    assert -1e-9 <= hmin <= logn + 1e-9
    assert -1e-9 <= hq <= (1 - 1 / da) * qmat.purity(dec.rho_c) + 1e-9
    assert hmin <= h + 1e-7


@settings(max_examples=40, deadline=None)
@given(seed=hst.integers(0, 2**32 - 1))
def test_coarse_graining_lowers_entropies(seed):
    rng = np.random.default_rng(seed)
    rho = st.random_state(dims=(3, 2), seed=rng)
    z = basis(st.random_unitary(3, rng))
    zc = coarse_grain(z, [[0, 1], [2]])
    fine, coarse = en.cq_decompose(rho, z, 1), en.cq_decompose(rho, zc, 1)
    for kind in (en.VN, en.QUAD, en.MIN):
        assert en.conditional_entropy(kind, fine) >= en.conditional_entropy(kind, coarse) - 1e-7


def test_entropies_invariant_under_isometry_on_conditioning(rng):
    rho = random_pure_tripartite((2, 2, 2), rng)
    z = basis(st.random_unitary(2, rng))
    v = np.kron(np.eye(4), st.random_isometry(2, 3, rng))
    rotated = st.DensityOperator(v @ rho.matrix @ v.conj().T, (2, 2, 3))
    a, b = en.cq_decompose(rho, z, 2), en.cq_decompose(rotated, z, 2)
    for kind in (en.VN, en.QUAD, en.MIN):
        assert abs(en.conditional_entropy(kind, a) - en.conditional_entropy(kind, b)) < 1e-8
