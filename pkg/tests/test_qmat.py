import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from decolab import qmat, states as st
from decolab.errors import DimMismatch, EmptyKeep, NonHermitian, NonSquare, NotAState

SZ = np.diag([1.0, -1.0])


def _random_herm(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return g + g.conj().T


def test_herm_eig_identity_and_pauli():
    s = qmat.herm_eig(np.eye(2))
    assert np.allclose(s.eigenvalues, [1, 1])
    s = qmat.herm_eig(SZ)
    assert np.allclose(s.eigenvalues, [1, -1])
    assert np.allclose(np.abs(s.eigenvectors), np.eye(2))


def test_herm_eig_reconstruction(rng):
    m = _random_herm(rng, 4)
    s = qmat.herm_eig(m)
    rebuilt = s.eigenvectors @ np.diag(s.eigenvalues) @ s.eigenvectors.conj().T
    assert math.sqrt(qmat.hs_norm_sq(rebuilt - m)) < 1e-10
    assert np.all(np.diff(s.eigenvalues) <= 0)
    assert np.allclose(s.eigenvectors.conj().T @ s.eigenvectors, np.eye(4), atol=1e-10)


def test_herm_eig_errors():
    with pytest.raises(NonSquare):
        qmat.herm_eig(np.zeros((2, 3)))
    with pytest.raises(NonHermitian):
        qmat.herm_eig(np.array([[0, 1], [0, 0]]))


def test_tensor_ordering():
    assert np.array_equal(qmat.tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(qmat.tensor(SZ, np.eye(2)), np.diag([1, 1, -1, -1]))
    m = qmat.tensor(qmat.proj(qmat.ket(0, 2)), qmat.proj(qmat.ket(1, 2)))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.allclose(m, expected)


def test_partial_trace_bell_and_product(rng):
    assert np.allclose(qmat.partial_trace(st.bell_state().matrix, (2, 2), [0]), np.eye(2) / 2)
    a = st.random_state(dims=(2,), seed=rng).matrix
    b = st.random_state(dims=(3,), seed=rng).matrix
    assert np.allclose(qmat.partial_trace(np.kron(a, b), (2, 3), [0]), a)
    assert np.allclose(qmat.partial_trace(np.kron(a, b), (2, 3), [1]), b)


def test_partial_trace_composes(rng):
    rho = st.random_state(dims=(2, 3, 2), seed=rng).matrix
    once = qmat.partial_trace(rho, (2, 3, 2), [0])
    twice = qmat.partial_trace(qmat.partial_trace(rho, (2, 3, 2), [0, 1]), (2, 3), [0])
    assert np.allclose(once, twice, atol=1e-12)
    assert abs(np.trace(qmat.partial_trace(rho, (2, 3, 2), [1, 2])) - 1) < 1e-12


def test_partial_trace_errors():
    with pytest.raises(EmptyKeep):
        qmat.partial_trace(np.eye(4) / 4, (2, 2), [])
    with pytest.raises(DimMismatch):
        qmat.partial_trace(np.eye(4) / 4, (2, 3), [0])


def test_local_sandwich_matches_kron(rng):
    dims = (2, 3, 2)
    m = st.random_state(dims=dims, seed=rng).matrix
    left, right = _random_herm(rng, 3), _random_herm(rng, 3)
    direct = qmat.apply_local(left, dims, 1) @ m @ qmat.apply_local(right, dims, 1)
    assert np.allclose(qmat.local_sandwich(m, left, right, dims, 1), direct, atol=1e-12)


def test_divergence_examples(plus):
    p = qmat.proj(plus)
    zero = qmat.proj(qmat.ket(0, 2))
    for kind in ("relative_entropy", "hilbert_schmidt", "trace_distance"):
        assert abs(qmat.divergence(kind, p, p)) < 1e-12
    assert abs(qmat.divergence("fidelity", p, p) - 1) < 1e-12
    assert abs(qmat.divergence("fidelity", zero, p) - 0.5) < 1e-12
    assert abs(qmat.divergence("relative_entropy", p, np.eye(2) / 2) - 1) < 1e-12


def test_relative_entropy_support_violation(plus):
    zero = qmat.proj(qmat.ket(0, 2))
    assert qmat.relative_entropy(qmat.proj(plus), zero) == float("inf")


def test_divergence_rejects_bad_input():
    with pytest.raises(NotAState):
        qmat.divergence("fidelity", np.diag([0.5, 0.4]), np.eye(2) / 2)
    with pytest.raises(DimMismatch):
        qmat.divergence("fidelity", np.eye(2) / 2, np.eye(3) / 3)
    with pytest.raises(ValueError):
        qmat.divergence("bures", np.eye(2) / 2, np.eye(2) / 2)


def test_matrix_functions_on_support(rng):
    rho = st.random_state(dims=(4,), rank=2, seed=rng).matrix
    root = qmat.sqrtm_psd(rho)
    assert np.allclose(root @ root, rho, atol=1e-9)
    log2 = qmat.log2m_support(rho)
    w, v = np.linalg.eigh(log2 * math.log(2))
    back = (v * np.exp(w)) @ v.conj().T
    supp = qmat.support_projector(rho)
    assert np.allclose(supp @ back @ supp, rho, atol=1e-9)


def test_entropy_values():
    assert abs(qmat.entropy(np.eye(4) / 4) - 2) < 1e-12
    assert abs(qmat.entropy(st.bell_state().matrix)) < 1e-12
    assert abs(qmat.shannon([0.5, 0.5, 0.0]) - 1) < 1e-12


def test_entropies_batched_matches_single(rng):
    mats = np.array([st.random_state(dims=(3,), seed=rng).matrix for _ in range(5)])
    assert np.allclose(qmat.entropies_batched(mats), [qmat.entropy(m) for m in mats], atol=1e-12)


def test_unitary_from_generator(rng):
    u = qmat.unitary_from_generator(rng.standard_normal(8), 3)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)
    assert np.allclose(qmat.unitary_from_generator(np.zeros(3), 2), np.eye(2))


@settings(max_examples=60, deadline=None)
@given(seed=hst.integers(0, 2**32 - 1), d=hst.integers(2, 5))
def test_fidelity_properties(seed, d):
    rng = np.random.default_rng(seed)
    r = st.random_state(dims=(d,), seed=rng).matrix
    s = st.random_state(dims=(d,), seed=rng).matrix
    f = qmat.fidelity(r, s)
    assert -1e-12 <= f <= 1 + 1e-9
    assert abs(f - qmat.fidelity(s, r)) < 1e-8
    assert abs(qmat.fidelity(r, r) - 1) < 1e-8


def test_divergence_chain_on_random_pairs():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        rank = int(rng.integers(1, d + 1))
        r = st.random_state(dims=(d,), rank=rank, seed=rng).matrix
        s = st.random_state(dims=(d,), seed=rng).matrix
        rel = math.log(2) * qmat.relative_entropy(r, s)
        td = 2 * qmat.trace_distance(r, s) ** 2
        hs = qmat.hilbert_schmidt(r, s)
        worst = max(worst, td - rel, hs - td)
    assert worst <= 1e-8
