import numpy as np
import pytest

from decolab import infotypes as it, qmat, states as st
from decolab.errors import BadPartition, DimMismatch, NotRankOne


def coarse_qutrit():
    return it.coarse_grain(it.standard_basis(3), [[0, 1], [2]])


def test_infotype_invariants():
    with pytest.raises(BadPartition):
        it.InfoType((np.diag([1.0, 0.0]),))
    with pytest.raises(BadPartition):
        it.InfoType((np.diag([1.0, 0.0]), np.array([[0.5, 0.5], [0.5, 0.5]])))
    with pytest.raises(DimMismatch):
        it.InfoType((np.eye(2), np.zeros((3, 3))))
    z = coarse_qutrit()
    assert z.ranks == (2, 1)
    assert not z.is_basis
    with pytest.raises(NotRankOne):
        z.vectors()


def test_pinch_examples(plus, rng):
    z = it.standard_basis(2)
    assert np.allclose(it.pinch(st.as_density(plus), z).matrix, np.eye(2) / 2)
    diag = st.DensityOperator(np.diag([0.3, 0.7]), (2,))
    assert np.allclose(it.pinch(diag, z).matrix, diag.matrix)

    rho = st.random_state(dims=(3,), seed=rng)
    out = it.pinch(rho, coarse_qutrit()).matrix
    mask = np.ones((3, 3), dtype=bool)
    mask[:2, 2] = mask[2, :2] = False
    assert np.allclose(out[mask], rho.matrix[mask])
    assert np.all(out[~mask] == 0)


def test_pinch_idempotent_and_coarse_absorbing(rng):
    rho = st.random_state(dims=(3, 2), seed=rng)
    z = it.basis(st.random_unitary(3, rng))
    once = it.pinch(rho, z)
    assert np.allclose(it.pinch(once, z).matrix, once.matrix, atol=1e-10)
    zc = it.coarse_grain(z, [[0, 2], [1]])
    # the finer pinching absorbs the coarser one in either order
    assert np.allclose(it.pinch(once, zc).matrix, once.matrix, atol=1e-10)
    assert np.allclose(it.pinch(it.pinch(rho, zc), z).matrix, once.matrix, atol=1e-10)


def test_pinch_rejects_wrong_factor(rng):
    with pytest.raises(DimMismatch):
        it.pinch(st.random_state(dims=(2, 3), seed=rng), it.standard_basis(3))


def test_measurement_isometry_examples():
    v = it.measurement_isometry(it.standard_basis(2))
    assert v.shape == (4, 2)
    assert np.allclose(v @ qmat.ket(0, 2), qmat.ket(0, 4))
    assert np.allclose(v @ qmat.ket(1, 2), qmat.ket(3, 4))
    triv = it.measurement_isometry(it.InfoType((np.eye(2),)))
    assert np.allclose(triv, np.eye(2))
    vc = it.measurement_isometry(coarse_qutrit())
    assert vc.shape == (6, 3)
    assert np.max(np.abs(vc.conj().T @ vc - np.eye(3))) < 1e-10


def test_measure_then_trace_register_is_pinching(rng):
    rho = st.random_state(dims=(3, 2), seed=rng)
    z = coarse_qutrit()
    lifted = it.measure_coherently(rho, z)
    assert abs(np.trace(lifted.matrix) - 1) < 1e-12
    assert np.allclose(lifted.reduce([1, 2]).matrix, it.pinch(rho, z).matrix, atol=1e-12)


def test_coarse_grain_examples():
    z = it.standard_basis(3)
    assert it.coarse_grain(z, [[0, 1, 2]]).n == 1
    same = it.coarse_grain(z, [[0], [1], [2]])
    assert all(np.allclose(a, b) for a, b in zip(same.projectors, z.projectors))
    with pytest.raises(BadPartition):
        it.coarse_grain(z, [[0, 1]])


def test_fourier_basis():
    w = it.fourier_mu_basis(it.standard_basis(2)).vectors()
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert abs(abs(np.vdot(w[:, 0], plus)) - 1) < 1e-12
    assert abs(abs(np.vdot(w[:, 1], minus)) - 1) < 1e-12
    z3 = it.standard_basis(3)
    assert it.max_unbiasedness_error(z3, it.fourier_mu_basis(z3)) < 1e-10


def test_fourier_basis_covariance(rng):
    u = st.random_unitary(3, rng)
    zu = it.basis(u)
    # ket phases of an InfoType are a convention, so rotate by its own kets
    w = it.fourier_mu_basis(zu)
    w0 = it.fourier_mu_basis(it.standard_basis(3)).vectors()
    rotated = it.basis(zu.vectors() @ w0)
    assert all(np.allclose(a, b, atol=1e-10) for a, b in zip(w.projectors, rotated.projectors))
    assert it.max_unbiasedness_error(zu, it.fourier_mu_basis(zu)) < 1e-10


def test_equivalence_class_samples(rng):
    z = it.standard_basis(2)
    zero = it.sample_equivalence_class(z, phases=[0.0, 0.0])
    assert np.allclose(zero.unitary(), it.fourier_mu_basis(z).vectors())
    flipped = it.sample_equivalence_class(z, phases=[0.0, np.pi]).unitary()
    base = it.fourier_mu_basis(z).vectors()
    assert abs(abs(np.vdot(flipped[:, 0], base[:, 1])) - 1) < 1e-12

    z3 = it.basis(st.random_unitary(3, rng))
    for _ in range(1000):
        s = it.sample_equivalence_class(z3, rng, permute=True)
        assert it.max_unbiasedness_error(z3, s.basis()) < 1e-9


def test_class_members_related_by_diagonal_unitary(rng):
    z = it.basis(st.random_unitary(3, rng))
    s = it.sample_equivalence_class(z, rng)
    uz = z.vectors()
    rel = uz.conj().T @ s.unitary() @ it.fourier_mu_basis(z).vectors().conj().T @ uz
    assert np.allclose(rel, np.diag(np.diag(rel)), atol=1e-10)


def test_class_unitaries_match_samples(rng):
    z = it.basis(st.random_unitary(3, rng))
    phases = rng.uniform(0, 2 * np.pi, (4, 3))
    stack = it.class_unitaries(z, phases)
    for p, u in zip(phases, stack):
        assert np.allclose(u, it.sample_equivalence_class(z, phases=p).unitary(), atol=1e-12)


def test_json_roundtrip():
    z = coarse_qutrit().on(1)
    back = it.infotype_from_json(it.infotype_to_json(z))
    assert back.subsystem == 1
    assert all(np.allclose(a, b) for a, b in zip(back.projectors, z.projectors))
    with pytest.raises(BadPartition):
        it.infotype_from_json({"nope": 1})
