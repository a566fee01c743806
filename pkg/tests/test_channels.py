import math

import numpy as np
import pytest

from decolab import channels as ch, entropies as en, qmat, states as st
from decolab.errors import DimMismatch, NotTracePreserving
from decolab.infotypes import basis, fourier_mu_basis, sample_equivalence_class, standard_basis

Z2 = standard_basis(2)


def h_bin(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_channel_validation():
    with pytest.raises(NotTracePreserving):
        ch.QuantumChannel((np.eye(2) * 0.9,))
    with pytest.raises(DimMismatch):
        ch.QuantumChannel((np.eye(2), np.zeros((3, 2))))


def test_stinespring_pair(rng):
    c = ch.random_channel(3, 2, 4, rng)
    v = c.isometry()
    assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-12)
    rho = st.random_state(dims=(3,), seed=rng).matrix
    out = v @ rho @ v.conj().T
    assert np.max(np.abs(qmat.partial_trace(out, (2, 4), [0]) - c.apply(rho))) < 1e-10
    assert np.max(np.abs(qmat.partial_trace(out, (2, 4), [1]) - c.complementary(rho))) < 1e-10


def test_choi_examples():
    tri = ch.choi_triple(ch.identity(2))
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert abs(abs(np.vdot(tri.omega.amplitudes, phi)) - 1) < 1e-12
    dep = ch.choi_triple(ch.depolarizing(2, 1.0))
    assert np.allclose(dep.marginal().matrix, np.eye(4) / 4, atol=1e-12)
    pf = ch.phase_flip(0.25)
    assert np.max(np.abs(ch.choi_triple(pf).marginal().matrix - ch.choi_marginal_direct(pf))) < 1e-10


def test_reference_marginal_is_maximally_mixed(rng):
    tri = ch.choi_triple(ch.random_channel(3, 3, 2, rng))
    assert np.max(np.abs(tri.density().reduce([0]).matrix - np.eye(3) / 3)) < 1e-9


@pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.5])
def test_phase_flip_information(p, rng):
    c = ch.phase_flip(p)
    assert abs(ch.channel_info(c, Z2) - (1 - h_bin(p))) < 1e-9
    w = sample_equivalence_class(Z2, rng).basis()
    assert abs(ch.channel_info(c, w) - 1) < 1e-9


def test_identity_channel_leaks_nothing(rng):
    z = basis(st.random_unitary(3, rng))
    assert abs(ch.channel_info(ch.identity(3), z) - math.log2(3)) < 1e-9
    assert abs(ch.channel_info(ch.identity(3), z, ch.KEPT_BY_OUTPUT)) < 1e-9


def test_channel_info_rejects_bad_basis():
    with pytest.raises(DimMismatch):
        ch.channel_info(ch.identity(2), standard_basis(3))
    with pytest.raises(ValueError):
        ch.channel_info(ch.identity(2), Z2, which="both")


def test_decoherence_profiles():
    prof = ch.decoherence_profile(ch.identity(2), Z2, samples=500)
    assert abs(prof.offdiagonal_sum - 0.5) < 1e-12
    assert prof.exact_gap < 1e-9 and prof.consistent
    prof = ch.decoherence_profile(ch.dephasing(Z2), Z2, samples=500)
    assert max(abs(prof.offdiagonal_sum), abs(prof.env_missing_quad), abs(prof.mu_certainty_mean)) < 1e-12
    prof = ch.decoherence_profile(ch.phase_flip(0.25), Z2, samples=4000, seed=2)
    assert prof.consistent
    assert set(prof.to_dict()) >= {"exact_gap", "average_gap", "consistent"}


def test_tradeoff_with_mu_bases(rng):
    c = ch.random_channel(2, 2, 3, rng)
    z = basis(st.random_unitary(2, rng))
    leaked = ch.channel_info(c, z)
    for w in [fourier_mu_basis(z)] + [sample_equivalence_class(z, rng).basis() for _ in range(10)]:
        assert leaked >= ch.channel_certainty(c, w) - 1e-8


def test_verify_channel_all_pass(rng):
    for c in (ch.phase_flip(0.3), ch.depolarizing(2, 0.4), ch.random_channel(2, 3, 2, rng),
              ch.random_channel(3, 2, 3, rng)):
        z = basis(st.random_unitary(c.d_in, rng))
        reps = ch.verify_channel(c, z, samples=2000, seed=1)
        assert all(r.passed for r in reps), [r.to_dict() for r in reps if not r.passed]


def test_environment_isometry_invariance(rng):
    c = ch.random_channel(2, 2, 2, rng)
    padded = ch.QuantumChannel(tuple(c.kraus) + (np.zeros((2, 2)),))
    z = basis(st.random_unitary(2, rng))
    for kind in (en.VN, en.QUAD, en.MIN):
        assert abs(ch.channel_info(c, z, kind=kind) - ch.channel_info(padded, z, kind=kind)) < 1e-8


def test_json_roundtrip(tmp_path, rng):
    c = ch.random_channel(2, 3, 2, rng)
    path = tmp_path / "c.json"
    ch.save_channel(c, path)
    back = ch.load_channel(path)
    assert all(np.array_equal(a, b) for a, b in zip(back.kraus, c.kraus))
    with pytest.raises(DimMismatch):
        ch.channel_from_json({"d_in": 2, "d_out": 2, "kraus": [st.encode_matrix(np.eye(3))]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DimMismatch):
        ch.load_channel(bad)


def test_phase_flip_grid():
    grid = ch.phase_flip_grid()
    assert len(grid) == 6 and all(c.d_in == 2 for c in grid)
